#include "partsdist/families.hpp"

#include "partsdist/error.hpp"
#include "partsdist/specialfn.hpp"

#include <cmath>
#include <limits>
#include <memory>

namespace partsdist {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kEps = std::numeric_limits<double>::epsilon();

double positive_lambda(double lambda) {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) throw DomainError("lambda must be positive and finite");
    return lambda;
}

// ln F evaluated from whichever of F, Fbar is the smaller.
double log_cdf_of(const ContinuousDistribution& d, double x) {
    const double s = d.survival(x);
    return s < 0.5 ? std::log1p(-s) : std::log(d.cdf(x));
}

// Root of the increasing function h on [0, 1] with h(w) = p.
template <class H>
double solve_unit(H h, double p) {
    double lo = 0.0, hi = 1.0;
    for (int i = 0; i < 200 && hi - lo > kEps * hi; ++i) {
        const double mid = 0.5 * (lo + hi);
        (h(mid) < p ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

UFunction f_lambda_u(const DistributionPtr& base, double lambda) {
    return {[base, lambda](double x) { return std::pow(base->cdf(x), lambda); },
            [base, lambda](double x) { return lambda * std::pow(base->cdf(x), lambda - 1.0) * base->pdf(x); },
            [base, lambda](double y) { return base->quantile(std::pow(y, 1.0 / lambda)); }, 0.0};
}

}  // namespace

// ---------------------------------------------------------------- F^lambda

FLambdaFamily::FLambdaFamily(DistributionPtr base, double lambda, QuadratureConfig cfg)
    : TransformedContinuous(base, ShiftDirection::Left, f_lambda_u(base, positive_lambda(lambda)), {},
                            [base, lambda](double x) {
                                // (1 - F^(1-lambda)) / (1 - lambda)
                                return -expm1_ratio(log_cdf_of(*base, x), 1.0 - lambda);
                            },
                            0.0, cfg),
      lambda_(lambda) {
    compute_normalizer();
}

double FLambdaFamily::excess(double x) const {
    return -expm1_ratio(log_cdf_of(base(), x), lambda_ - 1.0);
}

bool FLambdaFamily::use_tail_series(double fbar) const { return fbar <= 0.5 && lambda_ * fbar <= 0.5; }

double FLambdaFamily::tail_series(double fbar) const {
    double term = 1.0;
    double sum = 1.0;
    for (int k = 2; k < 400; ++k) {
        term *= (k - lambda_) * fbar / (k + 1);
        sum += term;
        if (std::abs(term) <= kEps * std::abs(sum)) break;
    }
    return sum;
}

double FLambdaFamily::pdf(double x) const {
    const Support s = support();
    if (x < s.lower || x > s.upper) return 0.0;
    const double f = base().pdf(x);
    if (f == 0.0) return 0.0;
    return lambda_ * f * excess(x);
}

double FLambdaFamily::log_pdf(double x) const {
    const Support s = support();
    if (x < s.lower || x > s.upper) return -kInf;
    return std::log(lambda_) + base().log_pdf(x) + std::log(excess(x));
}

double FLambdaFamily::cdf(double x) const {
    const Support s = support();
    if (x <= s.lower) return 0.0;
    if (x >= s.upper) return 1.0;
    const double fbar = base().survival(x);
    if (use_tail_series(fbar)) return 1.0 - 0.5 * lambda_ * fbar * fbar * tail_series(fbar);
    const double f = base().cdf(x);
    if (f == 0.0) return 0.0;
    return f * (1.0 + excess(x));
}

double FLambdaFamily::survival(double x) const {
    const Support s = support();
    if (x <= s.lower) return 1.0;
    if (x >= s.upper) return 0.0;
    const double fbar = base().survival(x);
    if (use_tail_series(fbar)) return 0.5 * lambda_ * fbar * fbar * tail_series(fbar);
    return 1.0 - cdf(x);
}

double FLambdaFamily::log_survival(double x) const {
    const Support s = support();
    if (x <= s.lower) return 0.0;
    if (x >= s.upper) return -kInf;
    const double log_fbar = base().log_survival(x);
    const double fbar = std::exp(log_fbar);
    if (use_tail_series(fbar)) return std::log(0.5 * lambda_) + 2.0 * log_fbar + std::log(tail_series(fbar));
    return std::log(survival(x));
}

double FLambdaFamily::boundary_term(double x) const {
    const Support s = support();
    if (x <= s.lower || x >= s.upper) return 0.0;
    const double f = base().cdf(x);
    if (f == 0.0) return 0.0;
    return f * excess(x);
}

double FLambdaFamily::sample(RandomStream& rng) const {
    // F(X) is uniform, so u^-1(u(X) V) = Q(U V^(1/lambda)).
    const double w = rng.uniform();
    return base().quantile(w * std::pow(rng.uniform(), 1.0 / lambda_));
}

double FLambdaFamily::tail_ratio(double x) const {
    const double fbar = base().survival(x);
    if (use_tail_series(fbar)) return 0.5 * lambda_ * tail_series(fbar);
    return survival(x) / (fbar * fbar);
}

// ------------------------------------------------------------ exp(lambda F)

ExpLambdaFFamily::ExpLambdaFFamily(DistributionPtr base, double lambda, QuadratureConfig cfg)
    : TransformedContinuous(
          base, ShiftDirection::Left,
          UFunction{[base, lambda](double x) { return std::exp(lambda * base->cdf(x)); },
                    [base, lambda](double x) { return lambda * base->pdf(x) * std::exp(lambda * base->cdf(x)); },
                    {}, 1.0},
          {},
          [base, lambda](double x) {
              return std::exp(-lambda) * std::expm1(lambda * base->survival(x)) / lambda;
          },
          0.0, cfg),
      lambda_(positive_lambda(lambda)),
      denom_(expm1_minus_linear(-lambda)) {
    compute_normalizer();
    set_normalizer(denom_ / lambda_);
}

double ExpLambdaFFamily::left_tail_factor() const { return -lambda_ * std::expm1(-lambda_) / denom_; }

double ExpLambdaFFamily::pdf(double x) const {
    const Support s = support();
    if (x < s.lower || x > s.upper) return 0.0;
    return -lambda_ * base().pdf(x) * std::expm1(-lambda_ * base().survival(x)) / denom_;
}

double ExpLambdaFFamily::cdf(double x) const {
    const Support s = support();
    if (x <= s.lower) return 0.0;
    if (x >= s.upper) return 1.0;
    const double fbar = base().survival(x);
    if (fbar < 0.5) return 1.0 - survival(x);
    const double f = base().cdf(x);
    return (lambda_ * f - std::exp(-lambda_) * std::expm1(lambda_ * f)) / denom_;
}

double ExpLambdaFFamily::survival(double x) const {
    const Support s = support();
    if (x <= s.lower) return 1.0;
    if (x >= s.upper) return 0.0;
    return expm1_minus_linear(-lambda_ * base().survival(x)) / denom_;
}

double ExpLambdaFFamily::log_survival(double x) const {
    const Support s = support();
    if (x <= s.lower) return 0.0;
    if (x >= s.upper) return -kInf;
    const double log_fbar = base().log_survival(x);
    const double y = lambda_ * std::exp(log_fbar);
    if (y < 1e-3) {
        // e^-y - 1 + y = (y^2/2) (1 - y/3 + y^2/12 - y^3/60)
        const double series = 1.0 - y / 3.0 + y * y / 12.0 - y * y * y / 60.0;
        return 2.0 * (std::log(lambda_) + log_fbar) - std::log(2.0) + std::log(series) - std::log(denom_);
    }
    return std::log(expm1_minus_linear(-y) / denom_);
}

double ExpLambdaFFamily::boundary_term(double x) const {
    const Support s = support();
    if (x < s.lower) return 0.0;
    if (x >= s.upper) return 0.0;
    // e^(lambda F) (e^(-lambda F) - e^-lambda) / lambda
    return -std::expm1(-lambda_ * base().survival(x)) / lambda_;
}

double ExpLambdaFFamily::quantile(double p) const {
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError("quantile requires p in [0, 1]");
    const double l = lambda_;
    const double d = denom_;
    const double w = solve_unit([l, d](double f) { return (l * f - std::exp(-l) * std::expm1(l * f)) / d; }, p);
    return base().quantile(w);
}

double ExpLambdaFFamily::sample(RandomStream& rng) const { return quantile(rng.uniform()); }

// --------------------------------------------------------------- phase type

namespace {

DistributionPtr unit_exponential() { return std::make_shared<Exponential>(1.0); }

// (e^-x - e^(-lambda x)) / (lambda - 1), equal to x e^-x at lambda = 1.
double phase_uv(double lambda, double x) {
    const double m = std::min(1.0, lambda);
    return std::exp(-m * x) * expm1_ratio(x, -std::abs(lambda - 1.0));
}

}  // namespace

PhaseTypeExponential::PhaseTypeExponential(double lambda)
    : TransformedContinuous(unit_exponential(), ShiftDirection::Right, {},
                            VFunction{[lambda](double x) { return std::exp(-lambda * x); },
                                      [lambda](double x) { return -lambda * std::exp(-lambda * x); },
                                      [lambda](double y) { return -std::log(y) / lambda; }},
                            [lambda](double x) { return expm1_ratio(x, lambda - 1.0); }, 0.0, {}),
      lambda_(positive_lambda(lambda)) {
    compute_normalizer();
}

double PhaseTypeExponential::boundary_term(double x) const { return x > 0.0 ? phase_uv(lambda_, x) : 0.0; }

double PhaseTypeExponential::pdf(double x) const { return x < 0.0 ? 0.0 : lambda_ * phase_uv(lambda_, x); }

double PhaseTypeExponential::survival(double x) const {
    if (x <= 0.0) return 1.0;
    return std::exp(-x) + phase_uv(lambda_, x);
}

double PhaseTypeExponential::cdf(double x) const {
    if (x <= 0.0) return 0.0;
    const double s = survival(x);
    if (s < 0.5) return 1.0 - s;
    if (std::abs(lambda_ - 1.0) > 1e-3) {
        // (E(lambda x) - lambda E(x)) / (lambda - 1) with E(y) = e^-y - 1 + y
        return (expm1_minus_linear(-lambda_ * x) - lambda_ * expm1_minus_linear(-x)) / (lambda_ - 1.0);
    }
    return integrate([this](double y) { return pdf(y); }, 0.0, x);
}

double PhaseTypeExponential::sample(RandomStream& rng) const {
    const double a = -std::log(rng.uniform());
    return a - std::log(rng.uniform()) / lambda_;
}

double PhaseTypeExponential::moment(int n) const {
    // E (A + B)^n = n! sum_j lambda^-(n-j) for A ~ Exp(1), B ~ Exp(lambda)
    double sum = 0.0;
    for (int j = 0; j <= n; ++j) sum += std::pow(lambda_, -(n - j));
    return std::tgamma(n + 1.0) * sum;
}

// ------------------------------------------------------ exponential-gamma mix

ExpGammaMixture::ExpGammaMixture(double lambda)
    : TransformedContinuous(unit_exponential(), ShiftDirection::Right, {},
                            VFunction{[lambda](double t) { return std::pow(t, -lambda) * std::exp(-t); },
                                      [lambda](double t) {
                                          return -(lambda / t + 1.0) * std::pow(t, -lambda) * std::exp(-t);
                                      },
                                      {}},
                            [lambda](double t) { return std::pow(t, lambda + 1.0) / (lambda + 1.0); }, 0.0, {}),
      lambda_(positive_lambda(lambda)) {
    compute_normalizer();
}

double ExpGammaMixture::boundary_term(double x) const {
    return x > 0.0 ? x * std::exp(-x) / (lambda_ + 1.0) : 0.0;
}

double ExpGammaMixture::pdf(double x) const {
    return x < 0.0 ? 0.0 : (lambda_ + x) * std::exp(-x) / (lambda_ + 1.0);
}

double ExpGammaMixture::cdf(double x) const {
    if (x <= 0.0) return 0.0;
    return -std::expm1(-x) - boundary_term(x);
}

double ExpGammaMixture::survival(double x) const {
    if (x <= 0.0) return 1.0;
    return std::exp(-x) + boundary_term(x);
}

double ExpGammaMixture::sample(RandomStream& rng) const {
    if (rng.uniform() * (lambda_ + 1.0) < lambda_) return -std::log(rng.uniform());
    const double a = -std::log(rng.uniform());
    return a - std::log(rng.uniform());
}

double ExpGammaMixture::moment(int n) const {
    return std::tgamma(n + 1.0) * (n + 1.0 + lambda_) / (lambda_ + 1.0);
}

// -------------------------------------------------------------- Stacy shift

struct StacyLShift::Constants {
    double alpha, beta, gamma, k, a, lgamma_beta;
    QuadratureConfig cfg;

    double log_uv(double t) const {
        const double lz = gamma * std::log(alpha * t);
        const double z = std::exp(lz);
        if (z < 1e-300) {
            if (a > 0.0) return (beta - a) * lz + std::lgamma(a) - lgamma_beta;
            if (a < 0.0) return beta * lz - std::log(-a) - lgamma_beta;
            return beta * lz + std::log(-lz) - lgamma_beta;
        }
        return beta * lz - z + std::log(upper_incomplete_gamma_scaled(a, z, cfg)) - lgamma_beta;
    }
};

StacyLShift::Constants StacyLShift::make_constants(double alpha, double beta, double gamma, double lambda,
                                                   QuadratureConfig cfg) {
    if (!(alpha > 0.0) || !(beta > 0.0) || !(gamma > 0.0)) {
        throw DomainError("Stacy parameters alpha, beta, gamma must be positive");
    }
    const double k = beta * gamma - 1.0 + lambda;
    if (!(k > 0.0)) throw DomainError("Stacy L-shift needs beta*gamma - 1 + lambda > 0");
    return {alpha, beta, gamma, k, (1.0 - lambda) / gamma, std::lgamma(beta), cfg};
}

StacyLShift::StacyLShift(double alpha, double beta, double gamma, double lambda, QuadratureConfig cfg)
    : StacyLShift(make_constants(alpha, beta, gamma, lambda, cfg), lambda) {}

StacyLShift::StacyLShift(const Constants& sc, double lambda)
    : TransformedContinuous(std::make_shared<Stacy>(sc.alpha, sc.beta, sc.gamma), ShiftDirection::Left,
                            UFunction{[k = sc.k](double t) { return std::pow(t, k); },
                                      [k = sc.k](double t) { return k * std::pow(t, k - 1.0); },
                                      [k = sc.k](double y) { return std::pow(y, 1.0 / k); }, 0.0},
                            {},
                            [sc](double t) {
                                if (t <= 0.0) return kInf;
                                return std::exp(sc.log_uv(t) - sc.k * std::log(t));
                            },
                            0.0, sc.cfg),
      alpha_(sc.alpha),
      beta_(sc.beta),
      gamma_(sc.gamma),
      lambda_(lambda),
      k_(sc.k),
      a_(sc.a),
      lgamma_beta_(sc.lgamma_beta) {
    compute_normalizer();
}

double StacyLShift::log_boundary_term(double x) const {
    const double lz = gamma_ * std::log(alpha_ * x);
    const double z = std::exp(lz);
    if (z < 1e-300) {
        // Gamma(a; z) -> Gamma(a), z^a/(-a) or -ln z as z -> 0
        if (a_ > 0.0) return (beta_ - a_) * lz + std::lgamma(a_) - lgamma_beta_;
        if (a_ < 0.0) return beta_ * lz - std::log(-a_) - lgamma_beta_;
        return beta_ * lz + std::log(-lz) - lgamma_beta_;
    }
    return beta_ * lz - z + std::log(upper_incomplete_gamma_scaled(a_, z, quadrature())) - lgamma_beta_;
}

double StacyLShift::boundary_term(double x) const {
    if (x <= 0.0 || std::isinf(x)) return 0.0;
    return std::exp(log_boundary_term(x));
}

double StacyLShift::log_pdf(double x) const {
    if (x < 0.0) return -kInf;
    if (x == 0.0) return k_ < 1.0 ? kInf : -kInf;
    if (std::isinf(x)) return -kInf;
    return std::log(k_) - std::log(x) + log_boundary_term(x);
}

double StacyLShift::pdf(double x) const { return std::exp(log_pdf(x)); }

double StacyLShift::cdf(double x) const {
    if (x <= 0.0) return 0.0;
    if (std::isinf(x)) return 1.0;
    return base().cdf(x) + boundary_term(x);
}

double StacyLShift::log_survival(double x) const {
    if (x <= 0.0) return 0.0;
    if (std::isinf(x)) return -kInf;
    const double log_fbar = base().log_survival(x);
    const double log_uv = log_boundary_term(x);
    const double r = std::exp(log_uv - log_fbar);
    if (r < 0.75) return log_fbar + std::log1p(-r);
    // Gbar = z^beta e^-z D / Gamma(beta) with
    // D = int_1^inf y^(a-1) (y^(beta-a) - 1) e^(-z (y-1)) dy, written in w = z (y - 1).
    const double z = std::pow(alpha_ * x, gamma_);
    const double db = beta_ - a_;
    const double am1 = a_ - 1.0;
    const double d = integrate(
                         [z, db, am1](double w) {
                             const double l = std::log1p(w / z);
                             return std::exp(am1 * l - w) * std::expm1(db * l);
                         },
                         0.0, kInf, quadrature()) /
                     z;
    return beta_ * std::log(z) - z + std::log(d) - lgamma_beta_;
}

double StacyLShift::survival(double x) const {
    if (x <= 0.0) return 1.0;
    if (std::isinf(x)) return 0.0;
    const double fbar = base().survival(x);
    const double diff = fbar - boundary_term(x);
    if (diff > 0.25 * fbar) return diff;
    return std::exp(log_survival(x));
}

double StacyLShift::sample(RandomStream& rng) const {
    const double x = base().sample(rng);
    return x * std::pow(rng.uniform(), 1.0 / k_);
}

double StacyLShift::moment(int n) const { return k_ / (k_ + n) * base().moment(n); }

// ------------------------------------------------------ modified exponential

ModifiedExponential::ModifiedExponential(double alpha) : StacyLShift(alpha, 1.0, 1.0, 0.5) {}

double ModifiedExponential::pdf(double x) const {
    if (x < 0.0) return 0.0;
    if (x == 0.0) return kInf;
    const double s = alpha() * x;
    const double r = std::sqrt(s);
    // alpha sqrt(pi) Phi(-sqrt(2s)) / sqrt(s), with Phi(-sqrt(2s)) = erfc(sqrt s) / 2
    const double g = alpha() * std::sqrt(M_PI) * 0.5 * std::erfc(r) / r;
    return g > 0.0 ? g : StacyLShift::pdf(x);
}

double ModifiedExponential::survival(double x) const {
    if (x <= 0.0) return 1.0;
    const double s = alpha() * x;
    const double e = std::exp(-s);
    const double gbar = e - std::sqrt(M_PI * s) * std::erfc(std::sqrt(s));
    return gbar > 0.25 * e ? gbar : StacyLShift::survival(x);
}

double ModifiedExponential::moment(int n) const {
    return std::tgamma(n + 1.0) / ((1.0 + 2.0 * n) * std::pow(alpha(), n));
}

double ModifiedExponential::sample(RandomStream& rng) const {
    const double u = rng.uniform();
    return -u * u * std::log(rng.uniform()) / alpha();
}

// --------------------------------------------------------------- beta shift

namespace {

double beta_shift_exponent(double a, double b, double lambda, double c) {
    if (!(a > 0.0) || !(b > 0.0)) throw DomainError("beta shapes must be positive");
    if (!(c >= 0.0) || !std::isfinite(c)) throw DomainError("beta L-shift constant c must be >= 0");
    const double k = a + lambda - 1.0;
    if (!(k > 0.0)) throw DomainError("beta L-shift needs a + lambda - 1 > 0");
    return k;
}

}  // namespace

BetaLShift::BetaLShift(double a, double b, double lambda, double c, bool mirror, QuadratureConfig cfg)
    : TransformedContinuous(
          std::make_shared<BetaDistribution>(a, b), ShiftDirection::Left,
          UFunction{[k = beta_shift_exponent(a, b, lambda, c)](double x) { return std::pow(x, k); },
                    [k = a + lambda - 1.0](double x) { return k * std::pow(x, k - 1.0); },
                    [k = a + lambda - 1.0](double y) { return std::pow(y, 1.0 / k); }, 0.0},
          {},
          [a, b, lambda, c, cfg, lb = log_beta(a, b)](double x) {
              if (x >= 1.0) return c;
              if (x <= 0.0 && lambda >= 1.0) return kInf;
              return incomplete_beta_complement(1.0 - lambda, b, std::max(x, 0.0), cfg) / std::exp(lb) + c;
          },
          c, cfg),
      a_(a),
      b_(b),
      lambda_(lambda),
      c_(c),
      mirror_(mirror),
      k_(a + lambda - 1.0),
      log_beta_ab_(log_beta(a, b)) {
    compute_normalizer();
}

double BetaLShift::unmirrored_pdf(double x) const { return generic_pdf(x); }
double BetaLShift::unmirrored_cdf(double x) const { return generic_cdf(x); }

double BetaLShift::unmirrored_moment(int n) const {
    return k_ / (1.0 + c_) * (c_ + base().moment(n)) / (k_ + n);
}

double BetaLShift::pdf(double x) const { return generic_pdf(mirror_ ? 1.0 - x : x); }

double BetaLShift::cdf(double x) const { return mirror_ ? generic_survival(1.0 - x) : generic_cdf(x); }

double BetaLShift::survival(double x) const { return mirror_ ? generic_cdf(1.0 - x) : generic_survival(x); }

double BetaLShift::moment(int n) const {
    if (!mirror_) return unmirrored_moment(n);
    // E (1 - Y)^n by the binomial expansion
    double sum = 0.0;
    double binom = 1.0;
    for (int j = 0; j <= n; ++j) {
        sum += ((j % 2) ? -binom : binom) * (j == 0 ? 1.0 : unmirrored_moment(j));
        binom = binom * (n - j) / (j + 1);
    }
    return sum;
}

double BetaLShift::sample(RandomStream& rng) const {
    const bool smeared_mass = rng.uniform() * (1.0 + c_) < c_;
    const double x = smeared_mass ? 1.0 : base().sample(rng);
    const double y = x * std::pow(rng.uniform(), 1.0 / k_);
    return mirror_ ? 1.0 - y : y;
}

// ------------------------------------------------------------- skew normal

SkewNormalIBP::SkewNormalIBP(double lambda, double location, double scale, QuadratureConfig cfg)
    : FLambdaFamily(std::make_shared<Normal>(location, scale), lambda, cfg), location_(location), scale_(scale) {}

}  // namespace partsdist
