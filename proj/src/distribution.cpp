#include "partsdist/distribution.hpp"

#include "partsdist/error.hpp"
#include "partsdist/specialfn.hpp"

#include <cmath>
#include <limits>
#include <random>

namespace partsdist {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

Support::Support(double lo, double hi) : lower(lo), upper(hi) {
    if (!(lo < hi)) {
        throw DomainError("support requires lower < upper");
    }
}

bool Support::bounded_below() const noexcept { return std::isfinite(lower); }
bool Support::bounded_above() const noexcept { return std::isfinite(upper); }

double ContinuousDistribution::survival(double x) const { return 1.0 - cdf(x); }

double ContinuousDistribution::log_pdf(double x) const { return std::log(pdf(x)); }

double ContinuousDistribution::log_survival(double x) const { return std::log(survival(x)); }

double ContinuousDistribution::hazard(double x) const {
    const double s = survival(x);
    if (s > 1e-280) return pdf(x) / s;
    return std::exp(log_pdf(x) - log_survival(x));
}

double ContinuousDistribution::quantile(double p) const { return numeric_quantile(p); }

double ContinuousDistribution::sample(RandomStream& rng) const { return quantile(rng.uniform()); }

double ContinuousDistribution::mean() const { return moment(1); }

double ContinuousDistribution::moment(int n) const { return numeric_moment(n); }

double ContinuousDistribution::numeric_quantile(double p) const {
    if (!(p >= 0.0 && p <= 1.0)) {
        throw DomainError("quantile requires p in [0, 1]");
    }
    const Support s = support();
    if (p == 0.0) return s.lower;
    if (p == 1.0) return s.upper;
    const bool upper_tail = p > 0.5;
    const double q = 1.0 - p;
    // below(x): the root lies to the right of x.
    auto below = [&](double x) { return upper_tail ? survival(x) > q : cdf(x) < p; };

    double lo = s.lower;
    double hi = s.upper;
    if (!s.bounded_below() || !s.bounded_above()) {
        double anchor = s.bounded_below() ? s.lower : (s.bounded_above() ? s.upper : 0.0);
        double step = 1.0;
        if (!s.bounded_below()) {
            lo = anchor - step;
            while (!below(lo)) {
                step *= 2.0;
                lo = anchor - step;
                if (!std::isfinite(lo)) throw ConvergenceError("quantile bracket expansion failed");
            }
        }
        step = 1.0;
        if (!s.bounded_above()) {
            hi = anchor + step;
            while (below(hi)) {
                step *= 2.0;
                hi = anchor + step;
                if (!std::isfinite(hi)) throw ConvergenceError("quantile bracket expansion failed");
            }
        }
    }
    for (int it = 0; it < 2000; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (hi - lo <= 1e-10 * std::max(1.0, std::abs(mid)) || mid <= lo || mid >= hi) {
            return mid;
        }
        if (below(mid)) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

double ContinuousDistribution::numeric_moment(int n, const QuadratureConfig& cfg) const {
    const Support s = support();
    return integrate(
        [&](double x) {
            const double f = pdf(x);
            return f == 0.0 ? 0.0 : std::pow(x, n) * f;
        },
        s.lower, s.upper, cfg);
}

// ---------------------------------------------------------------- Exponential

Exponential::Exponential(double rate) : rate_(rate) {
    if (!(rate > 0.0) || !std::isfinite(rate)) throw DomainError("exponential rate must be positive");
}

Support Exponential::support() const { return {0.0, kInf}; }
double Exponential::pdf(double x) const { return x < 0.0 ? 0.0 : rate_ * std::exp(-rate_ * x); }
double Exponential::cdf(double x) const { return x <= 0.0 ? 0.0 : -std::expm1(-rate_ * x); }
double Exponential::survival(double x) const { return x <= 0.0 ? 1.0 : std::exp(-rate_ * x); }
double Exponential::log_pdf(double x) const { return std::log(rate_) - rate_ * x; }
double Exponential::log_survival(double x) const { return x <= 0.0 ? 0.0 : -rate_ * x; }
double Exponential::quantile(double p) const {
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError("quantile requires p in [0, 1]");
    return -std::log1p(-p) / rate_;
}
double Exponential::sample(RandomStream& rng) const { return -std::log(rng.uniform()) / rate_; }
double Exponential::mean() const { return 1.0 / rate_; }
double Exponential::moment(int n) const { return std::tgamma(n + 1.0) / std::pow(rate_, n); }

// -------------------------------------------------------------------- Uniform

Uniform::Uniform(double lower, double upper) : lower_(lower), upper_(upper) {
    if (!(lower < upper) || !std::isfinite(lower) || !std::isfinite(upper)) {
        throw DomainError("uniform requires finite lower < upper");
    }
}

Support Uniform::support() const { return {lower_, upper_}; }
double Uniform::pdf(double x) const { return (x < lower_ || x > upper_) ? 0.0 : 1.0 / (upper_ - lower_); }
double Uniform::cdf(double x) const {
    if (x <= lower_) return 0.0;
    if (x >= upper_) return 1.0;
    return (x - lower_) / (upper_ - lower_);
}
double Uniform::survival(double x) const {
    if (x <= lower_) return 1.0;
    if (x >= upper_) return 0.0;
    return (upper_ - x) / (upper_ - lower_);
}
double Uniform::quantile(double p) const {
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError("quantile requires p in [0, 1]");
    return lower_ + p * (upper_ - lower_);
}
double Uniform::mean() const { return 0.5 * (lower_ + upper_); }
double Uniform::moment(int n) const {
    return (std::pow(upper_, n + 1) - std::pow(lower_, n + 1)) / ((n + 1) * (upper_ - lower_));
}

// ---------------------------------------------------------------------- Stacy

Stacy::Stacy(double alpha, double beta, double gamma) : alpha_(alpha), beta_(beta), gamma_(gamma) {
    if (!(alpha > 0.0) || !(beta > 0.0) || !(gamma > 0.0)) {
        throw DomainError("Stacy parameters alpha, beta, gamma must be positive");
    }
}

Support Stacy::support() const { return {0.0, kInf}; }

double Stacy::log_pdf(double x) const {
    if (x < 0.0) return -kInf;
    const double z = alpha_ * x;
    return std::log(alpha_ * gamma_) + (beta_ * gamma_ - 1.0) * std::log(z) - std::pow(z, gamma_) -
           std::lgamma(beta_);
}

double Stacy::pdf(double x) const {
    if (x < 0.0) return 0.0;
    return std::exp(log_pdf(x));
}

double Stacy::cdf(double x) const {
    if (x <= 0.0) return 0.0;
    return regularized_gamma_p(beta_, std::pow(alpha_ * x, gamma_));
}

double Stacy::survival(double x) const {
    if (x <= 0.0) return 1.0;
    return regularized_gamma_q(beta_, std::pow(alpha_ * x, gamma_));
}

double Stacy::log_survival(double x) const {
    if (x <= 0.0) return 0.0;
    const double z = std::pow(alpha_ * x, gamma_);
    if (beta_ == 1.0) return -z;
    return log_upper_incomplete_gamma(beta_, z) - std::lgamma(beta_);
}

double Stacy::sample(RandomStream& rng) const {
    std::gamma_distribution<double> g(beta_, 1.0);
    return std::pow(g(rng), 1.0 / gamma_) / alpha_;
}

double Stacy::moment(int n) const {
    return std::exp(std::lgamma(beta_ + n / gamma_) - std::lgamma(beta_)) / std::pow(alpha_, n);
}

double Weibull::quantile(double p) const {
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError("quantile requires p in [0, 1]");
    return std::pow(-std::log1p(-p), 1.0 / gamma()) / alpha();
}

double Weibull::sample(RandomStream& rng) const {
    return std::pow(-std::log(rng.uniform()), 1.0 / gamma()) / alpha();
}

// ----------------------------------------------------------------------- Beta

BetaDistribution::BetaDistribution(double a, double b) : a_(a), b_(b), log_norm_(0.0) {
    if (!(a > 0.0) || !(b > 0.0)) throw DomainError("beta shapes must be positive");
    log_norm_ = log_beta(a, b);
}

Support BetaDistribution::support() const { return {0.0, 1.0}; }

double BetaDistribution::pdf(double x) const {
    if (x < 0.0 || x > 1.0) return 0.0;
    return std::exp((a_ - 1.0) * std::log(x) + (b_ - 1.0) * std::log1p(-x) - log_norm_);
}

double BetaDistribution::cdf(double x) const {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    return regularized_incomplete_beta(a_, b_, x);
}

double BetaDistribution::survival(double x) const {
    if (x <= 0.0) return 1.0;
    if (x >= 1.0) return 0.0;
    return regularized_incomplete_beta(b_, a_, 1.0 - x);
}

double BetaDistribution::sample(RandomStream& rng) const {
    std::gamma_distribution<double> ga(a_, 1.0);
    std::gamma_distribution<double> gb(b_, 1.0);
    const double x = ga(rng);
    const double y = gb(rng);
    return x / (x + y);
}

double BetaDistribution::mean() const { return a_ / (a_ + b_); }

double BetaDistribution::moment(int n) const {
    double m = 1.0;
    for (int j = 0; j < n; ++j) m *= (a_ + j) / (a_ + b_ + j);
    return m;
}

// --------------------------------------------------------------------- Normal

Normal::Normal(double location, double scale) : location_(location), scale_(scale) {
    if (!(scale > 0.0) || !std::isfinite(location)) throw DomainError("normal scale must be positive");
}

Support Normal::support() const { return {-kInf, kInf}; }
double Normal::pdf(double x) const { return normal_pdf((x - location_) / scale_) / scale_; }
double Normal::cdf(double x) const { return normal_cdf((x - location_) / scale_); }
double Normal::survival(double x) const { return normal_cdf(-(x - location_) / scale_); }
double Normal::quantile(double p) const { return location_ + scale_ * normal_quantile(p); }

}  // namespace partsdist
