#pragma once

#include "partsdist/ibp.hpp"

namespace partsdist {

// u = F^lambda. G = (F^lambda - lambda F) / (1 - lambda), or (1 - ln F) F at lambda = 1.
// The right tail satisfies Gbar ~ (lambda/2) Fbar^2.
class FLambdaFamily : public TransformedContinuous {
public:
    FLambdaFamily(DistributionPtr base, double lambda, QuadratureConfig cfg = {});

    double lambda() const noexcept { return lambda_; }

    double pdf(double x) const override;
    double log_pdf(double x) const override;
    double cdf(double x) const override;
    double survival(double x) const override;
    double log_survival(double x) const override;
    double boundary_term(double x) const override;
    double sample(RandomStream& rng) const override;

    // Gbar(x) / Fbar(x)^2; tends to lambda/2 at the upper limit.
    double tail_ratio(double x) const;

private:
    // (F^(lambda-1) - 1) / (1 - lambda), so that g = lambda f E and G = F (1 + E).
    double excess(double x) const;
    // Gbar / ((lambda/2) Fbar^2) as a power series in Fbar, used while Fbar and
    // lambda Fbar are at most 1/2 (beyond that 1 - G has no cancellation).
    bool use_tail_series(double fbar) const;
    double tail_series(double fbar) const;

    double lambda_;
};

// u = exp(lambda F), with u(xl) = 1:
// G = (lambda F - exp(-lambda Fbar) + exp(-lambda)) / (lambda - 1 + exp(-lambda)).
class ExpLambdaFFamily : public TransformedContinuous {
public:
    ExpLambdaFFamily(DistributionPtr base, double lambda, QuadratureConfig cfg = {});

    double lambda() const noexcept { return lambda_; }

    double pdf(double x) const override;
    double cdf(double x) const override;
    double survival(double x) const override;
    double log_survival(double x) const override;
    double boundary_term(double x) const override;
    double quantile(double p) const override;
    double sample(RandomStream& rng) const override;

    // Limit of G/F at the lower end, lambda (1 - e^-lambda) / (lambda - 1 + e^-lambda); at most 2.
    double left_tail_factor() const;

private:
    double lambda_;
    double denom_;  // lambda - 1 + e^-lambda
};

// Exp(1) shifted right with v = e^(-lambda x): the hypoexponential law of
// Exp(1) + Exp(lambda), Fbar = (e^(-lambda x) - lambda e^-x) / (1 - lambda).
class PhaseTypeExponential : public TransformedContinuous {
public:
    explicit PhaseTypeExponential(double lambda);

    double lambda() const noexcept { return lambda_; }

    double pdf(double x) const override;
    double cdf(double x) const override;
    double survival(double x) const override;
    double boundary_term(double x) const override;
    double sample(RandomStream& rng) const override;
    double mean() const override { return 1.0 + 1.0 / lambda_; }
    double moment(int n) const override;

private:
    double lambda_;
};

// Exp(1) shifted right with v = t^-lambda e^-t: weights lambda/(lambda+1) on Exp(1)
// and 1/(lambda+1) on Gamma(2, 1).
class ExpGammaMixture : public TransformedContinuous {
public:
    explicit ExpGammaMixture(double lambda);

    double lambda() const noexcept { return lambda_; }

    double pdf(double x) const override;
    double cdf(double x) const override;
    double survival(double x) const override;
    double boundary_term(double x) const override;
    double sample(RandomStream& rng) const override;
    double mean() const override { return (2.0 + lambda_) / (1.0 + lambda_); }
    double moment(int n) const override;

private:
    double lambda_;
};

// Stacy(alpha, beta, gamma) shifted left with u = t^k, k = beta gamma - 1 + lambda > 0.
// With z = (alpha t)^gamma and a = (1 - lambda)/gamma,
//   u v = z^(beta - a) Gamma(a; z) / Gamma(beta),  g = k u v / t,  Gbar = Fbar - u v.
// a <= 0 (lambda >= 1) puts Gamma(a; z) on the quadrature branch.
class StacyLShift : public TransformedContinuous {
public:
    StacyLShift(double alpha, double beta, double gamma, double lambda, QuadratureConfig cfg = {});

    double alpha() const noexcept { return alpha_; }
    double beta() const noexcept { return beta_; }
    double gamma() const noexcept { return gamma_; }
    double lambda() const noexcept { return lambda_; }
    double exponent() const noexcept { return k_; }

    // Reliability growth 1/k, and E_g(T)/E_f(T) = k/(k+1).
    double xi() const noexcept { return 1.0 / k_; }
    double mean_ratio() const noexcept { return k_ / (k_ + 1.0); }

    double pdf(double x) const override;
    double log_pdf(double x) const override;
    double cdf(double x) const override;
    double survival(double x) const override;
    double log_survival(double x) const override;
    double boundary_term(double x) const override;
    double sample(RandomStream& rng) const override;
    double mean() const override { return moment(1); }
    // E_g(T^n) = k/(k+n) E_f(T^n).
    double moment(int n) const override;

    // ln(u v) at t > 0.
    double log_boundary_term(double x) const;

private:
    struct Constants;
    static Constants make_constants(double alpha, double beta, double gamma, double lambda, QuadratureConfig cfg);
    StacyLShift(const Constants& sc, double lambda);

    double alpha_, beta_, gamma_, lambda_;
    double k_;
    double a_;  // first argument of the incomplete gamma
    double lgamma_beta_;
};

// Exp(alpha) shifted left with u = sqrt(t): StacyLShift(alpha, 1, 1, 1/2) in closed form.
//   g = alpha sqrt(pi) Phi(-sqrt(2 alpha t)) / sqrt(alpha t)
//   Gbar = e^(-alpha t) - 2 sqrt(pi alpha t) Phi(-sqrt(2 alpha t))
//   E(T^n) = n! / ((1 + 2n) alpha^n)
class ModifiedExponential : public StacyLShift {
public:
    explicit ModifiedExponential(double alpha);

    double pdf(double x) const override;
    double survival(double x) const override;
    double moment(int n) const override;
    // T = -U^2 ln(V) / alpha.
    double sample(RandomStream& rng) const override;
};

// Beta(a, b) shifted left with u = x^k, k = a + lambda - 1 > 0, and integration
// constant v(1) = c >= 0:
//   v = B(1 - lambda, b; x)/B(a, b) + c,  g = k x^(k-1) v / (1 + c),  G = (F + x^k v)/(1 + c).
// With mirror set the law is that of 1 - Y; u, v and boundary_term refer to the
// unmirrored transform.
class BetaLShift : public TransformedContinuous {
public:
    BetaLShift(double a, double b, double lambda, double c = 0.0, bool mirror = false, QuadratureConfig cfg = {});

    double a() const noexcept { return a_; }
    double b() const noexcept { return b_; }
    double lambda() const noexcept { return lambda_; }
    double c() const noexcept { return c_; }
    bool mirrored() const noexcept { return mirror_; }

    double pdf(double x) const override;
    double cdf(double x) const override;
    double survival(double x) const override;
    double sample(RandomStream& rng) const override;
    double mean() const override { return moment(1); }
    double moment(int n) const override;

    // The unmirrored pdf, cdf and moments.
    double unmirrored_pdf(double x) const;
    double unmirrored_cdf(double x) const;
    double unmirrored_moment(int n) const;

private:
    double a_, b_, lambda_, c_;
    bool mirror_;
    double k_;
    double log_beta_ab_;
};

// F^lambda family on a normal base: G = (Phi^lambda - lambda Phi) / (1 - lambda)
// in z = (x - location) / scale.
class SkewNormalIBP : public FLambdaFamily {
public:
    SkewNormalIBP(double lambda, double location = 0.0, double scale = 1.0, QuadratureConfig cfg = {});

    double location() const noexcept { return location_; }
    double scale() const noexcept { return scale_; }

private:
    double location_, scale_;
};

}  // namespace partsdist
