#pragma once

#include "partsdist/quadrature.hpp"
#include "partsdist/random.hpp"

#include <memory>

namespace partsdist {

// Open support (lower, upper); either end may be infinite.
struct Support {
    double lower;
    double upper;

    Support(double lo, double hi);
    bool contains(double x) const noexcept { return x >= lower && x <= upper; }
    bool bounded_below() const noexcept;
    bool bounded_above() const noexcept;
};

// A univariate continuous distribution. Only support/pdf/cdf are required;
// the remaining members default to numerical routes (1 - cdf, bisection on the
// cdf, quadrature of x^n pdf) that concrete classes override with closed forms.
class ContinuousDistribution {
public:
    virtual ~ContinuousDistribution() = default;

    virtual Support support() const = 0;
    virtual double pdf(double x) const = 0;
    virtual double cdf(double x) const = 0;
    virtual double survival(double x) const;
    virtual double log_pdf(double x) const;
    virtual double log_survival(double x) const;
    double hazard(double x) const;

    // Inverse cdf. The default bisects the cdf (survival above the median) to a
    // relative width of 1e-10.
    virtual double quantile(double p) const;
    // Default: quantile(U).
    virtual double sample(RandomStream& rng) const;

    virtual double mean() const;
    // Non-central moment E[X^n]; default by quadrature.
    virtual double moment(int n) const;

    // The generic routes, reachable for cross-checks against closed forms.
    double numeric_quantile(double p) const;
    double numeric_moment(int n, const QuadratureConfig& cfg = {}) const;
};

using DistributionPtr = std::shared_ptr<const ContinuousDistribution>;

class Exponential final : public ContinuousDistribution {
public:
    explicit Exponential(double rate);
    double rate() const noexcept { return rate_; }

    Support support() const override;
    double pdf(double x) const override;
    double cdf(double x) const override;
    double survival(double x) const override;
    double log_pdf(double x) const override;
    double log_survival(double x) const override;
    double quantile(double p) const override;
    double sample(RandomStream& rng) const override;
    double mean() const override;
    double moment(int n) const override;

private:
    double rate_;
};

class Uniform final : public ContinuousDistribution {
public:
    Uniform(double lower, double upper);

    Support support() const override;
    double pdf(double x) const override;
    double cdf(double x) const override;
    double survival(double x) const override;
    double quantile(double p) const override;
    double mean() const override;
    double moment(int n) const override;

private:
    double lower_;
    double upper_;
};

// Generalized gamma: f(t) = a g (a t)^(b g - 1) exp(-(a t)^g) / Gamma(b),
// with scale rate alpha, shape beta and power gamma.
class Stacy : public ContinuousDistribution {
public:
    Stacy(double alpha, double beta, double gamma);
    double alpha() const noexcept { return alpha_; }
    double beta() const noexcept { return beta_; }
    double gamma() const noexcept { return gamma_; }

    Support support() const override;
    double pdf(double x) const override;
    double log_pdf(double x) const override;
    double cdf(double x) const override;
    double survival(double x) const override;
    double log_survival(double x) const override;
    double sample(RandomStream& rng) const override;
    double moment(int n) const override;
    double mean() const override { return moment(1); }

private:
    double alpha_;
    double beta_;
    double gamma_;
};

// Weibull with survival exp(-(alpha t)^gamma).
class Weibull final : public Stacy {
public:
    Weibull(double alpha, double gamma) : Stacy(alpha, 1.0, gamma) {}
    double quantile(double p) const override;
    double sample(RandomStream& rng) const override;
};

class BetaDistribution final : public ContinuousDistribution {
public:
    BetaDistribution(double a, double b);
    double a() const noexcept { return a_; }
    double b() const noexcept { return b_; }

    Support support() const override;
    double pdf(double x) const override;
    double cdf(double x) const override;
    double survival(double x) const override;
    double sample(RandomStream& rng) const override;
    double mean() const override;
    double moment(int n) const override;

private:
    double a_;
    double b_;
    double log_norm_;
};

class Normal final : public ContinuousDistribution {
public:
    Normal(double location, double scale);

    Support support() const override;
    double pdf(double x) const override;
    double cdf(double x) const override;
    double survival(double x) const override;
    double quantile(double p) const override;
    double mean() const override { return location_; }

private:
    double location_;
    double scale_;
};

}  // namespace partsdist
