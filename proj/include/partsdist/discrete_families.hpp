#pragma once

#include "partsdist/sbp.hpp"

#include <memory>
#include <string>

namespace partsdist {

using ParentPtr = std::shared_ptr<const DiscreteParent>;

// A count law as seen by fitting, curves and sampling. max_index() is the last
// index carrying mass above the 1e-12 truncation.
class CountModel {
public:
    virtual ~CountModel() = default;
    virtual double pmf(long i) const = 0;
    virtual double cdf(long k) const = 0;
    virtual double survival(long k) const = 0;
    virtual double mean() const = 0;
    virtual double variance() const = 0;
    virtual long sample(RandomStream& rng) const = 0;
    virtual long max_index() const = 0;
};

// The parent itself, for nested-model comparisons.
class ParentModel : public CountModel {
public:
    explicit ParentModel(ParentPtr parent);
    const DiscreteParent& parent() const noexcept { return *parent_; }
    double pmf(long i) const override { return parent_->pmf(i); }
    double cdf(long k) const override { return parent_->cdf(k); }
    double survival(long k) const override;
    double mean() const override { return parent_->mean(); }
    double variance() const override { return parent_->variance(); }
    long sample(RandomStream& rng) const override { return parent_->sample(rng); }
    long max_index() const override { return parent_->max_index(); }

private:
    ParentPtr parent_;
};

// A descendant under a fixed u sequence; subclasses add closed forms.
class SbpFamily : public CountModel {
public:
    SbpFamily(ParentPtr parent, USequence u);
    const DescendantPmf& descendant() const noexcept { return d_; }
    const DiscreteParent& parent() const noexcept { return d_.parent(); }
    double pmf(long i) const override { return d_.pmf(i); }
    double cdf(long k) const override { return d_.cdf(k); }
    double survival(long k) const override { return d_.survival(k); }
    double mean() const override { return d_.mean(); }
    double variance() const override { return d_.variance(); }
    long sample(RandomStream& rng) const override { return d_.sample(rng); }
    long max_index() const override { return d_.max_index(); }

protected:
    DescendantPmf d_;
};

// u_i = r^i, r > 1:
//   q_i = H_i(1/r) r^i (1 - 1/r) / (1 - H_0(1/r)/r),  H_i(x) = sum_(j>=i) p_j x^j
//   M(s) = ((r-1)/(rs-1)) (s H_0(s) - H_0(1/r)/r) / (1 - H_0(1/r)/r)
//   mu_g = (mu + 1)/(1 - H_0(1/r)/r) - r/(r-1)
class RClassFamily : public SbpFamily {
public:
    RClassFamily(ParentPtr parent, double r);

    double r() const noexcept { return r_; }
    // 1 - H_0(1/r)/r from the pgf deficits.
    double normalizer() const noexcept { return norm_; }

    double mean() const override { return mean_; }
    double pgf(double s) const;
    // q_i from H_i(1/r) = H_0(1/r) - sum_(j<i) p_j r^-j. Accurate while H_i(1/r) is
    // not small against H_0(1/r); pmf() uses the ratio recursion everywhere.
    double pmf_from_pgf(long i) const;
    // Inverse transform: K from the tilted parent weights, then
    // M = floor(1 + ln((r^K - 1/r) U + 1/r) / ln r).
    long sample(RandomStream& rng) const override;

    // The r -> 1 limit (p_i + sum_(j>i) p_j) / (1 + mu).
    static double r1_limit_pmf(const DiscreteParent& parent, long i);

private:
    double r_, delta_;  // delta = 1 - 1/r
    double h_at_inv_r_;
    double norm_;
    double mean_;
    std::vector<double> tilt_cum_;
};

// mu_g in terms of delta = 1 - 1/r and the parent pgf at 1 - delta:
// (D2 + delta D1) / (delta (D1 + delta H)), no cancellation as r -> 1.
double r_class_mean(const PgfAt& h, double delta);

// u_i = (i+1)^lambda: q_i = ((i+1)^lambda - i^lambda) sum_(j>=i) p_j/(j+1)^lambda.
// The mean has no closed form and is summed over the truncated support.
class LambdaClassFamily : public SbpFamily {
public:
    LambdaClassFamily(ParentPtr parent, double lambda);
    double lambda() const noexcept { return lambda_; }

private:
    double lambda_;
};

// The lambda class on the parent shifted down by one (p_0 = 0 required):
// q_i = ((i+1)^lambda - i^lambda) sum_(j>=i+1) p_j / j^lambda.
LambdaClassFamily bissinger_family(const DiscreteParent& parent, double lambda);

// u_i = r^i - 1/r (u(-1) = 0): q_i = r^i (1 - 1/r) sum_(j>=i) p_j / (r^j - 1/r).
class RMinusFamily : public SbpFamily {
public:
    RMinusFamily(ParentPtr parent, double r);
    double r() const noexcept { return r_; }
    // The r -> 1 limit sum_(j>=i) p_j / (j+1).
    static double r1_limit_pmf(const DiscreteParent& parent, long i);

private:
    double r_;
};

// u_i = (i+1)(i+2)...(i+t): mean t mu/(t+1) and
// variance t s^2/(t+2) + t mu^2/((t+1)^2 (t+2)) + t mu/((t+1)(t+2)).
class ProductUFamily : public SbpFamily {
public:
    ProductUFamily(ParentPtr parent, int t);
    int t() const noexcept { return t_; }
    double mean() const override;
    double variance() const override;

private:
    int t_;
};

// The n = infinity r-distribution in the long-tail direction: parent plus an
// independent geometric count with P(k) = (1 - 1/r) r^-k, so M(s) = ((r-1)/(r-s)) H_0(s).
class GeometricLongTail : public CountModel {
public:
    GeometricLongTail(ParentPtr parent, double r);
    double r() const noexcept { return r_; }

    // Coefficients of the product series, c_i = p_i + c_(i-1)/r, times (1 - 1/r).
    double pmf(long i) const override;
    double cdf(long k) const override;
    double survival(long k) const override;
    double mean() const override;
    double variance() const override;
    long sample(RandomStream& rng) const override;
    long max_index() const override;
    double pgf(double s) const;

private:
    ParentPtr parent_;
    double r_;
    std::vector<double> c_;  // c_i over the parent's table
};

}  // namespace partsdist
