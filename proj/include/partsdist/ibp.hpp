#pragma once

#include "partsdist/distribution.hpp"

#include <functional>

namespace partsdist {

using RealFunction = std::function<double(double)>;

// Positive nondecreasing u with u' and (optionally) u^-1.
struct UFunction {
    RealFunction u;
    RealFunction u_prime;
    RealFunction u_inverse;  // empty when no closed-form inverse exists
    double u_at_lower = 0.0;
};

// Positive nonincreasing v with v' and (optionally) v^-1; used for R-shifts.
struct VFunction {
    RealFunction v;
    RealFunction v_prime;
    RealFunction v_inverse;
};

enum class ShiftDirection { Left, Right };

// Distribution obtained by integrating a pdf by parts.
//
// Left shift: the base f = -u v' is the R form. v(x) = int_x^xh f/u + v(xh) and
//   g = u' v / N,  G = (F + u v - u(xl) v(xl)) / N,  N = 1 + u(xh) v(xh) - u(xl) v(xl).
// Right shift: the base g is the L form and v is given. u(x) = int_xl^x g/v and
//   f = -u v',  F = G - u v.
// The shifted distribution is dominated by (left) or dominates (right) the base
// whenever the boundary terms vanish.
//
// Families with closed forms derive from this class and override pdf/cdf/...;
// the generic_* members keep the quadrature route reachable for cross-checks.
class TransformedContinuous : public ContinuousDistribution {
public:
    // v_closed (optional) replaces the quadrature for v; v_at_upper is the
    // integration constant v(xh), allowed to be nonzero only for a finite upper limit.
    static TransformedContinuous left(DistributionPtr base, UFunction u, RealFunction v_closed = {},
                                      double v_at_upper = 0.0, QuadratureConfig cfg = {});
    // u_closed (optional) replaces the quadrature int_xl^x g/v.
    static TransformedContinuous right(DistributionPtr base_left, VFunction v,
                                       RealFunction u_closed = {}, QuadratureConfig cfg = {});

    ShiftDirection direction() const noexcept { return direction_; }
    const ContinuousDistribution& base() const noexcept { return *base_; }
    DistributionPtr base_ptr() const noexcept { return base_; }
    double normalizer() const noexcept { return normalizer_; }
    const QuadratureConfig& quadrature() const noexcept { return cfg_; }

    double u(double x) const;
    double u_prime(double x) const;
    double v(double x) const;
    // u(x) v(x), the integrated-out boundary term; zero at both ends of the support
    // when the transform needs no normalizer.
    virtual double boundary_term(double x) const;
    double u_lower_v_lower() const noexcept { return ulvl_; }
    double u_upper_v_upper() const noexcept { return uhvh_; }

    Support support() const override;
    double pdf(double x) const override { return generic_pdf(x); }
    double cdf(double x) const override { return generic_cdf(x); }
    double survival(double x) const override { return generic_survival(x); }
    double sample(RandomStream& rng) const override;
    double mean() const override { return mean_shift(); }

    double generic_pdf(double x) const;
    double generic_cdf(double x) const;
    double generic_survival(double x) const;

    // Mean from the base mean and int u v (no quadrature of x * pdf).
    double mean_shift() const;

    // Y = u^-1(u(X) V) for left shifts, Y = v^-1(v(X) V) for right shifts, X from
    // the base. Throws UnsupportedError when the inverse is missing or a boundary
    // term is nonzero; sample() then falls back to numeric inversion of the cdf.
    double sample_by_smearing(RandomStream& rng) const;
    bool can_sample_by_smearing() const noexcept;

protected:
    TransformedContinuous(DistributionPtr base, ShiftDirection direction, UFunction u, VFunction v,
                          RealFunction closed, double v_at_upper, QuadratureConfig cfg);
    void compute_normalizer();
    // For families whose closed-form normalizer is more accurate than 1 + uh vh - ul vl.
    void set_normalizer(double n) { normalizer_ = n; }

private:
    DistributionPtr base_;
    ShiftDirection direction_;
    UFunction u_;
    VFunction v_;
    RealFunction closed_;  // v (left) or u (right) in closed form
    double v_at_upper_;
    QuadratureConfig cfg_;
    double ulvl_ = 0.0;
    double uhvh_ = 0.0;
    double normalizer_ = 1.0;
};

// v(x) = int_x^xh f(y)/u(y) dy by quadrature.
double v_from_u(const ContinuousDistribution& base, const UFunction& u, double x,
                const QuadratureConfig& cfg = {});

// A unit mass at x0 smeared onto (xl, x0] by u: distribution function u(x)/u(x0)
// for x <= x0, 1 above.
double delta_smear(double x0, const UFunction& u, double x);

// Constructs the shifts and spot-checks the u/v contract on a grid of base
// quantiles (DomainError on violation). The right shift also checks that
// u(x) v(x) vanishes at the upper end (DivergenceError otherwise).
TransformedContinuous l_shift(DistributionPtr base, UFunction u, RealFunction v_closed = {},
                              double v_at_upper = 0.0, QuadratureConfig cfg = {});
TransformedContinuous r_shift(DistributionPtr base_left, VFunction v, RealFunction u_closed = {},
                              QuadratureConfig cfg = {});

}  // namespace partsdist
