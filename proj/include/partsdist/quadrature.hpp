#pragma once

#include <functional>

namespace partsdist {

struct QuadratureConfig {
    double abs_tol = 1e-10;
    double rel_tol = 1e-10;
    int max_subdivisions = 200;

    // Throws DomainError unless both tolerances are positive and max_subdivisions >= 1.
    void validate() const;
};

struct QuadratureResult {
    double value = 0.0;
    double error = 0.0;
    int subdivisions = 0;
};

using Integrand = std::function<double(double)>;

// Integrand that also receives upper - x, computed without cancellation when x
// lies close to the upper limit of the (finite) range.
using ComplementIntegrand = std::function<double(double x, double to_upper)>;

// Globally adaptive quadrature on a finite interval. Subintervals touching an end
// of the range use a double-exponential rule so that integrable endpoint
// singularities (x^-1/2 at a pdf's lower limit, say) converge; interior
// subintervals use 15-point Gauss-Kronrod. The integrand is never evaluated at
// either end point. Throws ConvergenceError naming the worst subinterval when
// max_subdivisions is exhausted.
QuadratureResult integrate_finite_detailed(const ComplementIntegrand& f, double lower, double upper,
                                           const QuadratureConfig& cfg = {});

double integrate_finite(const Integrand& f, double lower, double upper,
                        const QuadratureConfig& cfg = {});

// Integral over (lower, inf) using x = lower + s/(1-s), s in [0,1).
double integrate_semi_infinite(const Integrand& f, double lower, const QuadratureConfig& cfg = {});

// Any of lower/upper may be infinite; (-inf, inf) is split at zero.
double integrate(const Integrand& f, double lower, double upper, const QuadratureConfig& cfg = {});

}  // namespace partsdist
