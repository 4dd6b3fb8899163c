#pragma once

#include "partsdist/quadrature.hpp"

namespace partsdist {

// Upper incomplete gamma function Gamma(a; t) = int_t^inf x^(a-1) e^-x dx.
// For a > 0 this uses the series / continued fraction pair; for a <= 0 (t > 0
// required) the integral is evaluated by adaptive quadrature, split at max(t, 1)
// with the tail mapped onto [0, 1).
double upper_incomplete_gamma(double a, double t, const QuadratureConfig& cfg = {});

// Gamma(a; t) * t^-a * e^t, finite and well scaled for every a when t > 0.
double upper_incomplete_gamma_scaled(double a, double t, const QuadratureConfig& cfg = {});

// ln Gamma(a; t), without overflow for large |a|.
double log_upper_incomplete_gamma(double a, double t, const QuadratureConfig& cfg = {});

// Regularized lower/upper incomplete gamma P(a, x), Q(a, x) for a > 0, x >= 0.
double regularized_gamma_p(double a, double x);
double regularized_gamma_q(double a, double x);

// Regularized incomplete beta I_x(a, b) for a, b > 0.
double regularized_incomplete_beta(double a, double b, double x);

double log_beta(double a, double b);

// B(a, b; x) = int_x^1 y^(a-1) (1-y)^(b-1) dy, the complement of the unregularized
// incomplete beta function. a may be <= 0, in which case x must be positive.
double incomplete_beta_complement(double a, double b, double x, const QuadratureConfig& cfg = {});

double normal_pdf(double x);

// Standard normal distribution function, via erfc.
double normal_cdf(double x);

double normal_quantile(double p);

// e^x - 1 - x and log(1 + x) - x without cancellation near zero.
double expm1_minus_linear(double x);
double log1p_minus_linear(double x);

// (e^(d*x) - 1) / d, equal to x at d = 0.
double expm1_ratio(double x, double d);

}  // namespace partsdist
