#include "partsdist/specialfn.hpp"

#include "partsdist/error.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace partsdist {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kTiny = 1e-300;
constexpr int kMaxIter = 10000;

// Sum x^n / (a (a+1) ... (a+n)); P(a, x) = e^-x x^a / Gamma(a) * series.
double gamma_series(double a, double x) {
    double term = 1.0 / a;
    double sum = term;
    for (int n = 1; n < kMaxIter; ++n) {
        term *= x / (a + n);
        sum += term;
        if (std::abs(term) < std::abs(sum) * kEps) {
            return sum;
        }
    }
    throw ConvergenceError("incomplete gamma series did not converge");
}

// Legendre continued fraction (modified Lentz); Gamma(a; x) = e^-x x^a * cf.
// Converges for every real a when x > 0.
double gamma_continued_fraction(double a, double x) {
    double b = x + 1.0 - a;
    double c = 1.0 / kTiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < kMaxIter; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < kTiny) d = kTiny;
        c = b + an / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < kEps) {
            return h;
        }
    }
    throw ConvergenceError("incomplete gamma continued fraction did not converge");
}

double beta_continued_fraction(double a, double b, double x) {
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m < kMaxIter; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < kEps) {
            return h;
        }
    }
    throw ConvergenceError("incomplete beta continued fraction did not converge");
}

double gamma_integrand(double a, double x) {
    return std::exp((a - 1.0) * std::log(x) - x);
}

}  // namespace

double regularized_gamma_p(double a, double x) {
    if (!(a > 0.0) || x < 0.0) {
        throw DomainError("regularized_gamma_p requires a > 0 and x >= 0");
    }
    if (x == 0.0) return 0.0;
    if (std::isinf(x)) return 1.0;
    const double log_prefactor = a * std::log(x) - x - std::lgamma(a);
    if (x < a + 1.0) {
        return std::exp(log_prefactor) * gamma_series(a, x);
    }
    return 1.0 - std::exp(log_prefactor) * gamma_continued_fraction(a, x);
}

double regularized_gamma_q(double a, double x) {
    if (!(a > 0.0) || x < 0.0) {
        throw DomainError("regularized_gamma_q requires a > 0 and x >= 0");
    }
    if (x == 0.0) return 1.0;
    if (std::isinf(x)) return 0.0;
    const double log_prefactor = a * std::log(x) - x - std::lgamma(a);
    if (x < a + 1.0) {
        return 1.0 - std::exp(log_prefactor) * gamma_series(a, x);
    }
    return std::exp(log_prefactor) * gamma_continued_fraction(a, x);
}

double upper_incomplete_gamma(double a, double t, const QuadratureConfig& cfg) {
    if (std::isnan(a) || std::isnan(t)) {
        throw DomainError("upper_incomplete_gamma: NaN argument");
    }
    if (a > 0.0) {
        if (t < 0.0) {
            throw DomainError("upper_incomplete_gamma requires t >= 0");
        }
        if (t == 0.0) return std::tgamma(a);
        if (std::isinf(t)) return 0.0;
        if (t < a + 1.0) {
            return std::tgamma(a) * regularized_gamma_q(a, t);
        }
        return std::exp(a * std::log(t) - t) * gamma_continued_fraction(a, t);
    }
    if (!(t > 0.0)) {
        throw DomainError("upper_incomplete_gamma with a <= 0 requires t > 0");
    }
    if (std::isinf(t)) return 0.0;
    auto integrand = [a](double x) { return gamma_integrand(a, x); };
    const double split = std::max(t, 1.0);
    double head = 0.0;
    if (t < split) {
        head = integrate_finite(integrand, t, split, cfg);
    }
    return head + integrate_semi_infinite(integrand, split, cfg);
}

double upper_incomplete_gamma_scaled(double a, double t, const QuadratureConfig& cfg) {
    if (std::isnan(a) || std::isnan(t)) {
        throw DomainError("upper_incomplete_gamma_scaled: NaN argument");
    }
    if (t == std::numeric_limits<double>::infinity()) return 0.0;
    if (a > 0.0) {
        if (t < 0.0) {
            throw DomainError("upper_incomplete_gamma_scaled requires t >= 0");
        }
        if (t == 0.0) return std::numeric_limits<double>::infinity();
        if (t >= a + 1.0) {
            return gamma_continued_fraction(a, t);
        }
        return upper_incomplete_gamma(a, t, cfg) * std::exp(t - a * std::log(t));
    }
    if (!(t > 0.0)) {
        throw DomainError("upper_incomplete_gamma_scaled with a <= 0 requires t > 0");
    }
    if (std::isinf(t)) return 0.0;
    // Substituting x = t*y: int_1^inf y^(a-1) e^(-t(y-1)) dy.
    auto integrand = [a, t](double y) { return std::exp((a - 1.0) * std::log(y) - t * (y - 1.0)); };
    return integrate_semi_infinite(integrand, 1.0, cfg);
}

double log_upper_incomplete_gamma(double a, double t, const QuadratureConfig& cfg) {
    if (a > 0.0 && t == 0.0) {
        return std::lgamma(a);
    }
    return a * std::log(t) - t + std::log(upper_incomplete_gamma_scaled(a, t, cfg));
}

double log_beta(double a, double b) {
    return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

double regularized_incomplete_beta(double a, double b, double x) {
    if (!(a > 0.0) || !(b > 0.0)) {
        throw DomainError("regularized_incomplete_beta requires a, b > 0");
    }
    if (!(x >= 0.0 && x <= 1.0)) {
        throw DomainError("regularized_incomplete_beta requires x in [0, 1]");
    }
    if (x == 0.0) return 0.0;
    if (x == 1.0) return 1.0;
    const double log_front = a * std::log(x) + b * std::log1p(-x) - log_beta(a, b);
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return std::exp(log_front) * beta_continued_fraction(a, b, x) / a;
    }
    return 1.0 - std::exp(log_front) * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double incomplete_beta_complement(double a, double b, double x, const QuadratureConfig& cfg) {
    if (!(b > 0.0)) {
        throw DomainError("incomplete_beta_complement requires b > 0");
    }
    if (!(x >= 0.0 && x <= 1.0)) {
        throw DomainError("incomplete_beta_complement requires x in [0, 1]");
    }
    if (a <= 0.0 && !(x > 0.0)) {
        throw DomainError("incomplete_beta_complement with a <= 0 requires x > 0");
    }
    if (x == 1.0) return 0.0;
    if (a > 0.0) {
        // int_x^1 y^(a-1)(1-y)^(b-1) dy = B(a,b) I_(1-x)(b, a).
        double upper_part;
        if (x < (a + 1.0) / (a + b + 2.0)) {
            upper_part = 1.0 - regularized_incomplete_beta(a, b, x);
        } else {
            upper_part = regularized_incomplete_beta(b, a, 1.0 - x);
        }
        return std::exp(log_beta(a, b)) * upper_part;
    }
    // In s = ln y the integrand e^(a s) (1 - e^s)^(b-1) is smooth across the whole
    // dynamic range; the distance to s = 0 gives 1 - e^s without cancellation.
    auto integrand = [a, b](double s, double to_zero) {
        if (to_zero <= 0.0) return 0.0;
        return std::exp(a * s + (b - 1.0) * std::log(-std::expm1(-to_zero)));
    };
    return integrate_finite_detailed(integrand, std::log(x), 0.0, cfg).value;
}

double normal_pdf(double x) {
    return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

double normal_cdf(double x) {
    if (std::isnan(x)) return x;
    return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

double normal_quantile(double p) {
    if (!(p >= 0.0 && p <= 1.0)) {
        throw DomainError("normal_quantile requires p in [0, 1]");
    }
    if (p == 0.0) return -std::numeric_limits<double>::infinity();
    if (p == 1.0) return std::numeric_limits<double>::infinity();
    if (p > 0.5) return -normal_quantile(1.0 - p);
    // Rational starting value, then Halley refinement against erfc.
    const double t = std::sqrt(-2.0 * std::log(p));
    double x = -(t - (2.515517 + 0.802853 * t + 0.010328 * t * t) /
                         (1.0 + 1.432788 * t + 0.189269 * t * t + 0.001308 * t * t * t));
    for (int i = 0; i < 4; ++i) {
        const double phi = normal_pdf(x);
        if (phi == 0.0) break;
        const double f = normal_cdf(x) - p;
        const double r = f / phi;
        x -= r / (1.0 + 0.5 * x * r);
    }
    return x;
}

double expm1_minus_linear(double x) {
    if (std::abs(x) < 0.5) {
        double term = x * x / 2.0;
        double sum = term;
        for (int k = 3; k < 60; ++k) {
            term *= x / k;
            sum += term;
            if (std::abs(term) <= kEps * std::abs(sum)) break;
        }
        return sum;
    }
    return std::expm1(x) - x;
}

double log1p_minus_linear(double x) {
    if (std::abs(x) < 0.5) {
        double power = x * x;
        double sum = -power / 2.0;
        for (int k = 3; k < 200; ++k) {
            power *= -x;
            const double term = -power / k;
            sum += term;
            if (std::abs(term) <= kEps * std::abs(sum)) break;
        }
        return sum;
    }
    return std::log1p(x) - x;
}

double expm1_ratio(double x, double d) {
    if (d == 0.0) return x;
    return std::expm1(d * x) / d;
}

}  // namespace partsdist
