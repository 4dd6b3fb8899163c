#include "partsdist/quadrature.hpp"

#include "partsdist/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <vector>

namespace partsdist {

void QuadratureConfig::validate() const {
    if (!(abs_tol > 0.0) || !(rel_tol > 0.0)) {
        throw DomainError("quadrature tolerances must be strictly positive");
    }
    if (max_subdivisions < 1) {
        throw DomainError("max_subdivisions must be at least 1");
    }
}

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kTiny = std::numeric_limits<double>::min();

// 15-point Kronrod abscissae; odd indices are the 7-point Gauss nodes.
constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Piece {
    double a;
    double b;
    bool at_lower;
    bool at_upper;
    double value;
    double error;
};

// QUADPACK-style error scaling of |K15 - G7|.
double scaled_error(double raw, double resabs, double resasc) {
    double err = raw;
    if (resasc != 0.0 && err != 0.0) {
        err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
    }
    if (resabs > kTiny / (50.0 * kEps)) {
        err = std::max(50.0 * kEps * resabs, err);
    }
    return err;
}

void gauss_kronrod(const ComplementIntegrand& f, double upper_limit, Piece& p) {
    const double center = 0.5 * (p.a + p.b);
    const double half = 0.5 * (p.b - p.a);
    std::array<double, 15> fv{};
    const double fc = f(center, upper_limit - center);
    double resk = fc * kWgk[7];
    double resg = fc * kWg[3];
    double resabs = std::abs(resk);
    for (int j = 0; j < 7; ++j) {
        const double dx = half * kXgk[j];
        const double x1 = center - dx;
        const double x2 = center + dx;
        const double f1 = f(x1, upper_limit - x1);
        const double f2 = f(x2, upper_limit - x2);
        fv[2 * j] = f1;
        fv[2 * j + 1] = f2;
        resk += kWgk[j] * (f1 + f2);
        resabs += kWgk[j] * (std::abs(f1) + std::abs(f2));
        if (j % 2 == 1) {
            resg += kWg[j / 2] * (f1 + f2);
        }
    }
    const double mean = 0.5 * resk;
    double resasc = kWgk[7] * std::abs(fc - mean);
    for (int j = 0; j < 7; ++j) {
        resasc += kWgk[j] * (std::abs(fv[2 * j] - mean) + std::abs(fv[2 * j + 1] - mean));
    }
    const double scale = std::abs(half);
    p.value = resk * half;
    p.error = scaled_error(std::abs((resk - resg) * half), resabs * scale, resasc * scale);
}

// Tanh-sinh rule on one piece. Node positions are carried as distances from the
// nearer end so that x - a (or b - x) never suffers cancellation. A non-finite value
// at a node within 1e-8 of the piece width from an end truncates the rule on that
// side (overflow of an integrable endpoint singularity); elsewhere it propagates.
void double_exponential(const ComplementIntegrand& f, double upper_limit, Piece& p) {
    constexpr double h = 1.0 / 16.0;
    constexpr int kmax = 104;  // t in [-6.5, 6.5]
    const double width = p.b - p.a;
    const double half_pi = 0.5 * std::numbers::pi;
    double fine = 0.0;
    double coarse = 0.0;
    double absolute = 0.0;
    auto add = [&](int k, double w, double fx) {
        const double term = w * fx;
        fine += term;
        absolute += std::abs(term);
        if (k % 2 == 0) coarse += term;
    };
    {
        const double x = p.a + 0.5 * width;
        add(0, 0.5 * width * half_pi, f(x, upper_limit - x));
    }
    for (int side = -1; side <= 1; side += 2) {
        for (int k = 1; k <= kmax; ++k) {
            const double t = k * h;
            const double y = half_pi * std::sinh(t);
            const double e = std::exp(-2.0 * y);
            const double d = width * e / (1.0 + e);
            if (d == 0.0) break;
            const double w = 0.5 * width * half_pi * std::cosh(t) * 4.0 * e / ((1.0 + e) * (1.0 + e));
            double x;
            double to_upper;
            if (side < 0) {
                x = p.a + d;
                if (x == p.a) break;
                to_upper = upper_limit - x;
            } else {
                x = p.b - d;
                to_upper = (upper_limit - p.b) + d;
                if (x == p.b && upper_limit != p.b) break;
            }
            const double fx = f(x, to_upper);
            if (!std::isfinite(fx) && d < 1e-8 * width) break;
            add(k, w, fx);
        }
    }
    fine *= h;
    coarse *= 2.0 * h;
    absolute *= h;
    p.value = fine;
    p.error = std::max(std::abs(fine - coarse), 50.0 * kEps * absolute);
}

void evaluate(const ComplementIntegrand& f, double upper_limit, Piece& p) {
    if (p.at_lower || p.at_upper) {
        double_exponential(f, upper_limit, p);
    } else {
        gauss_kronrod(f, upper_limit, p);
    }
    if (!std::isfinite(p.value) || !std::isfinite(p.error)) {
        std::ostringstream msg;
        msg << "non-finite integrand value on [" << p.a << ", " << p.b << "]";
        throw ConvergenceError(msg.str(), p.a, p.b, std::numeric_limits<double>::infinity());
    }
}

}  // namespace

QuadratureResult integrate_finite_detailed(const ComplementIntegrand& f, double lower, double upper,
                                           const QuadratureConfig& cfg) {
    cfg.validate();
    if (!std::isfinite(lower) || !std::isfinite(upper)) {
        throw DomainError("integrate_finite requires finite limits");
    }
    if (lower == upper) {
        return {};
    }
    if (lower > upper) {
        QuadratureResult r = integrate_finite_detailed(
            [&](double x, double) { return f(x, lower - x); }, upper, lower, cfg);
        r.value = -r.value;
        return r;
    }

    std::vector<Piece> pieces;
    pieces.reserve(static_cast<std::size_t>(cfg.max_subdivisions));
    pieces.push_back({lower, upper, true, true, 0.0, 0.0});
    evaluate(f, upper, pieces.back());

    for (;;) {
        double total = 0.0;
        double error = 0.0;
        for (const auto& p : pieces) {
            total += p.value;
            error += p.error;
        }
        if (error <= std::max(cfg.abs_tol, cfg.rel_tol * std::abs(total))) {
            return {total, error, static_cast<int>(pieces.size())};
        }
        auto worst = std::max_element(pieces.begin(), pieces.end(),
                                      [](const Piece& l, const Piece& r) { return l.error < r.error; });
        const double mid = 0.5 * (worst->a + worst->b);
        const bool exhausted = static_cast<int>(pieces.size()) >= cfg.max_subdivisions;
        if (exhausted || mid <= worst->a || mid >= worst->b) {
            std::ostringstream msg;
            msg << "adaptive quadrature did not converge: estimate " << total << ", error " << error
                << " after " << pieces.size() << " subintervals; worst [" << worst->a << ", "
                << worst->b << "] error " << worst->error;
            throw ConvergenceError(msg.str(), worst->a, worst->b, error);
        }
        Piece left{worst->a, mid, worst->at_lower, false, 0.0, 0.0};
        Piece right{mid, worst->b, false, worst->at_upper, 0.0, 0.0};
        evaluate(f, upper, left);
        evaluate(f, upper, right);
        *worst = left;
        pieces.push_back(right);
    }
}

double integrate_finite(const Integrand& f, double lower, double upper, const QuadratureConfig& cfg) {
    if (lower > upper) {
        return -integrate_finite(f, upper, lower, cfg);
    }
    // Nodes rounded onto the upper end point are dropped; plain integrands may be
    // singular there.
    return integrate_finite_detailed(
               [&](double x, double) { return x >= upper ? 0.0 : f(x); }, lower, upper, cfg)
        .value;
}

double integrate_semi_infinite(const Integrand& f, double lower, const QuadratureConfig& cfg) {
    auto mapped = [&](double s, double one_minus_s) {
        const double x = lower + s / one_minus_s;
        if (!std::isfinite(x)) {
            return 0.0;
        }
        const double fx = f(x);
        return fx == 0.0 ? 0.0 : fx / (one_minus_s * one_minus_s);
    };
    return integrate_finite_detailed(mapped, 0.0, 1.0, cfg).value;
}

double integrate(const Integrand& f, double lower, double upper, const QuadratureConfig& cfg) {
    if (std::isnan(lower) || std::isnan(upper)) {
        throw DomainError("integration limits must not be NaN");
    }
    if (lower > upper) {
        return -integrate(f, upper, lower, cfg);
    }
    const bool lo_inf = std::isinf(lower);
    const bool hi_inf = std::isinf(upper);
    if (!lo_inf && !hi_inf) {
        return integrate_finite(f, lower, upper, cfg);
    }
    if (!lo_inf) {
        return integrate_semi_infinite(f, lower, cfg);
    }
    if (!hi_inf) {
        return integrate_semi_infinite([&](double y) { return f(-y); }, -upper, cfg);
    }
    return integrate_semi_infinite(f, 0.0, cfg) +
           integrate_semi_infinite([&](double y) { return f(-y); }, 0.0, cfg);
}

}  // namespace partsdist
