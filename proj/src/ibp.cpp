#include "partsdist/ibp.hpp"

#include "partsdist/error.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <utility>

namespace partsdist {

TransformedContinuous::TransformedContinuous(DistributionPtr base, ShiftDirection direction, UFunction u,
                                             VFunction v, RealFunction closed, double v_at_upper,
                                             QuadratureConfig cfg)
    : base_(std::move(base)),
      direction_(direction),
      u_(std::move(u)),
      v_(std::move(v)),
      closed_(std::move(closed)),
      v_at_upper_(v_at_upper),
      cfg_(cfg) {
    if (!base_) throw DomainError("transform requires a base distribution");
    cfg_.validate();
    if (direction_ == ShiftDirection::Left) {
        if (!u_.u || !u_.u_prime) throw DomainError("left shift requires u and u'");
        if (u_.u_at_lower < 0.0) throw DomainError("u at the lower limit must be nonnegative");
        if (v_at_upper_ < 0.0) throw DomainError("v at the upper limit must be nonnegative");
        if (v_at_upper_ > 0.0 && !base_->support().bounded_above()) {
            throw DomainError("nonzero v at the upper limit needs a finite upper limit");
        }
    } else {
        if (!v_.v || !v_.v_prime) throw DomainError("right shift requires v and v'");
    }
}

void TransformedContinuous::compute_normalizer() {
    const Support s = base_->support();
    ulvl_ = 0.0;
    uhvh_ = 0.0;
    if (direction_ == ShiftDirection::Left) {
        if (u_.u_at_lower > 0.0) {
            ulvl_ = u_.u_at_lower * v(s.lower);
        }
        if (v_at_upper_ > 0.0) {
            uhvh_ = u_.u(s.upper) * v_at_upper_;
        }
    }
    normalizer_ = 1.0 + uhvh_ - ulvl_;
    if (!(normalizer_ > 0.0) || !std::isfinite(normalizer_)) {
        throw DomainError("transform normalizer 1 + u(xh)v(xh) - u(xl)v(xl) must be positive");
    }
}

TransformedContinuous TransformedContinuous::left(DistributionPtr base, UFunction u, RealFunction v_closed,
                                                  double v_at_upper, QuadratureConfig cfg) {
    TransformedContinuous t(std::move(base), ShiftDirection::Left, std::move(u), {}, std::move(v_closed),
                            v_at_upper, cfg);
    t.compute_normalizer();
    return t;
}

TransformedContinuous TransformedContinuous::right(DistributionPtr base_left, VFunction v, RealFunction u_closed,
                                                   QuadratureConfig cfg) {
    TransformedContinuous t(std::move(base_left), ShiftDirection::Right, {}, std::move(v), std::move(u_closed),
                            0.0, cfg);
    t.compute_normalizer();
    return t;
}

Support TransformedContinuous::support() const { return base_->support(); }

double TransformedContinuous::u(double x) const {
    const Support s = base_->support();
    if (direction_ == ShiftDirection::Left) {
        return u_.u(x);
    }
    if (x <= s.lower) return 0.0;
    if (closed_) return closed_(x);
    return integrate([this](double y) { return base_->pdf(y) / v_.v(y); }, s.lower, std::min(x, s.upper), cfg_);
}

double TransformedContinuous::u_prime(double x) const {
    if (direction_ == ShiftDirection::Left) {
        return u_.u_prime(x);
    }
    return base_->pdf(x) / v_.v(x);
}

double TransformedContinuous::v(double x) const {
    if (direction_ == ShiftDirection::Right) {
        return v_.v(x);
    }
    const Support s = base_->support();
    if (x >= s.upper) return v_at_upper_;
    if (closed_) return closed_(x);
    return v_from_u(*base_, u_, x, cfg_) + v_at_upper_;
}

double TransformedContinuous::boundary_term(double x) const {
    const Support s = base_->support();
    if (direction_ == ShiftDirection::Left) {
        if (x >= s.upper) return uhvh_;
        const double ux = u_.u(x);
        if (ux == 0.0) return 0.0;
        if (closed_) {
            const double uv = ux * closed_(x);
            if (std::isfinite(uv)) return uv;
        }
        // u(x) v(x) = int_x^xh f(y) u(x)/u(y) dy + u(x) v(xh); the ratio is at most 1.
        const double from = std::max(x, s.lower);
        const double tail = integrate(
            [&](double y) {
                const double f = base_->pdf(y);
                if (f == 0.0) return 0.0;
                const double ratio = ux / u_.u(y);
                return f * (ratio <= 1.0 ? ratio : 1.0);
            },
            from, s.upper, cfg_);
        return v_at_upper_ == 0.0 ? tail : tail + ux * v_at_upper_;
    }
    if (x <= s.lower || x >= s.upper) return 0.0;
    const double vx = v_.v(x);
    if (vx == 0.0) return 0.0;
    if (closed_) {
        const double ux = closed_(x);
        if (ux == 0.0) return 0.0;
        const double uv = ux * vx;
        if (std::isfinite(uv)) return uv;
    }
    // u(x) v(x) = int_xl^x g(y) v(x)/v(y) dy.
    return integrate(
        [&](double y) {
            const double g = base_->pdf(y);
            if (g == 0.0) return 0.0;
            const double ratio = vx / v_.v(y);  // NaN only from inf/inf
            return g * (ratio <= 1.0 ? ratio : 1.0);
        },
        s.lower, x, cfg_);
}

double TransformedContinuous::generic_pdf(double x) const {
    const Support s = base_->support();
    if (x < s.lower || x > s.upper) return 0.0;
    if (direction_ == ShiftDirection::Left) {
        const double up = u_prime(x);
        if (up == 0.0) return 0.0;
        if (!closed_ && x < s.upper) {
            const double ux = u_.u(x);
            // u' v = (u'/u) (u v); the product form overflows where u is tiny.
            if (std::isnormal(ux)) {
                const double uv = boundary_term(x);
                const double log_slope = up / ux;
                return (std::isfinite(log_slope) ? log_slope * uv : up * (uv / ux)) / normalizer_;
            }
            // u below the normal range: the region is too thin to carry mass at double precision.
            if (ux < std::numeric_limits<double>::min() && std::isfinite(up)) return 0.0;
            if (std::isinf(ux) && base_->survival(x) == 0.0) return 0.0;
        }
        return up * v(x) / normalizer_;
    }
    const double vp = v_.v_prime(x);
    if (vp == 0.0) return 0.0;
    return -u(x) * vp;
}

double TransformedContinuous::generic_cdf(double x) const {
    const Support s = base_->support();
    if (x <= s.lower) return 0.0;
    if (x >= s.upper) return 1.0;
    if (direction_ == ShiftDirection::Left) {
        return (base_->cdf(x) + boundary_term(x) - ulvl_) / normalizer_;
    }
    return base_->cdf(x) - boundary_term(x);
}

double TransformedContinuous::generic_survival(double x) const {
    const Support s = base_->support();
    if (x <= s.lower) return 1.0;
    if (x >= s.upper) return 0.0;
    if (direction_ == ShiftDirection::Left) {
        return (base_->survival(x) + uhvh_ - boundary_term(x)) / normalizer_;
    }
    return base_->survival(x) + boundary_term(x);
}

double TransformedContinuous::mean_shift() const {
    const Support s = base_->support();
    const double integral_uv =
        integrate([this](double x) { return boundary_term(x); }, s.lower, s.upper, cfg_);
    if (!std::isfinite(integral_uv)) {
        throw DivergenceError("integral of u v does not converge");
    }
    if (direction_ == ShiftDirection::Right) {
        return base_->mean() + integral_uv;
    }
    double m = base_->mean() - integral_uv;
    if (ulvl_ != 0.0) m -= s.lower * ulvl_;
    if (uhvh_ != 0.0) m += s.upper * uhvh_;
    return m / normalizer_;
}

bool TransformedContinuous::can_sample_by_smearing() const noexcept {
    if (direction_ == ShiftDirection::Left) {
        return static_cast<bool>(u_.u_inverse) && ulvl_ == 0.0 && uhvh_ == 0.0;
    }
    return static_cast<bool>(v_.v_inverse);
}

double TransformedContinuous::sample_by_smearing(RandomStream& rng) const {
    if (!can_sample_by_smearing()) {
        throw UnsupportedError("smearing sampler needs an invertible u (or v) and vanishing boundary terms");
    }
    const double x = base_->sample(rng);
    const double w = rng.uniform();
    if (direction_ == ShiftDirection::Left) {
        return u_.u_inverse(u_.u(x) * w);
    }
    return v_.v_inverse(v_.v(x) * w);
}

double TransformedContinuous::sample(RandomStream& rng) const {
    if (can_sample_by_smearing()) {
        return sample_by_smearing(rng);
    }
    return numeric_quantile(rng.uniform());
}

double v_from_u(const ContinuousDistribution& base, const UFunction& u, double x, const QuadratureConfig& cfg) {
    const Support s = base.support();
    if (x >= s.upper) return 0.0;
    const double from = std::max(x, s.lower);
    return integrate(
        [&](double y) {
            const double f = base.pdf(y);
            if (f == 0.0) return 0.0;
            // Cap where u underflows; such points lie within ~1e-300 of u = 0.
            return std::min(f / u.u(y), 1e300);
        },
        from, s.upper, cfg);
}

double delta_smear(double x0, const UFunction& u, double x) {
    if (x >= x0) return 1.0;
    return (u.u(x) - u.u_at_lower) / (u.u(x0) - u.u_at_lower);
}

namespace {

constexpr int kGridPoints = 24;

std::vector<double> quantile_grid(const ContinuousDistribution& d) {
    std::vector<double> grid;
    for (int k = 0; k < kGridPoints; ++k) {
        grid.push_back(d.quantile((k + 0.5) / kGridPoints));
    }
    return grid;
}

}  // namespace

TransformedContinuous l_shift(DistributionPtr base, UFunction u, RealFunction v_closed, double v_at_upper,
                              QuadratureConfig cfg) {
    if (!base) throw DomainError("l_shift requires a base distribution");
    double prev = u.u_at_lower;
    for (double x : quantile_grid(*base)) {
        const double ux = u.u(x);
        if (!(ux > 0.0) || u.u_prime(x) < 0.0 || ux < prev) {
            std::ostringstream msg;
            msg << "u must be positive and nondecreasing; violated at x = " << x;
            throw DomainError(msg.str());
        }
        if (u.u_inverse) {
            const double back = u.u_inverse(ux);
            if (std::abs(back - x) > 1e-9 * std::max(1.0, std::abs(x))) {
                std::ostringstream msg;
                msg << "u_inverse(u(x)) != x at x = " << x;
                throw DomainError(msg.str());
            }
        }
        prev = ux;
    }
    return TransformedContinuous::left(std::move(base), std::move(u), std::move(v_closed), v_at_upper, cfg);
}

TransformedContinuous r_shift(DistributionPtr base_left, VFunction v, RealFunction u_closed, QuadratureConfig cfg) {
    if (!base_left) throw DomainError("r_shift requires a base distribution");
    double prev = std::numeric_limits<double>::infinity();
    for (double x : quantile_grid(*base_left)) {
        const double vx = v.v(x);
        if (!(vx > 0.0) || v.v_prime(x) > 0.0 || vx > prev) {
            std::ostringstream msg;
            msg << "v must be positive and nonincreasing; violated at x = " << x;
            throw DomainError(msg.str());
        }
        prev = vx;
    }
    TransformedContinuous t =
        TransformedContinuous::right(std::move(base_left), std::move(v), std::move(u_closed), cfg);

    // u(x) v(x) must vanish at the upper end for -u v' to integrate to one.
    const Support s = t.support();
    bool vanished = false;
    if (s.bounded_above()) {
        const double x = s.upper - 1e-9 * (s.upper - (s.bounded_below() ? s.lower : s.upper - 1.0));
        vanished = std::abs(t.boundary_term(x)) < 1e-6;
    } else {
        double x = t.base().quantile(1.0 - 1e-12);
        const double step = std::max(1.0, std::abs(x));
        for (int k = 0; k < 40 && !vanished; ++k) {
            const double bt = t.boundary_term(x);
            if (!std::isfinite(bt)) break;
            vanished = std::abs(bt) < 1e-10;
            x += step * (1 << std::min(k, 20));
        }
    }
    if (!vanished) {
        throw DivergenceError("u(x) v(x) does not vanish at the upper limit; -u v' is not a pdf");
    }
    return t;
}

}  // namespace partsdist
