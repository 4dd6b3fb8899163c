#include "family_grid.hpp"
#include "partsdist/error.hpp"
#include "partsdist/families.hpp"
#include "partsdist/random.hpp"
#include "partsdist/specialfn.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <cmath>
#include <memory>
#include <vector>

using namespace partsdist;

namespace {

const double kInf = std::numeric_limits<double>::infinity();

double total_mass(const ContinuousDistribution& d) {
    const Support s = d.support();
    return integrate([&](double x) { return d.pdf(x); }, s.lower, s.upper);
}

double quad_moment(const ContinuousDistribution& d, int n) {
    const Support s = d.support();
    return integrate(
        [&](double x) {
            const double f = d.pdf(x);
            return f == 0.0 ? 0.0 : std::pow(x, n) * f;
        },
        s.lower, s.upper);
}

}  // namespace

TEST_CASE("F^lambda examples") {
    auto unif = std::make_shared<Uniform>(0.0, 1.0);
    const FLambdaFamily two(unif, 2.0);
    CHECK(two.pdf(0.5) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(two.cdf(0.5) == doctest::Approx(0.75).epsilon(1e-14));

    const FLambdaFamily one(unif, 1.0);
    const double x = std::exp(-1.0);
    CHECK(one.pdf(x) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(one.cdf(x) == doctest::Approx(2.0 * x).epsilon(1e-14));
    CHECK(std::isinf(one.pdf(0.0)));

    // Near lambda = 1 the closed form stays continuous.
    for (double d : {1e-7, 1e-10, -1e-9}) {
        const FLambdaFamily near(unif, 1.0 + d);
        for (double y : {0.01, 0.3, 0.9}) {
            CHECK(near.pdf(y) == doctest::Approx(one.pdf(y)).epsilon(1e-6));
            CHECK(near.cdf(y) == doctest::Approx(one.cdf(y)).epsilon(1e-6));
        }
    }

    auto exp1 = std::make_shared<Exponential>(1.0);
    const FLambdaFamily big(exp1, 1e6);
    for (double y : {0.01, 0.5, 2.0, 10.0}) {
        CHECK(std::abs(big.cdf(y) - exp1->cdf(y)) < 1e-5);
    }

    // Direct (F^lambda - lambda F)/(1 - lambda) where it is well conditioned.
    const FLambdaFamily half(exp1, 0.5);
    for (double y : {0.2, 1.0, 3.0}) {
        const double f = exp1->cdf(y);
        CHECK(half.cdf(y) == doctest::Approx((std::sqrt(f) - 0.5 * f) / 0.5).epsilon(1e-13));
        CHECK(half.pdf(y) == doctest::Approx(0.5 * (1.0 / std::sqrt(f) - 1.0) / 0.5 * exp1->pdf(y)).epsilon(1e-13));
    }
}

TEST_CASE("F^lambda tail ratio") {
    auto unif = std::make_shared<Uniform>(0.0, 1.0);
    CHECK(FLambdaFamily(unif, 2.0).tail_ratio(1.0 - 1e-4) == doctest::Approx(1.0).epsilon(1e-3));
    auto exp1 = std::make_shared<Exponential>(1.0);
    const double x5 = -std::log(1e-5);
    CHECK(std::abs(FLambdaFamily(exp1, 3.0).tail_ratio(x5) - 1.5) < 1e-3);
    CHECK(std::abs(FLambdaFamily(exp1, 1.0).tail_ratio(x5) - 0.5) < 1e-3);
    // The series agrees with 1 - G where that is still accurate.
    const FLambdaFamily f(exp1, 2.5);
    for (double y : {0.7, 1.5, 3.0}) {
        const double fv = exp1->cdf(y);
        const double direct = 1.0 - (std::pow(fv, 2.5) - 2.5 * fv) / (1.0 - 2.5);
        CHECK(f.survival(y) == doctest::Approx(direct).epsilon(1e-11));
    }
    CHECK(f.log_survival(800.0) == doctest::Approx(std::log(1.25) - 1600.0).epsilon(1e-12));
}

TEST_CASE("F^lambda hazard near the lower limit") {
    auto exp1 = std::make_shared<Exponential>(1.0);
    // The relative gap is about F^(lambda-1), so lambda near 1 needs a smaller F.
    const double x = -std::log1p(-1e-6);  // F = 1e-6
    for (double lam : {2.0, 3.0, 5.0}) {
        const FLambdaFamily f(exp1, lam);
        CHECK(std::abs(f.hazard(x) / exp1->hazard(x) - lam / (lam - 1.0)) < 1e-3);
    }
    const FLambdaFamily near_one(exp1, 1.5);
    const double x10 = -std::log1p(-1e-10);
    CHECK(std::abs(near_one.hazard(x10) / exp1->hazard(x10) - 3.0) < 1e-3);
}

TEST_CASE("exp(lambda F) examples") {
    auto exp1 = std::make_shared<Exponential>(1.0);
    const ExpLambdaFFamily small(exp1, 1e-6);
    double worst = 0.0;
    for (double x = 0.01; x < 20.0; x += 0.1) {
        const double s = exp1->survival(x);
        worst = std::max(worst, std::abs(small.survival(x) - s * s));
    }
    CHECK(worst < 1e-5);

    double previous = kInf;
    for (double lam : {5.0, 10.0, 20.0, 50.0}) {
        const ExpLambdaFFamily f(exp1, lam);
        double gap = 0.0;
        for (double x = 0.01; x < 20.0; x += 0.05) gap = std::max(gap, std::abs(f.cdf(x) - exp1->cdf(x)));
        CHECK(gap < previous);
        previous = gap;
    }
    CHECK(previous < 0.05);

    for (double lam : {0.01, 1.0, 4.0}) {
        const ExpLambdaFFamily f(exp1, lam);
        const double x = -std::log1p(-1e-6);
        const double ratio = f.cdf(x) / exp1->cdf(x);
        const double expected = lam * (1.0 - std::exp(-lam)) / (lam - 1.0 + std::exp(-lam));
        CHECK(std::abs(ratio - expected) < 1e-4);
        CHECK(ratio <= 2.0);
        CHECK(f.left_tail_factor() == doctest::Approx(expected).epsilon(1e-12));
    }

    // cdf formula as printed, and pdf = dG/dx.
    const ExpLambdaFFamily f(exp1, 2.0);
    for (double x : {0.1, 0.8, 2.5}) {
        const double fv = exp1->cdf(x);
        const double g = (2.0 * fv - std::exp(-2.0 * (1.0 - fv)) + std::exp(-2.0)) / (2.0 - 1.0 + std::exp(-2.0));
        CHECK(f.cdf(x) == doctest::Approx(g).epsilon(1e-13));
        CHECK(f.pdf(x) == doctest::Approx(testutil::derivative([&](double y) { return f.cdf(y); }, x, 1e-3))
                              .epsilon(1e-9));
        CHECK(f.quantile(f.cdf(x)) == doctest::Approx(x).epsilon(1e-10));
    }
    CHECK(f.u_lower_v_lower() == doctest::Approx((1.0 - std::exp(-2.0)) / 2.0).epsilon(1e-14));
}

TEST_CASE("phase-type exponential") {
    const PhaseTypeExponential p(2.0);
    CHECK(p.mean() == 1.5);
    CHECK(quad_moment(p, 1) == doctest::Approx(1.5).epsilon(1e-10));
    CHECK(p.survival(0.0) == 1.0);
    CHECK(std::abs(p.hazard(50.0) - 1.0) < 1e-6);
    for (double lam : {0.3, 2.0}) {
        const PhaseTypeExponential q(lam);
        CHECK(std::abs(q.hazard(60.0) - std::min(1.0, lam)) < 1e-6);
        // initial slope lambda
        CHECK(q.hazard(1e-4) / 1e-4 == doctest::Approx(lam).epsilon(1e-3));
        for (double x : {0.01, 0.5, 3.0}) {
            const double expected = (std::exp(-lam * x) - lam * std::exp(-x)) / (1.0 - lam);
            CHECK(q.survival(x) == doctest::Approx(expected).epsilon(1e-12));
            CHECK(q.cdf(x) == doctest::Approx(1.0 - expected).epsilon(1e-10));
        }
        CHECK(q.moment(2) == doctest::Approx(quad_moment(q, 2)).epsilon(1e-9));
    }
    const PhaseTypeExponential one(1.0);
    CHECK(one.survival(2.0) == doctest::Approx(3.0 * std::exp(-2.0)).epsilon(1e-14));
    const PhaseTypeExponential near(1.0 + 1e-5);
    CHECK(near.cdf(0.01) == doctest::Approx(one.cdf(0.01)).epsilon(1e-4));
}

TEST_CASE("exponential-gamma mixture") {
    const ExpGammaMixture huge(1e8);
    for (double t : {0.1, 1.0, 5.0}) CHECK(huge.pdf(t) == doctest::Approx(std::exp(-t)).epsilon(1e-7));
    for (double lam : {0.5, 1.0, 3.0}) {
        const ExpGammaMixture m(lam);
        CHECK(total_mass(m) == doctest::Approx(1.0).epsilon(1e-10));
        CHECK(quad_moment(m, 1) == doctest::Approx((2.0 + lam) / (1.0 + lam)).epsilon(1e-10));
        CHECK(quad_moment(m, 3) == doctest::Approx(m.moment(3)).epsilon(1e-10));
        // agrees with the generic right shift
        for (double t : {0.3, 2.0}) CHECK(m.generic_pdf(t) == doctest::Approx(m.pdf(t)).epsilon(1e-9));
    }
    CHECK(ExpGammaMixture(1.0).mean() == 1.5);
}

TEST_CASE("Stacy L-shift") {
    const StacyLShift s(1.0, 1.0, 1.0, 0.5);
    const ModifiedExponential m(1.0);
    for (double t : {1e-4, 0.1, 1.0, 4.0, 30.0}) {
        CHECK(s.pdf(t) == doctest::Approx(m.pdf(t)).epsilon(1e-11));
        CHECK(s.survival(t) == doctest::Approx(m.survival(t)).epsilon(1e-10));
    }
    CHECK(s.xi() == 2.0);
    CHECK(s.mean_ratio() == doctest::Approx(1.0 / 3.0));

    const double grid[][3] = {{1, 2, 0.5}, {2, 1, 1.5}, {1, 1, 2}};
    for (const auto& p : grid) {
        const StacyLShift g(1.0, p[0], p[1], p[2]);
        CAPTURE(p[2]);
        CHECK(std::abs(total_mass(g) - 1.0) < 1e-7);
        CHECK(g.mean_ratio() * quad_moment(g.base(), 1) == doctest::Approx(quad_moment(g, 1)).epsilon(1e-6));
        for (double t : {0.05, 0.5, 1.0, 2.0, 5.0}) {
            CHECK(g.survival(t) <= g.base().survival(t));
            // generic quadrature route for v
            CHECK(g.pdf(t) == doctest::Approx(g.generic_pdf(t)).epsilon(1e-8));
        }
    }
    // xi decreases to zero as lambda grows.
    CHECK(StacyLShift(1.0, 1.0, 1.0, 1e6).xi() < 1e-5);
    CHECK_THROWS_AS(StacyLShift(1.0, 0.5, 1.0, 0.4), DomainError);

    // Deep tail: Gbar from the difference integral against the pdf integrated out.
    const StacyLShift w(1.0, 1.0, 1.5, 0.5);
    for (double t : {8.0, 20.0}) {
        const double tail = integrate([&](double y) { return w.pdf(y); }, t, kInf);
        CHECK(w.survival(t) == doctest::Approx(tail).epsilon(1e-8));
        CHECK(w.log_survival(t) == doctest::Approx(std::log(tail)).epsilon(1e-10));
    }
}

TEST_CASE("modified exponential bundle") {
    for (double alpha : {1.0, 2.5}) {
        const ModifiedExponential m(alpha);
        for (int n = 1; n <= 4; ++n) {
            const double expected = std::tgamma(n + 1.0) / ((1.0 + 2.0 * n) * std::pow(alpha, n));
            CHECK(m.moment(n) == doctest::Approx(expected).epsilon(1e-14));
            CHECK(quad_moment(m, n) == doctest::Approx(expected).epsilon(1e-8));
        }
    }
    const ModifiedExponential m(1.0);
    CHECK(m.moment(1) == doctest::Approx(1.0 / 3.0));
    CHECK(m.moment(2) == doctest::Approx(2.0 / 5.0));
    const double mu = m.moment(1), e2 = m.moment(2), e3 = m.moment(3), e4 = m.moment(4);
    const double var = e2 - mu * mu;
    const double m3 = e3 - 3 * mu * e2 + 2 * mu * mu * mu;
    const double m4 = e4 - 4 * mu * e3 + 6 * mu * mu * e2 - 3 * mu * mu * mu * mu;
    CHECK(std::abs(std::sqrt(var) / mu - 1.61245) < 1e-4);
    CHECK(std::abs(m3 / std::pow(var, 1.5) - 3.42118) < 1e-3);
    // m4 / var^2 = 21 + 12/1183
    CHECK(m4 / (var * var) - 3.0 == doctest::Approx(18.0 + 12.0 / 1183.0).epsilon(1e-12));

    // Hazard falls from infinity towards alpha; the approach is like alpha (1 + 1/(alpha t)).
    double prev = kInf;
    for (double t = 0.01; t < 60.0; t *= 1.3) {
        const double h = m.hazard(t);
        CHECK(h < prev);
        prev = h;
    }
    CHECK(std::abs(m.hazard(50.0) / (1.0 + 1.0 / 50.0) - 1.0) < 1e-3);
    const ModifiedExponential m3x(3.0);
    CHECK(std::abs(m3x.hazard(1e4 / 3.0) - 3.0) < 1e-3);
}

TEST_CASE("beta L-shift") {
    const BetaLShift b(1.0, 1.0, 1.0, 0.0);
    for (double x : {0.05, 0.3, 0.8}) CHECK(b.pdf(x) == doctest::Approx(-std::log(x)).epsilon(1e-10));
    CHECK(b.mean() == doctest::Approx(0.25).epsilon(1e-14));
    CHECK(quad_moment(b, 1) == doctest::Approx(0.25).epsilon(1e-10));

    for (double c : {0.5, 2.0}) {
        const BetaLShift bc(2.0, 3.0, 0.7, c);
        const double k = 2.0 + 0.7 - 1.0;
        CHECK(bc.pdf(1.0) == doctest::Approx(k * c / (1.0 + c)).epsilon(1e-12));
        CHECK(bc.normalizer() == doctest::Approx(1.0 + c));
        CHECK(std::abs(total_mass(bc) - 1.0) < 1e-8);
        for (int n = 1; n <= 3; ++n) CHECK(bc.moment(n) == doctest::Approx(quad_moment(bc, n)).epsilon(1e-8));
    }
    // lambda > 1 takes the first argument of the incomplete beta below zero.
    const BetaLShift neg(1.5, 2.0, 1.8, 0.3);
    CHECK(std::abs(total_mass(neg) - 1.0) < 1e-8);
    CHECK(neg.moment(2) == doctest::Approx(quad_moment(neg, 2)).epsilon(1e-8));

    const BetaLShift mirrored(2.0, 3.0, 0.7, 0.5, true);
    const BetaLShift plain(2.0, 3.0, 0.7, 0.5, false);
    for (double x : {0.1, 0.4, 0.9}) {
        CHECK(mirrored.pdf(x) == doctest::Approx(plain.pdf(1.0 - x)));
        CHECK(mirrored.cdf(x) == doctest::Approx(plain.survival(1.0 - x)));
    }
    CHECK(mirrored.mean() == doctest::Approx(1.0 - plain.mean()).epsilon(1e-13));
    CHECK(mirrored.moment(3) == doctest::Approx(quad_moment(mirrored, 3)).epsilon(1e-8));

    RandomStream rng(31);
    const BetaLShift mc(2.0, 2.0, 1.0, 0.5);
    const int n = 100000;
    double sum = 0.0, sumsq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double y = mc.sample(rng);
        sum += y;
        sumsq += y * y;
    }
    const double mean = sum / n;
    const double se = std::sqrt((sumsq / n - mean * mean) / n);
    CHECK(std::abs(mean - mc.mean()) < 3.0 * se);
    CHECK_THROWS_AS(BetaLShift(0.5, 1.0, 0.4, 0.0), DomainError);
    CHECK_THROWS_AS(BetaLShift(2.0, 1.0, 0.5, -0.1), DomainError);
}

TEST_CASE("skew normal") {
    const SkewNormalIBP big(1e6);
    for (double x : {-2.0, 0.0, 1.5}) CHECK(std::abs(big.cdf(x) - normal_cdf(x)) < 1e-5);
    const SkewNormalIBP s(2.0);
    CHECK(s.cdf(-40.0) == 0.0);
    CHECK(s.cdf(-1e300) == 0.0);
    CHECK(s.cdf(40.0) == 1.0);
    // lambda = 2 is the minimum of two standard normals: G = 1 - Phibar^2, mean -1/sqrt(pi).
    for (double x : {-1.0, 0.3, 2.0}) {
        const double pb = normal_cdf(-x);
        CHECK(s.cdf(x) == doctest::Approx(1.0 - pb * pb).epsilon(1e-13));
    }
    CHECK(quad_moment(s, 1) == doctest::Approx(-1.0 / std::sqrt(M_PI)).epsilon(1e-9));
    const SkewNormalIBP shifted(2.0, 1.0, 3.0);
    CHECK(quad_moment(shifted, 1) == doctest::Approx(1.0 - 3.0 / std::sqrt(M_PI)).epsilon(1e-9));
    const SkewNormalIBP one(1.0);
    CHECK(one.cdf(0.0) == doctest::Approx(0.5 * (1.0 + std::log(2.0))).epsilon(1e-14));
}

TEST_CASE("property: every family normalizes, satisfies the cdf identity and dominance") {
    for (const auto& fc : testutil::family_grid()) {
        CAPTURE(fc.name);
        const auto& t = *fc.dist;
        CHECK(std::abs(total_mass(t) - 1.0) < 1e-7);
        double worst_identity = 0.0;
        double worst_gap = kInf;
        for (int k = 1; k <= 100; ++k) {
            const double x = t.base().quantile(k / 101.0);
            worst_identity = std::max(worst_identity, std::abs(testutil::identity_residual(t, x)));
            worst_gap = std::min(worst_gap, testutil::dominance_gap(t, x));
        }
        CHECK(worst_identity < 1e-9);
        if (fc.dominates) CHECK(worst_gap >= -1e-12);
        for (double q : {0.15, 0.5, 0.85}) {
            const double x = t.base().quantile(q);
            const double h = 1e-3 * std::max(0.05, std::abs(x));
            const double num = testutil::derivative([&](double y) { return t.cdf(y); }, x, h);
            CHECK(testutil::rel_diff(num, t.pdf(x)) < 1e-5);
            CHECK(t.cdf(x) + t.survival(x) == doctest::Approx(1.0).epsilon(1e-12));
        }
    }
}

TEST_CASE("property: sampler laws") {
    const auto check = [](const ContinuousDistribution& d, std::uint64_t seed) {
        RandomStream rng(seed);
        std::vector<double> xs(100000);
        for (auto& x : xs) x = d.sample(rng);
        CHECK(testutil::ks_one_sample(xs, [&](double x) { return d.cdf(x); }) < testutil::ks_critical_1pct(xs.size()));
    };
    check(ModifiedExponential(1.7), 1);
    check(BetaLShift(2.0, 2.0, 1.0, 0.5), 2);
    check(BetaLShift(1.5, 2.5, 0.7, 2.0, true), 3);
    check(FLambdaFamily(std::make_shared<Uniform>(0.0, 1.0), 2.0), 4);
    check(FLambdaFamily(std::make_shared<Weibull>(1.0, 2.0), 0.5), 5);
    check(StacyLShift(0.7, 1.5, 1.2, 0.3), 6);
    check(PhaseTypeExponential(0.4), 7);
    check(ExpGammaMixture(2.0), 8);
    check(ExpLambdaFFamily(std::make_shared<Exponential>(1.0), 3.0), 9);
}
