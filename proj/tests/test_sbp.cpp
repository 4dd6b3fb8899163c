#include "partsdist/error.hpp"
#include "partsdist/random.hpp"
#include "partsdist/sbp.hpp"

#include <doctest.h>

#include <cmath>
#include <memory>
#include <vector>

using namespace partsdist;

namespace {

std::shared_ptr<const DiscreteParent> share(DiscreteParent p) {
    return std::make_shared<const DiscreteParent>(std::move(p));
}

// Term-by-term q_i = (sum_(j>=i) p_j/u_j)(u_i - u_(i-1)) / (1 - u(-1) v_0) in long
// double, with u supplied as plain values (index 0 holds u(-1)).
std::vector<long double> brute_q(const std::vector<double>& p, const std::vector<long double>& u) {
    const std::size_t n = p.size();
    std::vector<long double> v(n + 1, 0.0L);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) v[i] += p[j] / u[j + 1];
    const long double norm = 1.0L - u[0] * v[0];
    std::vector<long double> q(n);
    for (std::size_t i = 0; i < n; ++i) q[i] = v[i] * (u[i + 1] - u[i]) / norm;
    return q;
}

std::vector<long double> geometric_values(double r, std::size_t n) {
    std::vector<long double> u(n + 1);
    for (std::size_t i = 0; i <= n; ++i) u[i] = std::pow(static_cast<long double>(r), static_cast<long double>(i) - 1.0L);
    return u;
}

double total(const std::vector<double>& q) {
    long double s = 0.0L;
    for (double x : q) s += x;
    return static_cast<double>(s);
}

std::vector<std::shared_ptr<const DiscreteParent>> parents() {
    return {share(DiscreteParent::poisson(2.1)), share(DiscreteParent::poisson(0.3)),
            share(DiscreteParent::poisson(12.0)), share(DiscreteParent::binomial(10, 0.35)),
            share(DiscreteParent::negative_binomial(3.0, 0.5)), share(DiscreteParent::negative_binomial(1.2, 2.0))};
}

std::vector<USequence> u_grid() {
    return {USequence::geometric(1.5), USequence::geometric(5.0),    USequence::power(0.5),
            USequence::power(1.0),     USequence::power(3.0),        USequence::geometric_minus(2.0),
            USequence::product(2),     USequence::from_values({0.5, 1.0, 1.5, 4.0, 4.0, 9.0})};
}

}  // namespace

TEST_CASE("parents") {
    const auto pois = DiscreteParent::poisson(2.1);
    CHECK_FALSE(pois.finite_support());
    CHECK(total(pois.probabilities()) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(pois.mean() == doctest::Approx(2.1).epsilon(1e-11));
    CHECK(pois.variance() == doctest::Approx(2.1).epsilon(1e-10));
    CHECK(pois.pgf(2.0 / 3.0) == doctest::Approx(0.4965853037914095).epsilon(1e-14));

    const auto nb = DiscreteParent::negative_binomial(3.0, 0.5);
    CHECK(nb.mean() == doctest::Approx(3.0).epsilon(1e-10));
    CHECK(nb.variance() == doctest::Approx(3.0 * (1.0 + 1.5)).epsilon(1e-9));
    const auto bin = DiscreteParent::binomial(2, 0.5);
    CHECK(bin.pgf(0.0) == doctest::Approx(0.25));
    CHECK(bin.pmf(1) == doctest::Approx(0.5));

    // Closed and summed deficits agree.
    for (const auto& p : parents()) {
        const auto table = DiscreteParent::from_pmf(p->probabilities());
        for (double d : {1e-9, 1e-4, 0.1, 0.5, 0.9}) {
            CHECK(p->pgf_deficit(d) == doctest::Approx(table.pgf_deficit(d)).epsilon(1e-10));
            CHECK(p->pgf_deficit2(d) == doctest::Approx(table.pgf_deficit2(d)).epsilon(1e-8));
            CHECK(p->pgf(1.0 - d) == doctest::Approx(table.pgf(1.0 - d)).epsilon(1e-11));
        }
    }
    CHECK_THROWS_AS(DiscreteParent::from_pmf({0.5, 0.4}), DomainError);
    CHECK_THROWS_AS(DiscreteParent::from_pmf({1.2, -0.2}), DomainError);
}

TEST_CASE("v sequence") {
    const auto point = DiscreteParent::point_mass(0);
    const auto v = v_sequence(point, USequence::power(2.0));
    REQUIRE(v.size() == 2);
    CHECK(v[0] == 1.0);
    CHECK(v[1] == 0.0);

    const auto pois = DiscreteParent::poisson(2.1);
    const auto vg = v_sequence(pois, USequence::geometric(1.5));
    CHECK(vg[0] == doctest::Approx(0.4965853037914095).epsilon(1e-11));
    for (std::size_t i = 1; i < vg.size(); ++i) CHECK(vg[i] <= vg[i - 1]);

    const auto ones = v_sequence(pois, USequence::from_values({1.0, 1.0}));
    for (long i = 0; i <= pois.max_index(); ++i)
        CHECK(ones[i] == doctest::Approx(1.0 - pois.cdf(i - 1)).epsilon(1e-12));
}

TEST_CASE("descendant pmf examples") {
    auto pois = share(DiscreteParent::poisson(2.1));
    const DescendantPmf g(pois, USequence::geometric(1.5));
    CHECK(g.pmf(0) == doctest::Approx(0.2474476931959242).epsilon(1e-11));
    CHECK(g.mean() == doctest::Approx(1.6341756978147299).epsilon(1e-10));
    CHECK(g.direct_moment(1) == doctest::Approx(1.6341756978147299).epsilon(1e-10));
    // u_(-1) v_0 = H_0(1/r)/r.
    CHECK(g.normalizer() == doctest::Approx(1.0 - 0.4965853037914095 / 1.5).epsilon(1e-13));

    const auto brute = brute_q(pois->probabilities(), geometric_values(1.5, pois->probabilities().size()));
    for (std::size_t i = 0; i < brute.size(); ++i)
        CHECK(std::fabs(g.pmf(static_cast<long>(i)) - static_cast<double>(brute[i])) < 1e-15);

    const DescendantPmf lin(pois, USequence::power(1.0));
    CHECK(lin.pmf(0) > pois->pmf(0));

    // Equal increments smear a point mass at k uniformly over 0..k.
    const DescendantPmf smear(share(DiscreteParent::point_mass(4)), USequence::power(1.0));
    for (long i = 0; i <= 4; ++i) CHECK(smear.pmf(i) == doctest::Approx(0.2).epsilon(1e-14));
    const DescendantPmf smear_plus(share(DiscreteParent::point_mass(4)), USequence::from_values({2.0, 3.0, 4.0, 5.0, 6.0, 7.0}));
    for (long i = 0; i <= 4; ++i) CHECK(smear_plus.pmf(i) == doctest::Approx(0.2).epsilon(1e-14));
}

TEST_CASE("degenerate parent passes through") {
    auto zero = share(DiscreteParent::point_mass(0));
    for (const auto& u : u_grid()) {
        const DescendantPmf d(zero, u);
        CHECK(d.pmf(0) == doctest::Approx(1.0).epsilon(1e-15));
        CHECK(d.cdf(0) == doctest::Approx(1.0).epsilon(1e-15));
        CHECK(d.mean() == doctest::Approx(0.0));
        RandomStream rng(3);
        for (int k = 0; k < 20; ++k) CHECK(d.sample(rng) == 0);
    }
}

TEST_CASE("cdf formula, normalization, moments on the grid") {
    for (const auto& p : parents()) {
        for (const auto& u : u_grid()) {
            const DescendantPmf d(p, u);
            CAPTURE(p->name());
            CAPTURE(u.name);
            CHECK(std::fabs(total(d.probabilities()) - 1.0) < 1e-10);
            CHECK(d.normalizer() > 0.0);
            CHECK(d.normalizer() <= 1.0 + 1e-15);
            long double head = 0.0L;
            for (long k = 0; k <= d.max_index(); ++k) {
                CHECK(d.pmf(k) >= 0.0);
                head += d.pmf(k);
                CHECK(std::fabs(d.cdf(k) - static_cast<double>(head)) < 1e-12);
                CHECK(std::fabs(d.cdf(k) + d.survival(k) - 1.0) < 1e-12);
            }
            for (int r = 1; r <= 3; ++r) {
                const double direct = d.direct_moment(r);
                CHECK(std::fabs(d.moment(r) - direct) < 1e-10 * std::max(1.0, direct));
            }
        }
    }
}

TEST_CASE("dominance when u(-1) = 0") {
    for (const auto& p : parents()) {
        for (const auto& u : {USequence::power(0.5), USequence::power(2.0), USequence::geometric_minus(3.0),
                              USequence::product(3)}) {
            const DescendantPmf d(p, u);
            bool strict = false;
            for (long k = 0; k < d.max_index(); ++k) {
                CHECK(d.cdf(k) >= p->cdf(k) - 1e-14);
                strict = strict || d.cdf(k) > p->cdf(k) + 1e-12;
            }
            CHECK(strict);
        }
    }
}

TEST_CASE("limit in r: q approaches p monotonically") {
    for (const auto& p : parents()) {
        double previous = 2.0;
        for (double r : {2.0, 10.0, 100.0, 1e4}) {
            const DescendantPmf d(p, USequence::geometric(r));
            double worst = 0.0;
            for (long i = 0; i <= d.max_index(); ++i) worst = std::max(worst, std::fabs(d.pmf(i) - p->pmf(i)));
            CHECK(worst < previous);
            previous = worst;
        }
        CHECK(previous < 1e-3);
    }
    // r = 1e6: the mean matches the parent's.
    auto pois = share(DiscreteParent::poisson(2.1));
    CHECK(DescendantPmf(pois, USequence::geometric(1e6)).mean() == doctest::Approx(2.1).epsilon(1e-5));
    CHECK(DescendantPmf(pois, USequence::product(1)).mean() == doctest::Approx(1.05).epsilon(1e-11));
}

TEST_CASE("summation by parts identity on random sequences") {
    // -sum_(i=m..n) u_i (v_(i+1) - v_i) = u_m v_m - u_n v_(n+1) + sum_(i=m+1..n) v_i (u_i - u_(i-1))
    RandomStream rng(20240611);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> u(22), v(22);
        for (auto& x : u) x = 10.0 * rng.uniform();
        for (auto& x : v) x = 10.0 * rng.uniform();
        const int m = static_cast<int>(rng.uniform() * 10.0);
        const int n = 10 + static_cast<int>(rng.uniform() * 10.0);
        long double lhs = 0.0L, rhs = static_cast<long double>(u[m]) * v[m] - static_cast<long double>(u[n]) * v[n + 1];
        for (int i = m; i <= n; ++i) lhs -= static_cast<long double>(u[i]) * (v[i + 1] - v[i]);
        for (int i = m + 1; i <= n; ++i) rhs += static_cast<long double>(v[i]) * (u[i] - u[i - 1]);
        CHECK(std::fabs(static_cast<double>(lhs - rhs)) < 1e-12 * 100.0);
    }
}

TEST_CASE("random u sequences satisfy normalization and the cdf identity") {
    RandomStream rng(77);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> p(21);
        double s = 0.0;
        for (auto& x : p) s += (x = rng.uniform());
        for (auto& x : p) x /= s;
        auto parent = share(DiscreteParent::from_pmf(p));
        std::vector<double> u(22);
        u[0] = trial % 3 == 0 ? 0.0 : rng.uniform();
        for (std::size_t i = 1; i < u.size(); ++i) u[i] = u[i - 1] + (rng.uniform() < 0.2 ? 0.0 : 3.0 * rng.uniform()) + (i == 1 ? 1e-3 : 0.0);
        const DescendantPmf d(parent, USequence::from_values(u));
        CHECK(std::fabs(total(d.probabilities()) - 1.0) < 1e-12);
        // 1 - u(-1) v_0 from the raw values.
        long double v0 = 0.0L;
        for (std::size_t j = 0; j < p.size(); ++j) v0 += p[j] / u[j + 1];
        CHECK(d.normalizer() == doctest::Approx(static_cast<double>(1.0L - u[0] * v0)).epsilon(1e-11));
        const auto brute = brute_q(p, std::vector<long double>(u.begin(), u.end()));
        for (std::size_t i = 0; i < p.size(); ++i) CHECK(std::fabs(d.pmf(static_cast<long>(i)) - static_cast<double>(brute[i])) < 1e-13);
    }
}

TEST_CASE("small normalizer warns") {
    auto parent = share(DiscreteParent::point_mass(0));
    const DescendantPmf ok(parent, USequence::from_values({0.5, 1.0}));
    CHECK(ok.warnings().empty());
    auto two = share(DiscreteParent::from_pmf({0.5, 0.5}));
    const DescendantPmf near(two, USequence::from_values({1.0 - 1e-8, 1.0, 1.0}));
    CHECK(near.normalizer() == doctest::Approx(1e-8).epsilon(1e-6));
    CHECK_FALSE(near.warnings().empty());
    CHECK_THROWS_AS(USequence::from_values({0.0, 2.0, 1.0}), DomainError);
}

TEST_CASE("table lookup sampler") {
    auto point = share(DiscreteParent::point_mass(4));
    const DescendantPmf smear(point, USequence::power(1.0));
    RandomStream rng(11);
    std::vector<int> counts(5, 0);
    const int n = 100000;
    for (int k = 0; k < n; ++k) ++counts.at(static_cast<std::size_t>(smear.sample(rng)));
    double chi2 = 0.0;
    for (int c : counts) chi2 += (c - n / 5.0) * (c - n / 5.0) / (n / 5.0);
    CHECK(chi2 < 13.28);  // chi-squared(4) upper 1%

    // 1e6 draws, Poisson(2.1) with u = r^i: mean within 3 standard errors.
    auto pois = share(DiscreteParent::poisson(2.1));
    const DescendantPmf g(pois, USequence::geometric(1.5));
    const int big = 1000000;
    double sum = 0.0;
    for (int k = 0; k < big; ++k) sum += static_cast<double>(g.sample(rng));
    const double se = std::sqrt(g.variance() / big);
    CHECK(std::fabs(sum / big - g.mean()) < 3.0 * se);

    // Chi-squared goodness of fit for a power-u descendant.
    const DescendantPmf lam(pois, USequence::power(0.7));
    const int m = 200000;
    std::vector<int> hist(static_cast<std::size_t>(lam.max_index()) + 1, 0);
    for (int k = 0; k < m; ++k) ++hist.at(static_cast<std::size_t>(lam.sample(rng)));
    double stat = 0.0, pooled_obs = 0.0, pooled_exp = 0.0;
    int cells = 0;
    for (long i = 0; i <= lam.max_index(); ++i) {
        const double e = m * lam.pmf(i);
        if (e < 20.0) {
            pooled_obs += hist[i];
            pooled_exp += e;
            continue;
        }
        stat += (hist[i] - e) * (hist[i] - e) / e;
        ++cells;
    }
    stat += (pooled_obs - pooled_exp) * (pooled_obs - pooled_exp) / pooled_exp;
    // cells degrees of freedom (cells + 1 bins); 1% point below cells + 3.1 sqrt(2 cells) + 3.
    CHECK(stat < cells + 3.1 * std::sqrt(2.0 * cells) + 3.0);
}

TEST_CASE("inverse transform") {
    // lambda form, p_0 = (1 - 2^-lambda) q_0.
    const LambdaLongTail half({0.5, 0.3, 0.2}, 1.0);
    CHECK(half.pmf(0) == doctest::Approx(0.25).epsilon(1e-15));

    // Point mass at 0, lambda = 1: p_i = 1/(i+1) - 1/(i+2).
    const LambdaLongTail tele({1.0}, 1.0);
    for (long i : {0L, 1L, 5L, 100L, 100000L})
        CHECK(tele.pmf(i) == doctest::Approx(1.0 / (i + 1.0) - 1.0 / (i + 2.0)).epsilon(1e-12));
    CHECK(tele.survival(999) == doctest::Approx(1.0 / 1001.0).epsilon(1e-13));
    CHECK(tele.cdf(999) + tele.survival(999) == doctest::Approx(1.0).epsilon(1e-14));
    long double head = 0.0L;
    for (long i = 0; i <= 999; ++i) head += tele.pmf(i);
    CHECK(static_cast<double>(head) == doctest::Approx(tele.cdf(999)).epsilon(1e-12));

    // Finite n: the pmf sums to 1 and p_0 keeps the finite-n correction.
    const std::vector<double> q{0.4, 0.3, 0.2, 0.1};
    const auto pf = lambda_longtail_finite(q, 2.0);
    CHECK(total(pf) == doctest::Approx(1.0).epsilon(1e-14));
    const double end = std::pow(5.0, -2.0);
    CHECK(pf[0] == doctest::Approx(0.4 / (1.0 - end) * (1.0 - 0.25)).epsilon(1e-14));

    // Round trip: SBP then its inverse with the same v recovers the parent.
    for (const auto& p : {share(DiscreteParent::poisson(2.1)), share(DiscreteParent::binomial(8, 0.3))}) {
        for (const auto& u : {USequence::power(1.5), USequence::geometric(2.0), USequence::from_values({0.3, 1.0, 2.0, 3.5, 7.0})}) {
            const DescendantPmf d(p, u);
            std::vector<double> v(d.probabilities().size());
            for (std::size_t i = 0; i < v.size(); ++i) v[i] = d.scaled_v(static_cast<long>(i)) / u.u(static_cast<long>(i));
            const auto back = r_to_l(d.probabilities(), v, u.u(-1));
            for (std::size_t i = 0; i < back.size(); ++i) CHECK(std::fabs(back[i] - p->pmf(static_cast<long>(i))) < 1e-10);
        }
    }

    // Weights that keep growing at the cutoff diverge.
    std::vector<double> heavy(200);
    for (std::size_t j = 0; j < heavy.size(); ++j) heavy[j] = 1.0 / ((j + 1.0) * (j + 2.0));
    CHECK_THROWS_AS(LambdaLongTail(heavy, 1.5, true), DivergenceError);
    CHECK_NOTHROW(LambdaLongTail(heavy, 1.5));
    auto pois = share(DiscreteParent::poisson(2.1));
    const LambdaLongTail from_pois(DescendantPmf(pois, USequence::power(5.0)).probabilities(), 5.0, true);
    CHECK(from_pois.pmf(0) == doctest::Approx((1.0 - std::pow(2.0, -5.0)) * DescendantPmf(pois, USequence::power(5.0)).pmf(0)));
    CHECK_THROWS_AS(r_to_l({0.5, 0.5}, {1.0, 1.0}), DomainError);
}
