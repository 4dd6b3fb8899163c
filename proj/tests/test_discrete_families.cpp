#include "partsdist/discrete_families.hpp"
#include "partsdist/error.hpp"

#include <doctest.h>

#include <cmath>
#include <memory>
#include <vector>

using namespace partsdist;

namespace {

ParentPtr share(DiscreteParent p) { return std::make_shared<const DiscreteParent>(std::move(p)); }

double max_abs_diff(const CountModel& a, const DiscreteParent& p) {
    double worst = 0.0;
    for (long i = 0; i <= std::max<long>(a.max_index(), p.max_index()); ++i)
        worst = std::max(worst, std::fabs(a.pmf(i) - p.pmf(i)));
    return worst;
}

double total_variation(const CountModel& a, const DiscreteParent& p) {
    double tv = 0.0;
    for (long i = 0; i <= std::max<long>(a.max_index(), p.max_index()); ++i) tv += std::fabs(a.pmf(i) - p.pmf(i));
    return tv / 2.0;
}

double sum_pmf(const CountModel& m) {
    long double s = 0.0L;
    for (long i = 0; i <= m.max_index(); ++i) s += m.pmf(i);
    return static_cast<double>(s);
}

double brute_moment(const CountModel& m, int order) {
    long double s = 0.0L;
    for (long i = 0; i <= m.max_index(); ++i) s += std::pow(static_cast<long double>(i), order) * m.pmf(i);
    return static_cast<double>(s);
}

std::vector<ParentPtr> three_parents() {
    return {share(DiscreteParent::poisson(2.0)), share(DiscreteParent::binomial(12, 0.4)),
            share(DiscreteParent::negative_binomial(2.5, 0.8))};
}

// Power-series coefficients of M(s) = ((r-1)/(rs-1)) (s H(s) - c) / N, read off
// as -(r-1)/N sum_k s^k sum_(j<=k) a_j r^(k-j) with a_0 = -c, a_k = p_(k-1).
std::vector<double> pgf_coefficients(const DiscreteParent& p, double r, int count) {
    // The table's own pgf: the closed form differs by the truncated mass, which
    // the r^k growth below would amplify.
    long double h = 0.0L;
    for (long j = p.max_index(); j >= 0; --j) h = h / r + p.pmf(j);
    const long double c = h / r;
    const long double norm = 1.0L - c;
    std::vector<long double> a(static_cast<std::size_t>(count));
    a[0] = -c;
    for (int k = 1; k < count; ++k) a[k] = p.pmf(k - 1);
    std::vector<double> out(static_cast<std::size_t>(count));
    long double acc = 0.0L;
    for (int k = 0; k < count; ++k) {
        acc = acc * r + a[k];
        out[k] = static_cast<double>(-(r - 1.0L) / norm * acc);
    }
    return out;
}

}  // namespace

TEST_CASE("parent pgfs") {
    CHECK(poisson_pgf(2.1, 2.0 / 3.0) == doctest::Approx(std::exp(-0.7)).epsilon(1e-15));
    CHECK(binomial_pgf(2, 0.5, 0.0) == doctest::Approx(0.25).epsilon(1e-15));
    for (double s : {0.0, 0.3, 0.8, 1.0})
        CHECK(std::fabs(negbin_pgf(2.1, 1e-8, s) - poisson_pgf(2.1, s)) < 1e-6);
    // H(1) = 1, H'(1) = mean.
    const double h = 1e-6;
    CHECK(negbin_pgf(3.0, 0.7, 1.0) == doctest::Approx(1.0));
    CHECK((negbin_pgf(3.0, 0.7, 1.0) - negbin_pgf(3.0, 0.7, 1.0 - h)) / h == doctest::Approx(3.0).epsilon(1e-5));
    CHECK((binomial_pgf(7, 0.3, 1.0) - binomial_pgf(7, 0.3, 1.0 - h)) / h == doctest::Approx(2.1).epsilon(1e-5));
    CHECK((poisson_pgf(4.0, 1.0) - poisson_pgf(4.0, 1.0 - h)) / h == doctest::Approx(4.0).epsilon(1e-5));
}

TEST_CASE("lambda class") {
    auto pois = share(DiscreteParent::poisson(2.1));
    const LambdaClassFamily one(pois, 1.0);
    for (long i = 0; i <= pois->max_index(); ++i) {
        double s = 0.0;
        for (long j = i; j <= pois->max_index(); ++j) s += pois->pmf(j) / (j + 1.0);
        CHECK(one.pmf(i) == doctest::Approx(s).epsilon(1e-12));
    }
    CHECK(max_abs_diff(LambdaClassFamily(pois, 1e4), *pois) < 1e-3);
    CHECK(LambdaClassFamily(pois, 1e-9).pmf(0) > 1.0 - 1e-8);
    // Cutoff-sum mean equals the direct sum.
    for (double lam : {0.3, 1.0, 4.0}) {
        const LambdaClassFamily f(pois, lam);
        CHECK(f.mean() == doctest::Approx(brute_moment(f, 1)).epsilon(1e-10));
    }
    CHECK(one.mean() == doctest::Approx(2.1 / 2.0).epsilon(1e-10));
}

TEST_CASE("shifted lambda class") {
    // Zero-truncated Poisson(1.7).
    const auto pois = DiscreteParent::poisson(1.7);
    std::vector<double> zt(pois.probabilities());
    const double p0 = zt[0];
    zt[0] = 0.0;
    for (double& x : zt) x /= 1.0 - p0;
    const auto parent = DiscreteParent::from_pmf(zt);
    for (double lam : {0.5, 1.0, 2.5}) {
        const auto f = bissinger_family(parent, lam);
        for (long i = 0; i + 1 <= parent.max_index(); ++i) {
            double s = 0.0;
            for (long j = i + 1; j <= parent.max_index(); ++j) s += parent.pmf(j) / std::pow(static_cast<double>(j), lam);
            CHECK(f.pmf(i) == doctest::Approx((std::pow(i + 1.0, lam) - std::pow(static_cast<double>(i), lam)) * s).epsilon(1e-12));
        }
        CHECK(sum_pmf(f) == doctest::Approx(1.0).epsilon(1e-12));
    }
    CHECK_THROWS_AS(bissinger_family(pois, 1.0), DomainError);
}

TEST_CASE("r class closed forms") {
    auto pois = share(DiscreteParent::poisson(2.1));
    const RClassFamily f(pois, 1.5);
    CHECK(pois->pgf(1.0 / 1.5) == doctest::Approx(std::exp(-(1.0 - 1.0 / 1.5) * 2.1)).epsilon(1e-15));
    CHECK(f.mean() == doctest::Approx(1.6341756978147299).epsilon(1e-12));
    CHECK(f.pmf(0) == doctest::Approx(0.2474476931959242).epsilon(1e-12));
    CHECK(f.pgf(1.0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(f.normalizer() == doctest::Approx(f.descendant().normalizer()).epsilon(1e-13));

    // Stripping loses about eps r^i H_0 / N absolutely.
    for (long i = 0; i <= 10; ++i) CHECK(std::fabs(f.pmf_from_pgf(i) - f.pmf(i)) < 1e-11);

    // Coefficients of M(s) reproduce q.
    for (const auto& p : three_parents()) {
        for (double r : {1.5, 3.0}) {
            const RClassFamily g(p, r);
            const auto coef = pgf_coefficients(*p, r, 11);
            for (long i = 0; i <= 10; ++i) CHECK(std::fabs(coef[i] - g.pmf(i)) < 1e-9);
        }
    }

    // M(s) is continuous through the removable point s = 1/r, and matches sum q_i s^i.
    for (double s : {1.0 / 1.5 - 1e-7, 1.0 / 1.5, 1.0 / 1.5 + 3e-7, 1.0 / 1.5 + 2e-6, 0.2, 0.9}) {
        long double direct = 0.0L;
        for (long i = f.max_index(); i >= 0; --i) direct = direct * s + f.pmf(i);
        CHECK(f.pgf(s) == doctest::Approx(static_cast<double>(direct)).epsilon(1e-9));
    }
}

TEST_CASE("r class mean against brute force on 12 combinations") {
    std::vector<ParentPtr> parents{share(DiscreteParent::poisson(2.1)), share(DiscreteParent::poisson(0.4)),
                                   share(DiscreteParent::negative_binomial(3.0, 0.5)),
                                   share(DiscreteParent::binomial(15, 0.3))};
    int combos = 0;
    for (const auto& p : parents) {
        for (double r : {1.5, 5.0, 40.0}) {
            const RClassFamily f(p, r);
            CHECK(std::fabs(f.mean() - brute_moment(f, 1)) < 1e-8);
            CHECK(std::fabs(sum_pmf(f) - 1.0) < 1e-10);
            ++combos;
        }
    }
    CHECK(combos == 12);
}

TEST_CASE("r to 1 limit") {
    const auto point = DiscreteParent::point_mass(1);
    CHECK(RClassFamily::r1_limit_pmf(point, 0) == doctest::Approx(0.5));
    for (const auto& p : three_parents()) {
        double s = 0.0;
        for (long i = 0; i <= p->max_index(); ++i) s += RClassFamily::r1_limit_pmf(*p, i);
        CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
        const RClassFamily near(p, 1.0 + 1e-8);
        for (long i = 0; i <= p->max_index(); ++i) CHECK(std::fabs(near.pmf(i) - RClassFamily::r1_limit_pmf(*p, i)) < 1e-5);
        // The stable mean tends to (E[X(X-1)]/2 + mu)/(1 + mu).
        const double mu = p->mean();
        const double limit_mean = ((p->moment(2) - mu) / 2.0 + mu) / (1.0 + mu);
        CHECK(near.mean() == doctest::Approx(limit_mean).epsilon(1e-6));
    }
    auto pois = share(DiscreteParent::poisson(2.1));
    const double expected0 = (pois->pmf(0) + (1.0 - pois->pmf(0))) / 3.1;
    CHECK(RClassFamily::r1_limit_pmf(*pois, 0) == doctest::Approx(expected0).epsilon(1e-12));
}

TEST_CASE("r class qualitative ordering and limits") {
    auto pois = share(DiscreteParent::poisson(2.1));
    const RClassFamily slow(pois, 1.5), fast(pois, 5.0);
    CHECK(slow.pmf(0) > fast.pmf(0));
    CHECK(fast.pmf(0) > pois->pmf(0));
    CHECK(total_variation(fast, *pois) < total_variation(slow, *pois));

    for (const auto& p : three_parents()) {
        double prev_r = 1.0, prev_l = 1.0;
        for (double k : {2.0, 10.0, 100.0, 1e4}) {
            const double tv_r = total_variation(RClassFamily(p, k), *p);
            const double tv_l = total_variation(LambdaClassFamily(p, k), *p);
            CHECK(tv_r < prev_r);
            CHECK(tv_l < prev_l);
            prev_r = tv_r;
            prev_l = tv_l;
        }
    }
}

TEST_CASE("r class inverse-transform sampler") {
    auto pois = share(DiscreteParent::poisson(2.1));
    const RClassFamily f(pois, 1.5);
    RandomStream rng(5);
    const int n = 200000;
    std::vector<int> hist(static_cast<std::size_t>(f.max_index()) + 1, 0);
    double sum = 0.0;
    for (int k = 0; k < n; ++k) {
        const long x = f.sample(rng);
        ++hist.at(static_cast<std::size_t>(x));
        sum += static_cast<double>(x);
    }
    CHECK(std::fabs(sum / n - f.mean()) < 3.0 * std::sqrt(f.variance() / n));
    double stat = 0.0, pooled_o = 0.0, pooled_e = 0.0;
    int cells = 0;
    for (long i = 0; i <= f.max_index(); ++i) {
        const double e = n * f.pmf(i);
        if (e < 20.0) {
            pooled_o += hist[i];
            pooled_e += e;
            continue;
        }
        stat += (hist[i] - e) * (hist[i] - e) / e;
        ++cells;
    }
    stat += (pooled_o - pooled_e) * (pooled_o - pooled_e) / pooled_e;
    CHECK(stat < cells + 3.1 * std::sqrt(2.0 * cells) + 3.0);
}

TEST_CASE("geometric long tail") {
    auto pois = share(DiscreteParent::poisson(1.0));
    const GeometricLongTail g(pois, 2.0);
    CHECK(g.pgf(1.0) == doctest::Approx(1.0).epsilon(1e-15));
    const GeometricLongTail pure(share(DiscreteParent::point_mass(0)), 3.0);
    for (double s : {0.0, 0.4, 0.95}) CHECK(pure.pgf(s) == doctest::Approx(2.0 / (3.0 - s)).epsilon(1e-15));

    for (long i = 0; i <= 50; ++i) {
        long double conv = 0.0L;
        for (long j = 0; j <= i; ++j) conv += pois->pmf(j) * (0.5L * std::pow(2.0L, -static_cast<long double>(i - j)));
        CHECK(std::fabs(g.pmf(i) - static_cast<double>(conv)) < 1e-12);
    }
    CHECK(sum_pmf(g) == doctest::Approx(1.0).epsilon(1e-11));
    CHECK(g.mean() == doctest::Approx(brute_moment(g, 1)).epsilon(1e-10));
    for (long k : {0L, 3L, 20L}) CHECK(g.cdf(k) + g.survival(k) == doctest::Approx(1.0).epsilon(1e-14));

    RandomStream rng(8);
    double s = 0.0;
    const int n = 200000;
    for (int k = 0; k < n; ++k) s += static_cast<double>(g.sample(rng));
    CHECK(std::fabs(s / n - g.mean()) < 3.0 * std::sqrt(g.variance() / n));
}

TEST_CASE("product u class") {
    const ProductUFamily t1(share(DiscreteParent::poisson(2.0)), 1);
    CHECK(t1.mean() == doctest::Approx(1.0).epsilon(1e-11));
    const ProductUFamily t3(share(DiscreteParent::poisson(2.0)), 3);
    CHECK(t3.mean() == doctest::Approx(1.5).epsilon(1e-11));
    CHECK(t3.variance() == doctest::Approx(1.65).epsilon(1e-10));
    for (const auto& p : three_parents()) {
        for (int t : {1, 2, 3, 5}) {
            const ProductUFamily f(p, t);
            const double m1 = brute_moment(f, 1);
            const double var = brute_moment(f, 2) - m1 * m1;
            CHECK(std::fabs(f.mean() - m1) < 1e-10);
            CHECK(std::fabs(f.variance() - var) < 1e-10);
            // The generic reversed-sum moments agree too.
            CHECK(std::fabs(f.descendant().mean() - m1) < 1e-10);
        }
    }
    auto pois = share(DiscreteParent::poisson(2.0));
    CHECK(max_abs_diff(ProductUFamily(pois, 200), *pois) < 1e-2);
}

TEST_CASE("r^i - 1/r class") {
    for (const auto& p : three_parents()) {
        for (double r : {1.2, 3.0}) CHECK(sum_pmf(RMinusFamily(p, r)) == doctest::Approx(1.0).epsilon(1e-10));
        const RMinusFamily near(p, 1.0 + 1e-8);
        for (long i = 0; i <= p->max_index(); ++i) CHECK(std::fabs(near.pmf(i) - RMinusFamily::r1_limit_pmf(*p, i)) < 1e-5);
        double prev = 1.0;
        for (double r : {2.0, 10.0, 100.0, 1e4}) {
            const double d = max_abs_diff(RMinusFamily(p, r), *p);
            CHECK(d < prev);
            prev = d;
        }
        CHECK(prev < 1e-3);
    }
    // Direct formula.
    auto pois = share(DiscreteParent::poisson(2.1));
    const double r = 2.5;
    const RMinusFamily f(pois, r);
    for (long i = 0; i <= 12; ++i) {
        double s = 0.0;
        for (long j = i; j <= pois->max_index(); ++j) s += pois->pmf(j) / (std::pow(r, static_cast<double>(j)) - 1.0 / r);
        CHECK(f.pmf(i) == doctest::Approx(std::pow(r, static_cast<double>(i)) * (1.0 - 1.0 / r) * s).epsilon(1e-12));
    }
}
