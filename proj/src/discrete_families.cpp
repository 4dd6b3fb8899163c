#include "partsdist/discrete_families.hpp"

#include "partsdist/error.hpp"

#include <algorithm>
#include <cmath>

namespace partsdist {

namespace {

// k-th derivative of the truncated pgf at s: sum_j j(j-1)...(j-k+1) p_j s^(j-k).
double pgf_derivative(const DiscreteParent& p, int k, double s) {
    double h = 0.0;
    for (long j = p.max_index(); j >= k; --j) {
        double falling = 1.0;
        for (int m = 0; m < k; ++m) falling *= static_cast<double>(j - m);
        h = h * s + falling * p.pmf(j);
    }
    return h;
}

double checked_r(double r) {
    if (!(r > 1.0) || !std::isfinite(r)) throw DomainError("r must exceed 1");
    return r;
}

}  // namespace

ParentModel::ParentModel(ParentPtr parent) : parent_(std::move(parent)) {
    if (!parent_) throw DomainError("parent model needs a parent");
}

double ParentModel::survival(long k) const {
    double s = 0.0;
    for (long j = parent_->max_index(); j > k; --j) s += parent_->pmf(j);
    return s;
}

SbpFamily::SbpFamily(ParentPtr parent, USequence u) : d_(std::move(parent), std::move(u)) {}

double r_class_mean(const PgfAt& h, double delta) {
    return (h.deficit2 + delta * h.deficit) / (delta * (h.deficit + delta * h.value));
}

RClassFamily::RClassFamily(ParentPtr parent, double r)
    : SbpFamily(parent, USequence::geometric(checked_r(r))), r_(r), delta_(-std::expm1(-std::log(r))) {
    const PgfAt h{parent->pgf(1.0 - delta_), parent->pgf_deficit(delta_), parent->pgf_deficit2(delta_)};
    h_at_inv_r_ = h.value;
    norm_ = h.deficit + delta_ * h.value;
    mean_ = r_class_mean(h, delta_);

    const long n = d_.max_index();
    const double lr = std::log(r_);
    tilt_cum_.resize(static_cast<std::size_t>(n) + 1);
    double c = 0.0;
    for (long k = 0; k <= n; ++k) {
        c += parent->pmf(k) * -std::expm1(-(k + 1.0) * lr) / d_.normalizer();
        tilt_cum_[k] = c;
    }
    tilt_cum_.back() = 1.0;
}

double RClassFamily::pgf(double s) const {
    if (!(s >= 0.0 && s <= 1.0)) throw DomainError("pgf argument must lie in [0, 1]");
    const double s0 = 1.0 / r_;
    const double h = s - s0;
    const DiscreteParent& p = parent();
    if (std::fabs(r_ * s - 1.0) < 1e-6) {
        // (f(s) - f(s0)) / (s - s0) for f(s) = s H(s), to second order in h.
        const double h0 = p.pgf(s0);
        const double h1 = pgf_derivative(p, 1, s0);
        const double h2 = pgf_derivative(p, 2, s0);
        const double h3 = pgf_derivative(p, 3, s0);
        const double f1 = h0 + s0 * h1;
        const double f2 = 2.0 * h1 + s0 * h2;
        const double f3 = 3.0 * h2 + s0 * h3;
        return delta_ * (f1 + f2 * h / 2.0 + f3 * h * h / 6.0) / norm_;
    }
    return (r_ - 1.0) / (r_ * s - 1.0) * (s * p.pgf(s) - h_at_inv_r_ / r_) / norm_;
}

double RClassFamily::pmf_from_pgf(long i) const {
    if (i < 0) return 0.0;
    const DiscreteParent& p = parent();
    const double x = 1.0 / r_;
    // Neumaier sum of the leading terms.
    double sum = 0.0, carry = 0.0, xj = 1.0;
    for (long j = 0; j < i; ++j) {
        const double term = p.pmf(j) * xj;
        const double t = sum + term;
        carry += std::fabs(sum) >= std::fabs(term) ? (sum - t) + term : (term - t) + sum;
        sum = t;
        xj *= x;
    }
    const double hi = std::max(0.0, (h_at_inv_r_ - sum) - carry);
    return hi * std::exp(i * std::log(r_)) * delta_ / norm_;
}

long RClassFamily::sample(RandomStream& rng) const {
    const auto it = std::upper_bound(tilt_cum_.begin(), tilt_cum_.end(), rng.uniform());
    const long k = std::min<long>(static_cast<long>(it - tilt_cum_.begin()), d_.max_index());
    const double lr = std::log(r_);
    const double tail = std::exp(-(k + 1.0) * lr);  // r^-(K+1)
    // m = ln((r^K - 1/r) U + 1/r) / ln r, written relative to r^K.
    const double m = k + std::log(rng.uniform() * (1.0 - tail) + tail) / lr;
    return std::clamp<long>(static_cast<long>(std::floor(m + 1.0)), 0, k);
}

double RClassFamily::r1_limit_pmf(const DiscreteParent& parent, long i) {
    if (i < 0) return 0.0;
    double above = 0.0;
    for (long j = parent.max_index(); j > i; --j) above += parent.pmf(j);
    return (parent.pmf(i) + above) / (1.0 + parent.mean());
}

LambdaClassFamily::LambdaClassFamily(ParentPtr parent, double lambda)
    : SbpFamily(std::move(parent), USequence::power(lambda)), lambda_(lambda) {}

LambdaClassFamily bissinger_family(const DiscreteParent& parent, double lambda) {
    if (parent.pmf(0) > 1e-15) throw DomainError("the shifted lambda class needs p_0 = 0");
    if (parent.max_index() < 1) throw DomainError("the shifted lambda class needs mass above 0");
    const auto& p = parent.probabilities();
    std::vector<double> shifted(p.begin() + 1, p.end());
    auto down = std::make_shared<const DiscreteParent>(std::move(shifted), parent.finite_support(),
                                                       parent.name() + "-shifted");
    return LambdaClassFamily(std::move(down), lambda);
}

RMinusFamily::RMinusFamily(ParentPtr parent, double r)
    : SbpFamily(std::move(parent), USequence::geometric_minus(checked_r(r))), r_(r) {}

double RMinusFamily::r1_limit_pmf(const DiscreteParent& parent, long i) {
    if (i < 0) return 0.0;
    double s = 0.0;
    for (long j = parent.max_index(); j >= i; --j) s += parent.pmf(j) / (j + 1.0);
    return s;
}

ProductUFamily::ProductUFamily(ParentPtr parent, int t) : SbpFamily(std::move(parent), USequence::product(t)), t_(t) {}

double ProductUFamily::mean() const { return t_ * parent().mean() / (t_ + 1.0); }

double ProductUFamily::variance() const {
    const double mu = parent().mean();
    const double s2 = parent().variance();
    const double t = t_;
    return t * s2 / (t + 2.0) + t * mu * mu / ((t + 1.0) * (t + 1.0) * (t + 2.0)) + t * mu / ((t + 1.0) * (t + 2.0));
}

GeometricLongTail::GeometricLongTail(ParentPtr parent, double r) : parent_(std::move(parent)), r_(checked_r(r)) {
    if (!parent_) throw DomainError("geometric long tail needs a parent");
    c_.resize(static_cast<std::size_t>(parent_->max_index()) + 1);
    double c = 0.0;
    for (long i = 0; i <= parent_->max_index(); ++i) {
        c = parent_->pmf(i) + c / r_;
        c_[i] = c;
    }
}

double GeometricLongTail::pmf(long i) const {
    if (i < 0) return 0.0;
    const double delta = -std::expm1(-std::log(r_));
    const long n = parent_->max_index();
    if (i <= n) return delta * c_[i];
    return delta * c_[n] * std::exp(-(i - n) * std::log(r_));
}

double GeometricLongTail::survival(long k) const {
    if (k < 0) return 1.0;
    const long n = parent_->max_index();
    // P(X + G > k) = sum_(j<=k) p_j r^-(k-j+1) + P(X > k) = c_k / r + P(X > k).
    double above = 0.0;
    for (long j = n; j > k; --j) above += parent_->pmf(j);
    const double ck = k <= n ? c_[k] : c_[n] * std::exp(-(k - n) * std::log(r_));
    return ck / r_ + above;
}

double GeometricLongTail::cdf(long k) const {
    if (k < 0) return 0.0;
    const long n = parent_->max_index();
    const double ck = k <= n ? c_[k] : c_[n] * std::exp(-(k - n) * std::log(r_));
    return parent_->cdf(k) - ck / r_;
}

double GeometricLongTail::mean() const { return parent_->mean() + 1.0 / (r_ - 1.0); }

double GeometricLongTail::variance() const { return parent_->variance() + r_ / ((r_ - 1.0) * (r_ - 1.0)); }

long GeometricLongTail::sample(RandomStream& rng) const {
    // P(G >= k) = r^-k.
    const long g = static_cast<long>(std::floor(-std::log(rng.uniform()) / std::log(r_)));
    return parent_->sample(rng) + g;
}

long GeometricLongTail::max_index() const {
    const long n = parent_->max_index();
    const double tail = c_[n] / r_;
    if (tail <= 1e-12) return n;
    return n + static_cast<long>(std::ceil(std::log(tail / 1e-12) / std::log(r_)));
}

double GeometricLongTail::pgf(double s) const {
    if (!(s >= 0.0 && s <= 1.0)) throw DomainError("pgf argument must lie in [0, 1]");
    return (r_ - 1.0) / (r_ - s) * parent_->pgf(s);
}

}  // namespace partsdist
