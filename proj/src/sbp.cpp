#include "partsdist/sbp.hpp"

#include "partsdist/error.hpp"
#include "partsdist/specialfn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace partsdist {

namespace {

constexpr double kTailCut = 1e-12;
constexpr long kMaxTable = 50'000'000;
const double kNegInf = -std::numeric_limits<double>::infinity();

// Neumaier-compensated running sum.
struct CompensatedSum {
    double sum = 0.0;
    double carry = 0.0;
    void add(double x) {
        const double t = sum + x;
        carry += std::fabs(sum) >= std::fabs(x) ? (sum - t) + x : (x - t) + sum;
        sum = t;
    }
    double value() const { return sum + carry; }
};

// Fills a table from a log-pmf until the mass left is below kTailCut and the
// terms are decreasing.
std::vector<double> tabulate(const std::function<double(long)>& log_pmf, double mode) {
    std::vector<double> p;
    CompensatedSum total;
    for (long i = 0;; ++i) {
        if (i > kMaxTable) throw DomainError("parent table exceeds 5e7 entries");
        const double pi = std::exp(log_pmf(i));
        p.push_back(pi);
        total.add(pi);
        if (static_cast<double>(i) >= mode && 1.0 - total.value() < kTailCut) break;
    }
    return p;
}

}  // namespace

DiscreteParent::DiscreteParent(std::vector<double> p, bool finite_support, std::string name, Pgf pgf)
    : p_(std::move(p)), finite_(finite_support), name_(std::move(name)), pgf_(std::move(pgf)) {
    if (p_.empty()) throw DomainError("parent pmf is empty");
    CompensatedSum total;
    for (double pi : p_) {
        if (!(pi >= 0.0) || !std::isfinite(pi)) throw DomainError("parent pmf entries must be finite and nonnegative");
        total.add(pi);
    }
    // Tables built by truncation carry up to kTailCut of missing mass.
    if (std::fabs(total.value() - 1.0) > 2.0 * kTailCut) throw DomainError("parent pmf does not sum to 1");
    while (p_.size() > 1 && p_.back() == 0.0) p_.pop_back();
    const double norm = total.value();
    CompensatedSum cum;
    CompensatedSum m1;
    cum_.reserve(p_.size());
    for (std::size_t i = 0; i < p_.size(); ++i) {
        p_[i] /= norm;
        cum.add(p_[i]);
        cum_.push_back(cum.value());
        m1.add(static_cast<double>(i) * p_[i]);
    }
    cum_.back() = 1.0;
    mean_ = m1.value();
}

DiscreteParent DiscreteParent::from_pmf(std::vector<double> p) {
    return DiscreteParent(std::move(p), true, "table");
}

PgfAt poisson_pgf_at(double mu, double d) {
    const double y = -mu * d;
    return {std::exp(y), -std::expm1(y), expm1_minus_linear(y)};
}

PgfAt negbin_pgf_at(double mu, double alpha, double d) {
    const double x = alpha * mu * d;
    const double y = -std::log1p(x) / alpha;
    // H - 1 + d mu = (e^y - 1 - y) + (x - log1p(x)) / alpha.
    return {std::exp(y), -std::expm1(y), expm1_minus_linear(y) - log1p_minus_linear(x) / alpha};
}

PgfAt binomial_pgf_at(int n, double p, double d) {
    const double y = n * std::log1p(-p * d);
    return {std::exp(y), -std::expm1(y), expm1_minus_linear(y) + n * log1p_minus_linear(-p * d)};
}

double poisson_pgf(double mu, double s) { return poisson_pgf_at(mu, 1.0 - s).value; }
double negbin_pgf(double mu, double alpha, double s) { return negbin_pgf_at(mu, alpha, 1.0 - s).value; }
double binomial_pgf(int n, double p, double s) { return binomial_pgf_at(n, p, 1.0 - s).value; }

namespace {

DiscreteParent::Pgf pgf_forms(std::function<PgfAt(double)> at) {
    DiscreteParent::Pgf pgf;
    pgf.value = [at](double s) { return at(1.0 - s).value; };
    pgf.deficit = [at](double d) { return at(d).deficit; };
    pgf.deficit2 = [at](double d) { return at(d).deficit2; };
    return pgf;
}

}  // namespace

DiscreteParent DiscreteParent::point_mass(int k) {
    if (k < 0) throw DomainError("point mass location must be >= 0");
    std::vector<double> p(static_cast<std::size_t>(k) + 1, 0.0);
    p.back() = 1.0;
    Pgf pgf;
    pgf.value = [k](double s) { return std::pow(s, k); };
    return DiscreteParent(std::move(p), true, "point-mass", std::move(pgf));
}

DiscreteParent DiscreteParent::poisson(double mu) {
    if (!(mu > 0.0) || !std::isfinite(mu)) throw DomainError("poisson mean must be positive");
    const double lmu = std::log(mu);
    auto p = tabulate([mu, lmu](long i) { return -mu + i * lmu - std::lgamma(i + 1.0); }, mu);
    return DiscreteParent(std::move(p), false, "poisson", pgf_forms([mu](double d) { return poisson_pgf_at(mu, d); }));
}

DiscreteParent DiscreteParent::negative_binomial(double mu, double alpha) {
    if (!(mu > 0.0) || !std::isfinite(mu)) throw DomainError("negative binomial mean must be positive");
    if (!(alpha > 0.0) || !std::isfinite(alpha)) throw DomainError("negative binomial dispersion must be positive");
    const double size = 1.0 / alpha;
    const double am = alpha * mu;
    // ln P(success) and ln P(failure) per trial.
    const double lp = -std::log1p(am);
    const double lq = std::log(am) - std::log1p(am);
    const double lg_size = std::lgamma(size);
    auto p = tabulate(
        [=](long i) { return std::lgamma(i + size) - lg_size - std::lgamma(i + 1.0) + size * lp + i * lq; },
        mu);
    return DiscreteParent(std::move(p), false, "negbin",
                          pgf_forms([mu, alpha](double d) { return negbin_pgf_at(mu, alpha, d); }));
}

DiscreteParent DiscreteParent::binomial(int n, double prob) {
    if (n < 1) throw DomainError("binomial size must be >= 1");
    if (!(prob > 0.0 && prob < 1.0)) throw DomainError("binomial probability must lie in (0, 1)");
    std::vector<double> p(static_cast<std::size_t>(n) + 1);
    const double lp = std::log(prob), lq = std::log1p(-prob);
    for (int i = 0; i <= n; ++i)
        p[i] = std::exp(std::lgamma(n + 1.0) - std::lgamma(i + 1.0) - std::lgamma(n - i + 1.0) + i * lp + (n - i) * lq);
    // The table sums to 1 up to rounding.
    CompensatedSum total;
    for (double pi : p) total.add(pi);
    for (double& pi : p) pi /= total.value();
    return DiscreteParent(std::move(p), true, "binomial",
                          pgf_forms([n, prob](double d) { return binomial_pgf_at(n, prob, d); }));
}

double DiscreteParent::pmf(long i) const {
    if (i < 0 || i > max_index()) return 0.0;
    return p_[static_cast<std::size_t>(i)];
}

double DiscreteParent::cdf(long k) const {
    if (k < 0) return 0.0;
    if (k >= max_index()) return 1.0;
    return cum_[static_cast<std::size_t>(k)];
}

double DiscreteParent::moment(int order) const {
    if (order < 0) throw DomainError("moment order must be >= 0");
    CompensatedSum m;
    for (std::size_t i = 0; i < p_.size(); ++i) m.add(std::pow(static_cast<double>(i), order) * p_[i]);
    return m.value();
}

double DiscreteParent::variance() const {
    CompensatedSum m;
    for (std::size_t i = 0; i < p_.size(); ++i) {
        const double d = static_cast<double>(i) - mean_;
        m.add(d * d * p_[i]);
    }
    return m.value();
}

double DiscreteParent::pgf(double s) const {
    if (pgf_.value) return pgf_.value(s);
    double h = 0.0;
    for (auto it = p_.rbegin(); it != p_.rend(); ++it) h = h * s + *it;
    return h;
}

double DiscreteParent::pgf_deficit(double d) const {
    if (pgf_.deficit) return pgf_.deficit(d);
    const double l = std::log1p(-d);
    CompensatedSum s;
    for (std::size_t j = 1; j < p_.size(); ++j) s.add(-std::expm1(static_cast<double>(j) * l) * p_[j]);
    return s.value();
}

double DiscreteParent::pgf_deficit2(double d) const {
    if (pgf_.deficit2) return pgf_.deficit2(d);
    const double l = std::log1p(-d);
    const double lin = log1p_minus_linear(-d);
    CompensatedSum s;
    for (std::size_t j = 2; j < p_.size(); ++j) {
        const double jj = static_cast<double>(j);
        s.add((expm1_minus_linear(jj * l) + jj * lin) * p_[j]);
    }
    // j = 1 contributes (1 - d) - 1 + d = 0.
    return s.value();
}

long DiscreteParent::sample(RandomStream& rng) const {
    const double u = rng.uniform();
    const auto it = std::upper_bound(cum_.begin(), cum_.end(), u);
    return std::min<long>(static_cast<long>(it - cum_.begin()), max_index());
}

double USequence::u(long i) const { return std::exp(log_u(i)); }

USequence USequence::power(double lambda) {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) throw DomainError("power u needs lambda > 0");
    USequence s;
    s.log_u = [lambda](long i) { return i < 0 ? kNegInf : lambda * std::log(i + 1.0); };
    s.log_ratio = [lambda](long i) { return i <= 0 ? kNegInf : -lambda * std::log1p(1.0 / i); };
    s.name = "power";
    return s;
}

USequence USequence::geometric(double r) {
    if (!(r > 1.0) || !std::isfinite(r)) throw DomainError("geometric u needs r > 1");
    const double lr = std::log(r);
    USequence s;
    s.log_u = [lr](long i) { return i * lr; };
    s.log_ratio = [lr](long) { return -lr; };
    s.name = "geometric";
    return s;
}

USequence USequence::geometric_minus(double r) {
    if (!(r > 1.0) || !std::isfinite(r)) throw DomainError("r^i - 1/r needs r > 1");
    const double lr = std::log(r);
    // ln(r^i - 1/r) = i ln r + ln(1 - r^-(i+1)).
    auto lu = [lr](long i) { return i < 0 ? kNegInf : i * lr + std::log(-std::expm1(-(i + 1.0) * lr)); };
    USequence s;
    s.log_u = lu;
    s.log_ratio = [lr](long i) {
        if (i <= 0) return kNegInf;
        return -lr + std::log(-std::expm1(-i * lr)) - std::log(-std::expm1(-(i + 1.0) * lr));
    };
    s.name = "geometric-minus";
    return s;
}

USequence USequence::product(int t) {
    if (t < 1) throw DomainError("product u needs t >= 1");
    USequence s;
    s.log_u = [t](long i) {
        if (i < 0) return kNegInf;
        double l = 0.0;
        for (int k = 1; k <= t; ++k) l += std::log(static_cast<double>(i + k));
        return l;
    };
    s.log_ratio = [t](long i) {
        return i <= 0 ? kNegInf : std::log(static_cast<double>(i)) - std::log(static_cast<double>(i + t));
    };
    s.name = "product";
    return s;
}

USequence USequence::from_values(std::vector<double> u) {
    if (u.size() < 2) throw DomainError("u needs values at -1 and 0");
    if (!(u[0] >= 0.0)) throw DomainError("u(-1) must be >= 0");
    for (std::size_t i = 1; i < u.size(); ++i) {
        if (!(u[i] > 0.0) || !std::isfinite(u[i])) throw DomainError("u_i must be positive for i >= 0");
        if (u[i] < u[i - 1]) throw DomainError("u must be nondecreasing");
    }
    auto values = std::make_shared<const std::vector<double>>(std::move(u));
    auto at = [values](long i) {
        const auto idx = static_cast<std::size_t>(std::clamp<long>(i + 1, 0, static_cast<long>(values->size()) - 1));
        return (*values)[idx];
    };
    USequence s;
    s.log_u = [at](long i) { return std::log(at(i)); };
    s.log_ratio = [at](long i) { return std::log(at(i - 1) / at(i)); };
    s.name = "table";
    return s;
}

std::vector<double> v_sequence(const DiscreteParent& parent, const USequence& u) {
    const long n = parent.max_index();
    std::vector<double> v(static_cast<std::size_t>(n) + 2, 0.0);
    for (long i = n; i >= 0; --i) v[i] = v[i + 1] + parent.pmf(i) * std::exp(-u.log_u(i));
    return v;
}

DescendantPmf::DescendantPmf(std::shared_ptr<const DiscreteParent> parent, USequence u)
    : parent_(std::move(parent)), u_(std::move(u)) {
    if (!parent_) throw DomainError("descendant needs a parent");
    if (!u_.log_u || !u_.log_ratio) throw DomainError("u sequence is incomplete");
    const long n = parent_->max_index();
    const auto sz = static_cast<std::size_t>(n) + 1;
    if (!std::isfinite(u_.log_u(0))) throw DomainError("u_0 must be positive and finite");

    std::vector<double> ratio(sz + 1);  // ratio[i] = u_(i-1)/u_i, i = 0..n+1
    for (long i = 0; i <= n + 1; ++i) {
        const double lr = u_.log_ratio(i);
        if (std::isnan(lr) || lr > 1e-12) throw DomainError("u must be nondecreasing with u_i > 0");
        ratio[i] = std::exp(std::min(lr, 0.0));
    }
    w_.assign(sz, 0.0);
    w_[n] = parent_->pmf(n);
    for (long i = n - 1; i >= 0; --i) w_[i] = parent_->pmf(i) + ratio[i + 1] * w_[i + 1];

    std::vector<double> s(sz);
    CompensatedSum total;
    for (long i = 0; i <= n; ++i) {
        const double lr = u_.log_ratio(i);
        s[i] = w_[i] * (lr == kNegInf ? 1.0 : -std::expm1(std::min(lr, 0.0)));
        total.add(s[i]);
    }
    normalizer_ = total.value();
    if (!(normalizer_ > 0.0)) throw DomainError("SBP normalizer is not positive");
    if (normalizer_ < 1e-6) warnings_.push_back("SBP normalizer 1 - u(-1) v_0 is below 1e-6; q is ill-conditioned");

    q_.resize(sz);
    for (std::size_t i = 0; i < sz; ++i) q_[i] = s[i] / normalizer_;
    // A point mass at K descends to r_i = (u_i - u_(i-1))/(u_K - u(-1)), so q is the
    // mixture of these with weights p_K (1 - u(-1)/u_K) / N. The weights are the
    // parent pmf only when u(-1) = 0.
    if (u_.log_u(-1) != kNegInf) {
        mixing_cum_.resize(sz);
        CompensatedSum c;
        for (long k = 0; k <= n; ++k) {
            c.add(parent_->pmf(k) * -std::expm1(u_.log_u(-1) - u_.log_u(k)) / normalizer_);
            mixing_cum_[k] = c.value();
        }
        mixing_cum_.back() = 1.0;
    }

    tail_.assign(sz + 1, 0.0);
    CompensatedSum t;
    for (long i = n; i >= 0; --i) {
        t.add(q_[i]);
        tail_[i] = t.value();
    }
}

double DescendantPmf::pmf(long i) const {
    if (i < 0 || i > max_index()) return 0.0;
    return q_[static_cast<std::size_t>(i)];
}

double DescendantPmf::scaled_v(long i) const {
    if (i < 0 || i > max_index()) return 0.0;
    return w_[static_cast<std::size_t>(i)];
}

double DescendantPmf::cdf(long k) const {
    if (k < 0) return 0.0;
    if (k >= max_index()) return 1.0;
    // The closed form subtracts u_(-1) v_0 ~ 1 - N; with a small normalizer the
    // head sum is the better-conditioned route.
    if (normalizer_ < 1e-3) return 1.0 - tail_[k + 1];
    const double uk_vk1 = std::exp(u_.log_ratio(k + 1)) * w_[k + 1];
    const double um1_v0 = std::exp(u_.log_ratio(0)) * w_[0];
    return (parent_->cdf(k) + uk_vk1 - um1_v0) / normalizer_;
}

double DescendantPmf::survival(long k) const {
    if (k < 0) return 1.0;
    if (k >= max_index()) return 0.0;
    return tail_[k + 1];
}

double DescendantPmf::moment(int order) const {
    if (order < 0) throw DomainError("moment order must be >= 0");
    if (order == 0) return 1.0;
    const long n = max_index();
    // T_i = sum_(j<i) ((j+1)^r - j^r) u_j / u_i.
    double t = 0.0;
    CompensatedSum correction;
    for (long i = 1; i <= n; ++i) {
        const double c = std::pow(static_cast<double>(i), order) - std::pow(static_cast<double>(i - 1), order);
        t = (t + c) * std::exp(u_.log_ratio(i));
        correction.add(t * parent_->pmf(i));
    }
    return (parent_->moment(order) - correction.value()) / normalizer_;
}

double DescendantPmf::variance() const {
    const double m1 = moment(1);
    return moment(2) - m1 * m1;
}

double DescendantPmf::direct_moment(int order) const {
    CompensatedSum m;
    for (std::size_t i = 0; i < q_.size(); ++i) m.add(std::pow(static_cast<double>(i), order) * q_[i]);
    return m.value();
}

long DescendantPmf::sample(RandomStream& rng) const {
    long k = 0;
    if (mixing_cum_.empty()) {
        k = parent_->sample(rng);
    } else {
        const auto it = std::upper_bound(mixing_cum_.begin(), mixing_cum_.end(), rng.uniform());
        k = std::min<long>(static_cast<long>(it - mixing_cum_.begin()), max_index());
    }
    const double lk = u_.log_u(k);
    const double a = std::exp(u_.log_u(-1) - lk);  // u_(-1) / u_K
    const double target = a + rng.uniform() * (1.0 - a);
    long lo = 0, hi = k;  // smallest i in [lo, hi] with u_i / u_K > target
    while (lo < hi) {
        const long mid = lo + (hi - lo) / 2;
        if (std::exp(u_.log_u(mid) - lk) > target)
            hi = mid;
        else
            lo = mid + 1;
    }
    return lo;
}

std::vector<double> r_to_l(const std::vector<double>& q, const std::vector<double>& v, double u_minus_one) {
    if (q.empty() || q.size() != v.size()) throw DomainError("q and v must be nonempty and of equal length");
    if (!(u_minus_one >= 0.0)) throw DomainError("u(-1) must be >= 0");
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!(v[i] > 0.0)) throw DomainError("v must be positive on the support");
        if (i > 0 && !(v[i] < v[i - 1])) throw DomainError("v must be decreasing");
    }
    const double norm = 1.0 - u_minus_one * v[0];
    if (!(norm > 0.0)) throw DomainError("u(-1) v_0 must be below 1");
    std::vector<double> p(q.size());
    CompensatedSum u;
    for (std::size_t i = 0; i < q.size(); ++i) {
        u.add(q[i] / v[i]);
        const double next_v = i + 1 < v.size() ? v[i + 1] : 0.0;
        p[i] = (u_minus_one + norm * u.value()) * (v[i] - next_v);
    }
    return p;
}

LambdaLongTail::LambdaLongTail(std::vector<double> q, double lambda, bool truncated)
    : q_(std::move(q)), lambda_(lambda) {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) throw DomainError("long-tail lambda must be positive");
    if (q_.empty()) throw DomainError("q is empty");
    u_.resize(q_.size());
    CompensatedSum acc;
    for (std::size_t j = 0; j < q_.size(); ++j) {
        if (!(q_[j] >= 0.0)) throw DomainError("q entries must be nonnegative");
        acc.add(q_[j] * std::pow(j + 1.0, lambda));
        u_[j] = acc.value();
    }
    // With q cut from an infinite sequence, the weight sum must have settled: the
    // geometric extrapolation of the last two weights bounds what is missing.
    const std::size_t m = q_.size();
    if (truncated && m >= 2) {
        const double last = q_[m - 1] * std::pow(static_cast<double>(m), lambda);
        const double prev = q_[m - 2] * std::pow(m - 1.0, lambda);
        const double rho = prev > 0.0 ? last / prev : (last > 0.0 ? 1.0 : 0.0);
        if (rho >= 1.0 || last * rho / (1.0 - rho) > 1e-8 * u_.back())
            throw DivergenceError("long-tail weights q_j (j+1)^lambda do not converge at the cutoff");
    }
    q_tail_.assign(m + 1, 0.0);
    CompensatedSum t;
    for (std::size_t i = m; i-- > 0;) {
        t.add(q_[i]);
        q_tail_[i] = t.value();
    }
}

double LambdaLongTail::increment(long i) const {
    const double a = i + 1.0;
    return std::exp(-lambda_ * std::log(a)) * -std::expm1(-lambda_ * std::log1p(1.0 / a));
}

double LambdaLongTail::pmf(long i) const {
    if (i < 0) return 0.0;
    const auto m = static_cast<long>(u_.size());
    return increment(i) * (i < m ? u_[i] : u_.back());
}

double LambdaLongTail::survival(long k) const {
    if (k < 0) return 1.0;
    const auto m = static_cast<long>(u_.size());
    const double qt = k + 1 < m ? q_tail_[k + 1] : 0.0;
    return qt + (k < m ? u_[k] : u_.back()) * std::pow(k + 2.0, -lambda_);
}

double LambdaLongTail::cdf(long k) const {
    if (k < 0) return 0.0;
    const auto m = static_cast<long>(u_.size());
    const double qhead = q_tail_[0] - (k + 1 < m ? q_tail_[k + 1] : 0.0);
    return qhead - (k < m ? u_[k] : u_.back()) * std::pow(k + 2.0, -lambda_);
}

std::vector<double> lambda_longtail_finite(const std::vector<double>& q, double lambda) {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) throw DomainError("long-tail lambda must be positive");
    const double n = static_cast<double>(q.size()) - 1.0;
    const double end = std::pow(n + 2.0, -lambda);
    std::vector<double> v(q.size());
    for (std::size_t i = 0; i < q.size(); ++i) v[i] = std::pow(i + 1.0, -lambda) - end;
    return r_to_l(q, v, 0.0);
}

}  // namespace partsdist
