#pragma once

#include "partsdist/random.hpp"

#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace partsdist {

// A pgf H at s = 1 - d, with the deficits 1 - H and H - 1 + d mu that stay
// accurate as d -> 0.
struct PgfAt {
    double value;
    double deficit;
    double deficit2;
};

PgfAt poisson_pgf_at(double mu, double d);
PgfAt negbin_pgf_at(double mu, double alpha, double d);  // H(s) = (1 + mu alpha (1 - s))^(-1/alpha)
PgfAt binomial_pgf_at(int n, double p, double d);

double poisson_pgf(double mu, double s);
double negbin_pgf(double mu, double alpha, double s);
double binomial_pgf(int n, double p, double s);

// A count distribution on 0..n. Infinite supports are cut where the remaining
// mass drops below 1e-12 and the table is renormalized, so every sum below is
// finite. finite_support() tells a true upper limit from such a cut.
class DiscreteParent {
public:
    // Closed forms of the pgf, used where the truncated table would lose accuracy.
    struct Pgf {
        std::function<double(double)> value;     // H(s)
        // 1 - H(1 - d) and H(1 - d) - 1 + d mu, both accurate as d -> 0.
        std::function<double(double)> deficit;
        std::function<double(double)> deficit2;
    };

    // p must be nonnegative and sum to 1 within 1e-12; it is renormalized.
    DiscreteParent(std::vector<double> p, bool finite_support, std::string name, Pgf pgf = {});

    static DiscreteParent from_pmf(std::vector<double> p);
    static DiscreteParent point_mass(int k);
    static DiscreteParent poisson(double mu);
    // Mean mu and dispersion alpha: variance mu (1 + alpha mu).
    static DiscreteParent negative_binomial(double mu, double alpha);
    static DiscreteParent binomial(int n, double p);

    const std::string& name() const noexcept { return name_; }
    bool finite_support() const noexcept { return finite_; }
    int max_index() const noexcept { return static_cast<int>(p_.size()) - 1; }
    const std::vector<double>& probabilities() const noexcept { return p_; }

    double pmf(long i) const;
    double cdf(long k) const;
    double mean() const noexcept { return mean_; }
    double moment(int order) const;
    double variance() const;

    bool has_closed_pgf() const noexcept { return static_cast<bool>(pgf_.value); }
    double pgf(double s) const;
    double pgf_deficit(double d) const;
    double pgf_deficit2(double d) const;

    // Inverse-cdf table lookup.
    long sample(RandomStream& rng) const;

private:
    std::vector<double> p_;
    std::vector<double> cum_;
    bool finite_;
    std::string name_;
    Pgf pgf_;
    double mean_ = 0.0;
};

// An SBP weight sequence u_i, i >= -1, nondecreasing with u_i > 0 for i >= 0.
// Everything downstream uses ln u_i and ln(u_(i-1)/u_i) only, so r^i-type
// growth never overflows. u_(-1) = 0 is ln u = -inf.
struct USequence {
    std::function<double(long)> log_u;
    // ln(u_(i-1)/u_i) <= 0 for i >= 0; -inf when u_(i-1) = 0.
    std::function<double(long)> log_ratio;
    std::string name;

    double u(long i) const;

    static USequence power(double lambda);          // (i+1)^lambda
    static USequence geometric(double r);           // r^i, u_(-1) = 1/r
    static USequence geometric_minus(double r);     // r^i - 1/r
    static USequence product(int t);                // (i+1)(i+2)...(i+t)
    // Explicit values u_(-1), u_0, ..., u_n; held constant past the end.
    static USequence from_values(std::vector<double> u_from_minus_one);
};

// v_i = sum_(j >= i) p_j / u_j, i = 0..n+1 (v_(n+1) = 0), by backward accumulation.
std::vector<double> v_sequence(const DiscreteParent& parent, const USequence& u);

// The descendant q_i = v_i (u_i - u_(i-1)) / (1 - u_(-1) v_0) on the parent's support.
// Internally w_i = u_i v_i = p_i + (u_i/u_(i+1)) w_(i+1), so q needs ratios of u only.
class DescendantPmf {
public:
    DescendantPmf(std::shared_ptr<const DiscreteParent> parent, USequence u);

    const DiscreteParent& parent() const noexcept { return *parent_; }
    const USequence& u() const noexcept { return u_; }
    int max_index() const noexcept { return parent_->max_index(); }

    double pmf(long i) const;
    const std::vector<double>& probabilities() const noexcept { return q_; }
    // (F_k + u_k v_(k+1) - u_(-1) v_0) / N.
    double cdf(long k) const;
    // Tail sum over i > k.
    double survival(long k) const;

    // 1 - u_(-1) v_0, in (0, 1]. Accumulated as sum_i w_i (1 - u_(i-1)/u_i), which
    // equals it exactly but stays accurate when u_(-1) v_0 is close to 1.
    double normalizer() const noexcept { return normalizer_; }
    // u_i v_i.
    double scaled_v(long i) const;

    // Reversed-order sums: (mu^(r) - sum_i (sum_(j<i) ((j+1)^r - j^r) u_j) p_i / u_i) / N.
    double mean() const { return moment(1); }
    double moment(int order) const;
    double variance() const;
    double direct_moment(int order) const;

    // Draw K, then the smallest i <= K with u_i > u_(-1) + U (u_K - u_(-1)).
    // K follows the parent when u(-1) = 0 and the tilted weights
    // p_K (1 - u(-1)/u_K) / N otherwise.
    long sample(RandomStream& rng) const;

    // Set when the normalizer is below 1e-6.
    const std::vector<std::string>& warnings() const noexcept { return warnings_; }

private:
    std::shared_ptr<const DiscreteParent> parent_;
    USequence u_;
    std::vector<double> w_;
    std::vector<double> q_;
    std::vector<double> tail_;  // tail_[k] = sum_(i >= k) q_i
    std::vector<double> mixing_cum_;  // empty when u(-1) = 0
    double normalizer_ = 1.0;
    std::vector<std::string> warnings_;
};

// Inverse transform: given q and a decreasing v with v_(n+1) = 0, recover
// p_i = u_i (v_i - v_(i+1)), u_i = u_(-1) + N sum_(j<=i) q_j / v_j, N = 1 - u_(-1) v_0.
// v has one entry per q entry. Throws DomainError if v is not decreasing or positive.
std::vector<double> r_to_l(const std::vector<double>& q, const std::vector<double>& v,
                           double u_minus_one = 0.0);

// The long-tailed lambda form with v_i = (i+1)^-lambda (n infinite):
//   p_i = ((i+1)^-lambda - (i+2)^-lambda) sum_(j<=i) q_j (j+1)^lambda.
// Past the support of q, p_i = ((i+1)^-lambda - (i+2)^-lambda) W exactly, so the
// pmf is held in closed form at every index.
class LambdaLongTail {
public:
    // truncated marks q as cut from an infinite sequence; the weights
    // q_j (j+1)^lambda must then have settled (DivergenceError otherwise).
    LambdaLongTail(std::vector<double> q, double lambda, bool truncated = false);

    double lambda() const noexcept { return lambda_; }
    double pmf(long i) const;
    double cdf(long k) const;
    // sum_(i > k) p_i = sum_(i > k) q_i + u_k v_(k+1).
    double survival(long k) const;

private:
    double increment(long i) const;  // (i+1)^-lambda - (i+2)^-lambda
    std::vector<double> q_;
    std::vector<double> u_;  // u_i = sum_(j<=i) q_j (j+1)^lambda
    std::vector<double> q_tail_;
    double lambda_;
};

// Finite-n lambda form, v_i = (i+1)^-lambda - (n+2)^-lambda with n = q.size() - 1.
std::vector<double> lambda_longtail_finite(const std::vector<double>& q, double lambda);

}  // namespace partsdist
