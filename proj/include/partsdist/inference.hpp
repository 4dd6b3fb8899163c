#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace partsdist {

using LogLikelihood = std::function<double(const std::vector<double>&)>;

struct OptimizerOptions {
    // Per simplex run. The size GSL reports for nmsimplex2 is updated incrementally
    // and can stall above tight tolerances, so runs are short and restarted.
    int max_iterations = 2000;
    double simplex_size = 1e-8;  // characteristic size at which a run stops
    double initial_step = 0.3;
    int max_restarts = 8;
    int newton_steps = 10;
};

struct Optimum {
    std::vector<double> x;
    double value = 0.0;  // maximized log-likelihood
    int iterations = 0;
    bool converged = false;
};

// Maximizes loglik. A Nelder-Mead simplex is restarted at its own optimum until a
// restart gains less than 1e-10, then Newton steps on the central-difference
// Hessian are taken while they increase loglik. Non-finite values act as a wall.
// Throws FitError if loglik is not finite at start.
Optimum maximize(const LogLikelihood& loglik, std::vector<double> start, const OptimizerOptions& options = {});

// Central differences with step h_i = 1e-4 max(1, |x_i|).
Eigen::MatrixXd numeric_hessian(const LogLikelihood& loglik, const std::vector<double>& x);
// Central differences with step h_i = 1e-5 max(1, |x_i|).
Eigen::VectorXd numeric_gradient(const LogLikelihood& loglik, const std::vector<double>& x);

struct Covariance {
    Eigen::MatrixXd matrix;  // (-H)^-1; empty when unavailable
    bool positive_definite = false;
};

// Inverse of minus the Hessian of the log-likelihood, if -H is positive definite.
Covariance covariance_from_hessian(const Eigen::MatrixXd& hessian);

struct ParameterEstimate {
    std::string name;
    double estimate = 0.0;
    double std_error = 0.0;  // NaN when unavailable or the parameter is fixed
    double p_value = 0.0;    // Wald test of zero for regression coefficients, NaN otherwise
    bool fixed = false;
};

struct FitResult {
    std::string model;
    std::vector<ParameterEstimate> parameters;
    std::vector<double> working;  // free optimizer coordinates at the optimum
    double log_likelihood = 0.0;
    double aic = 0.0;  // 2k - 2 l over the free parameters
    int free_parameters = 0;
    int iterations = 0;
    double gradient_norm = 0.0;  // of l in the working coordinates
    bool converged = false;
    bool standard_errors_available = false;
    std::vector<std::string> flags;
    std::vector<std::string> warnings;

    const ParameterEstimate& parameter(const std::string& name) const;
    double estimate(const std::string& name) const { return parameter(name).estimate; }
    std::map<std::string, double> estimates() const;
};

struct FitOptions {
    OptimizerOptions optimizer;
    std::map<std::string, double> fixed;  // natural scale
    std::map<std::string, double> start;  // natural scale
    bool standard_errors = true;
};

// ---- Survival (accelerated time, right censoring) ----

struct SurvivalRow {
    double time = 0.0;
    bool event = true;  // false: right-censored at time
    std::vector<double> covariates;
};

struct SurvivalDataset {
    std::vector<std::string> covariate_names;
    std::vector<SurvivalRow> rows;
    void validate() const;  // DomainError on nonpositive times or ragged covariates
};

// Parameters: alpha0, gamma (weibull, mod-weibull), xi (mod-weibull), eta_<covariate>.
// mod-exponential is mod-weibull with gamma = 1 and xi = 2; mod-weibull is
// StacyLShift(alpha, 1, gamma, 1/xi - gamma + 1), so xi = 0 is the Weibull limit.
enum class SurvivalFamily { Exponential, Weibull, ModifiedExponential, ModifiedWeibull };

SurvivalFamily parse_survival_family(const std::string& id);
std::string to_string(SurvivalFamily family);

// alpha_i = alpha0 exp(eta . x_i); l = sum_events ln g(t_i) + sum_censored ln Gbar(t_i).
FitResult fit_survival(SurvivalFamily family, const SurvivalDataset& data, const FitOptions& options = {});
double survival_log_likelihood(SurvivalFamily family, const SurvivalDataset& data,
                               const std::map<std::string, double>& params);

// ---- Counts (mean link) ----

struct CountRow {
    long count = 0;
    std::vector<double> covariates;
};

struct CountDataset {
    std::vector<std::string> covariate_names;
    std::vector<CountRow> rows;
    void validate() const;
};

// Parameters: mu0, alpha (negbin), r (r-class) or lambda (lambda-class), beta_<covariate>.
// The family mean is mu0 exp(beta . x); the parent mean is recovered by inversion.
enum class CountFamily { Poisson, NegBin, PoissonR, NegBinR, PoissonLambda, NegBinLambda };

CountFamily parse_count_family(const std::string& id);
std::string to_string(CountFamily family);

FitResult fit_counts(CountFamily family, const CountDataset& data, const FitOptions& options = {});
double count_log_likelihood(CountFamily family, const CountDataset& data, const std::map<std::string, double>& params);

// The r-class mean for a Poisson (alpha = 0) or negative binomial parent of mean mu.
double r_class_family_mean(double mu, double alpha, double r);
// Parent mean giving r-class mean target: Newton-Raphson on ln mu, bisection
// whenever a step leaves the bracket.
double invert_r_class_mean(double target, double alpha, double r);
double lambda_class_family_mean(double mu, double alpha, double lambda);
double invert_lambda_class_mean(double target, double alpha, double lambda);

// ---- Two-sample dominance test ----

enum class DominanceBase { Exponential, Weibull };

DominanceBase parse_dominance_base(const std::string& id);
std::string to_string(DominanceBase base);

enum class DominanceMode { Lrt, Permutation };

struct DominanceOptions {
    DominanceMode mode = DominanceMode::Permutation;
    int n_perm = 199;  // at least 99 in permutation mode
    std::uint64_t seed = 1;
    bool both_orientations = true;
    unsigned threads = 1;  // 0 uses the hardware concurrency
    double tie_tolerance = 1e-6;  // on kappa
    OptimizerOptions optimizer;
};

// One orientation: the first sample follows the base law, the second its F^lambda
// L-shift with kappa = 1/lambda >= 0, sharing the base parameters. kappa = 0 is
// no shift, so large kappa says the second sample is stochastically smaller.
struct OrientationResult {
    std::string label;
    double kappa = 0.0;
    std::vector<double> base_parameters;  // alpha (and gamma) under the shifted model
    double log_likelihood_null = 0.0;
    double log_likelihood_alt = 0.0;
    double lrt_statistic = 0.0;  // 2 (l_alt - l_null), clamped at 0
    double lrt_p_value = 1.0;    // chi-squared with one degree of freedom
    // Share of label permutations with kappa* >= kappa, counting the observed
    // labelling: (1 + #{kappa* >= kappa}) / (n_perm + 1). Ties within tie_tolerance.
    double permutation_p_value = 1.0;
    // Ties among the n_perm + 1 labellings broken by an independent uniform.
    double randomized_p_value = 1.0;
    int permutations = 0;
    int failed_permutations = 0;
};

struct DominanceResult {
    DominanceBase base = DominanceBase::Exponential;
    std::vector<double> fit_a;  // base parameters fitted to sample A alone
    std::vector<double> fit_b;
    OrientationResult b_below_a;  // B is the L-shift of A
    std::optional<OrientationResult> a_below_b;
};

DominanceResult dominance_test(const std::vector<double>& a, const std::vector<double>& b, DominanceBase base,
                               const DominanceOptions& options = {});

}  // namespace partsdist
