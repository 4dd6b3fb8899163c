#include "partsdist/inference.hpp"

#include "partsdist/discrete_families.hpp"
#include "partsdist/error.hpp"
#include "partsdist/families.hpp"
#include "partsdist/random.hpp"
#include "partsdist/specialfn.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>
#include <sstream>
#include <thread>

namespace partsdist {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kWall = 1e300;  // objective value for rejected points

double safe_eval(const LogLikelihood& f, const std::vector<double>& x) {
    try {
        const double v = f(x);
        return std::isfinite(v) ? v : -kInf;
    } catch (const DomainError&) {
        return -kInf;
    } catch (const ConvergenceError&) {
        return -kInf;
    }
}

double gsl_objective(const gsl_vector* v, void* params) {
    const auto& f = *static_cast<const LogLikelihood*>(params);
    std::vector<double> x(v->size);
    for (std::size_t i = 0; i < v->size; ++i) x[i] = gsl_vector_get(v, i);
    const double l = safe_eval(f, x);
    return std::isfinite(l) ? -l : kWall;
}

struct SimplexRun {
    std::vector<double> x;
    double value;
    int iterations;
    bool converged;
};

SimplexRun run_simplex(const LogLikelihood& f, const std::vector<double>& start, double step,
                       const OptimizerOptions& o) {
    const std::size_t n = start.size();
    gsl_multimin_function fn{&gsl_objective, n, const_cast<LogLikelihood*>(&f)};
    gsl_vector* x = gsl_vector_alloc(n);
    gsl_vector* ss = gsl_vector_alloc(n);
    for (std::size_t i = 0; i < n; ++i) {
        gsl_vector_set(x, i, start[i]);
        gsl_vector_set(ss, i, step * std::max(1.0, std::fabs(start[i])));
    }
    gsl_multimin_fminimizer* s = gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, n);
    gsl_multimin_fminimizer_set(s, &fn, x, ss);
    int it = 0;
    bool converged = false;
    while (it < o.max_iterations) {
        ++it;
        if (gsl_multimin_fminimizer_iterate(s) != GSL_SUCCESS) break;
        if (gsl_multimin_fminimizer_size(s) < o.simplex_size) {
            converged = true;
            break;
        }
    }
    SimplexRun run{std::vector<double>(n), -gsl_multimin_fminimizer_minimum(s), it, converged};
    for (std::size_t i = 0; i < n; ++i) run.x[i] = gsl_vector_get(s->x, i);
    gsl_multimin_fminimizer_free(s);
    gsl_vector_free(ss);
    gsl_vector_free(x);
    return run;
}

struct GslQuiet {
    GslQuiet() : previous(gsl_set_error_handler_off()) {}
    ~GslQuiet() { gsl_set_error_handler(previous); }
    gsl_error_handler_t* previous;
};

std::vector<double> step_h(const std::vector<double>& x, double rel) {
    std::vector<double> h(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) h[i] = rel * std::max(1.0, std::fabs(x[i]));
    return h;
}

void newton_polish(const LogLikelihood& f, Optimum& opt, int steps) {
    const std::size_t n = opt.x.size();
    for (int s = 0; s < steps; ++s) {
        const Eigen::MatrixXd h = numeric_hessian(f, opt.x);
        const Eigen::VectorXd g = numeric_gradient(f, opt.x);
        if (!h.allFinite() || !g.allFinite()) return;
        Eigen::LLT<Eigen::MatrixXd> llt(-h);
        if (llt.info() != Eigen::Success) return;
        const Eigen::VectorXd dx = llt.solve(g);
        bool improved = false;
        for (double t = 1.0; t > 1e-3; t *= 0.5) {
            std::vector<double> y(n);
            for (std::size_t i = 0; i < n; ++i) y[i] = opt.x[i] + t * dx[static_cast<Eigen::Index>(i)];
            const double v = safe_eval(f, y);
            if (v > opt.value) {
                improved = v - opt.value > 1e-13 * (1.0 + std::fabs(opt.value));
                opt.x = std::move(y);
                opt.value = v;
                break;
            }
        }
        if (!improved) return;
    }
}

}  // namespace

Optimum maximize(const LogLikelihood& loglik, std::vector<double> start, const OptimizerOptions& options) {
    Optimum opt;
    opt.x = std::move(start);
    opt.value = safe_eval(loglik, opt.x);
    if (!std::isfinite(opt.value)) throw FitError("log-likelihood is not finite at the starting point");
    if (opt.x.empty()) {
        opt.converged = true;
        return opt;
    }
    GslQuiet quiet;
    double step = options.initial_step;
    for (int restart = 0; restart <= options.max_restarts; ++restart) {
        const SimplexRun run = run_simplex(loglik, opt.x, step, options);
        opt.iterations += run.iterations;
        const double gain = run.value - opt.value;
        if (gain > 0.0) {
            opt.x = run.x;
            opt.value = run.value;
        }
        opt.converged = run.converged;
        if (run.converged && gain < 1e-10) break;
        step = std::max(options.initial_step * 0.1, step * 0.5);
    }
    newton_polish(loglik, opt, options.newton_steps);
    return opt;
}

Eigen::MatrixXd numeric_hessian(const LogLikelihood& loglik, const std::vector<double>& x) {
    const std::size_t n = x.size();
    const std::vector<double> h = step_h(x, 1e-4);
    Eigen::MatrixXd hess(n, n);
    const double f0 = safe_eval(loglik, x);
    auto at = [&](std::size_t i, double di, std::size_t j, double dj) {
        std::vector<double> y = x;
        y[i] += di;
        y[j] += dj;
        return safe_eval(loglik, y);
    };
    for (std::size_t i = 0; i < n; ++i) {
        const auto ii = static_cast<Eigen::Index>(i);
        hess(ii, ii) = (at(i, h[i], i, 0.0) - 2.0 * f0 + at(i, -h[i], i, 0.0)) / (h[i] * h[i]);
        for (std::size_t j = 0; j < i; ++j) {
            const auto jj = static_cast<Eigen::Index>(j);
            const double v = (at(i, h[i], j, h[j]) - at(i, h[i], j, -h[j]) - at(i, -h[i], j, h[j]) +
                              at(i, -h[i], j, -h[j])) /
                             (4.0 * h[i] * h[j]);
            hess(ii, jj) = v;
            hess(jj, ii) = v;
        }
    }
    return hess;
}

Eigen::VectorXd numeric_gradient(const LogLikelihood& loglik, const std::vector<double>& x) {
    const std::vector<double> h = step_h(x, 1e-5);
    Eigen::VectorXd g(static_cast<Eigen::Index>(x.size()));
    for (std::size_t i = 0; i < x.size(); ++i) {
        std::vector<double> up = x, down = x;
        up[i] += h[i];
        down[i] -= h[i];
        g[static_cast<Eigen::Index>(i)] = (safe_eval(loglik, up) - safe_eval(loglik, down)) / (2.0 * h[i]);
    }
    return g;
}

Covariance covariance_from_hessian(const Eigen::MatrixXd& hessian) {
    Covariance c;
    if (hessian.size() == 0 || !hessian.allFinite()) return c;
    const Eigen::MatrixXd info = -0.5 * (hessian + hessian.transpose());
    Eigen::LLT<Eigen::MatrixXd> llt(info);
    if (llt.info() != Eigen::Success) return c;
    c.matrix = llt.solve(Eigen::MatrixXd::Identity(info.rows(), info.cols()));
    c.positive_definite = c.matrix.allFinite();
    if (!c.positive_definite) c.matrix.resize(0, 0);
    return c;
}

const ParameterEstimate& FitResult::parameter(const std::string& name) const {
    for (const auto& p : parameters)
        if (p.name == name) return p;
    throw DomainError("no parameter named " + name);
}

std::map<std::string, double> FitResult::estimates() const {
    std::map<std::string, double> m;
    for (const auto& p : parameters) m[p.name] = p.estimate;
    return m;
}

namespace {

// ---- Generic fit over named parameters ----

enum class Scale { Log, LogMinusOne, Linear };

struct ParamSpec {
    std::string name;
    Scale scale;
    double start;
    bool regression = false;
};

double to_natural(Scale s, double w) {
    switch (s) {
    case Scale::Log: return std::exp(w);
    case Scale::LogMinusOne: return 1.0 + std::exp(w);
    case Scale::Linear: return w;
    }
    return w;
}

double to_working(Scale s, const std::string& name, double v) {
    switch (s) {
    case Scale::Log:
        if (!(v > 0.0) || !std::isfinite(v)) throw DomainError(name + " must be positive and finite");
        return std::log(v);
    case Scale::LogMinusOne:
        if (!(v > 1.0) || !std::isfinite(v)) throw DomainError(name + " must exceed 1");
        return std::log(v - 1.0);
    case Scale::Linear:
        if (!std::isfinite(v)) throw DomainError(name + " must be finite");
        return v;
    }
    return v;
}

double natural_derivative(Scale s, double w) { return s == Scale::Linear ? 1.0 : std::exp(w); }

using NaturalLogLik = std::function<double(const std::vector<double>&)>;

FitResult fit_named(const std::string& model, const std::vector<ParamSpec>& specs, const FitOptions& options,
                    const NaturalLogLik& loglik) {
    for (const auto& [name, value] : options.fixed) {
        (void)value;
        if (std::none_of(specs.begin(), specs.end(), [&](const ParamSpec& p) { return p.name == name; }))
            throw DomainError("model " + model + " has no parameter " + name);
    }
    for (const auto& [name, value] : options.start) {
        (void)value;
        if (std::none_of(specs.begin(), specs.end(), [&](const ParamSpec& p) { return p.name == name; }))
            throw DomainError("model " + model + " has no parameter " + name);
    }
    const std::size_t n = specs.size();
    std::vector<double> natural(n);
    std::vector<bool> fixed(n, false);
    std::vector<std::size_t> free_index;
    std::vector<double> start;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& s = specs[i];
        if (auto it = options.fixed.find(s.name); it != options.fixed.end()) {
            to_working(s.scale, s.name, it->second);  // domain check
            natural[i] = it->second;
            fixed[i] = true;
            continue;
        }
        auto st = options.start.find(s.name);
        const double v = st != options.start.end() ? st->second : s.start;
        free_index.push_back(i);
        start.push_back(to_working(s.scale, s.name, v));
    }
    const LogLikelihood working = [&](const std::vector<double>& w) {
        std::vector<double> nat = natural;
        for (std::size_t k = 0; k < free_index.size(); ++k)
            nat[free_index[k]] = to_natural(specs[free_index[k]].scale, w[k]);
        return loglik(nat);
    };

    const Optimum opt = maximize(working, start, options.optimizer);

    FitResult r;
    r.model = model;
    r.working = opt.x;
    r.log_likelihood = opt.value;
    r.free_parameters = static_cast<int>(free_index.size());
    r.aic = 2.0 * r.free_parameters - 2.0 * r.log_likelihood;
    r.iterations = opt.iterations;
    r.converged = opt.converged;
    if (!opt.converged) r.warnings.push_back("simplex iteration cap reached");

    Covariance cov;
    if (!free_index.empty()) {
        r.gradient_norm = numeric_gradient(working, opt.x).norm();
        if (options.standard_errors) {
            cov = covariance_from_hessian(numeric_hessian(working, opt.x));
            if (!cov.positive_definite) r.warnings.push_back("Hessian not negative definite; standard errors unavailable");
        }
    }
    r.standard_errors_available = cov.positive_definite || free_index.empty();

    std::size_t k = 0;
    for (std::size_t i = 0; i < n; ++i) {
        ParameterEstimate e;
        e.name = specs[i].name;
        e.fixed = fixed[i];
        e.std_error = kNaN;
        e.p_value = kNaN;
        if (fixed[i]) {
            e.estimate = natural[i];
        } else {
            const double w = opt.x[k];
            e.estimate = to_natural(specs[i].scale, w);
            if (cov.positive_definite) {
                const auto kk = static_cast<Eigen::Index>(k);
                e.std_error = natural_derivative(specs[i].scale, w) * std::sqrt(std::max(0.0, cov.matrix(kk, kk)));
                if (specs[i].regression && e.std_error > 0.0)
                    e.p_value = 2.0 * normal_cdf(-std::fabs(e.estimate / e.std_error));
            }
            ++k;
        }
        r.parameters.push_back(e);
    }
    return r;
}

double natural_of(const std::map<std::string, double>& params, const std::string& name) {
    auto it = params.find(name);
    if (it == params.end()) throw DomainError("missing parameter " + name);
    return it->second;
}

// ---- Survival ----

struct SurvivalParams {
    double alpha0;
    double gamma;
    double xi;
    std::vector<double> eta;
};

// l with alpha_i t_i fed to the alpha = 1 law: ln g = ln alpha_i + ln g1(alpha_i t_i).
double survival_loglik(SurvivalFamily family, const SurvivalDataset& data, const SurvivalParams& p) {
    if (!(p.alpha0 > 0.0) || !std::isfinite(p.alpha0)) return -kInf;
    std::unique_ptr<StacyLShift> shifted;
    if (family == SurvivalFamily::ModifiedExponential) {
        shifted = std::make_unique<ModifiedExponential>(1.0);
    } else if (family == SurvivalFamily::ModifiedWeibull) {
        if (!(p.gamma > 0.0) || !(p.xi > 0.0) || !std::isfinite(p.xi)) return -kInf;
        shifted = std::make_unique<StacyLShift>(1.0, 1.0, p.gamma, 1.0 / p.xi - p.gamma + 1.0);
    } else if (family == SurvivalFamily::Weibull && !(p.gamma > 0.0)) {
        return -kInf;
    }
    const double ln_gamma = family == SurvivalFamily::Weibull ? std::log(p.gamma) : 0.0;
    double l = 0.0;
    for (const auto& row : data.rows) {
        double lin = 0.0;
        for (std::size_t j = 0; j < p.eta.size(); ++j) lin += p.eta[j] * row.covariates[j];
        const double ln_alpha = std::log(p.alpha0) + lin;
        const double z = std::exp(ln_alpha) * row.time;
        double term;
        switch (family) {
        case SurvivalFamily::Exponential: term = row.event ? ln_alpha - z : -z; break;
        case SurvivalFamily::Weibull: {
            const double zg = std::pow(z, p.gamma);
            term = row.event ? ln_alpha + ln_gamma + (p.gamma - 1.0) * std::log(z) - zg : -zg;
            break;
        }
        default: term = row.event ? ln_alpha + shifted->log_pdf(z) : shifted->log_survival(z); break;
        }
        if (!std::isfinite(term)) return -kInf;
        l += term;
    }
    return l;
}

SurvivalParams survival_params(SurvivalFamily family, const SurvivalDataset& data,
                               const std::function<double(const std::string&)>& get) {
    SurvivalParams p{get("alpha0"), 1.0, 0.0, {}};
    if (family == SurvivalFamily::Weibull || family == SurvivalFamily::ModifiedWeibull) p.gamma = get("gamma");
    if (family == SurvivalFamily::ModifiedWeibull) p.xi = get("xi");
    for (const auto& c : data.covariate_names) p.eta.push_back(get("eta_" + c));
    return p;
}

// ---- Counts ----

struct CountParams {
    double mu0;
    double alpha;  // 0 for a Poisson parent
    double shape;  // r or lambda; 0 for a plain parent
    std::vector<double> beta;
};

bool is_negbin(CountFamily f) {
    return f == CountFamily::NegBin || f == CountFamily::NegBinR || f == CountFamily::NegBinLambda;
}
bool is_r_class(CountFamily f) { return f == CountFamily::PoissonR || f == CountFamily::NegBinR; }
bool is_lambda_class(CountFamily f) { return f == CountFamily::PoissonLambda || f == CountFamily::NegBinLambda; }

ParentPtr make_parent(double mu, double alpha) {
    return std::make_shared<const DiscreteParent>(alpha > 0.0 ? DiscreteParent::negative_binomial(mu, alpha)
                                                              : DiscreteParent::poisson(mu));
}

double parent_log_pmf(long y, double mu, double alpha) {
    const double yd = static_cast<double>(y);
    if (alpha <= 0.0) return yd == 0.0 ? -mu : -mu + yd * std::log(mu) - std::lgamma(yd + 1.0);
    const double inv = 1.0 / alpha;
    const double am = alpha * mu;
    return std::lgamma(yd + inv) - std::lgamma(inv) - std::lgamma(yd + 1.0) - inv * std::log1p(am) +
           (yd == 0.0 ? 0.0 : yd * (std::log(am) - std::log1p(am)));
}

// ln p_(j+1) - ln p_j.
double parent_log_step(long j, double mu, double alpha) {
    const double jd = static_cast<double>(j);
    if (alpha <= 0.0) return std::log(mu / (jd + 1.0));
    const double am = alpha * mu;
    return std::log((jd + 1.0 / alpha) / (jd + 1.0)) + std::log(am) - std::log1p(am);
}

// ln sum_(j >= y) exp(ln p_j - weight(j)) for a weight that does not decrease with j.
template <class Weight>
double log_tail_sum(long y, double mu, double alpha, Weight weight) {
    double lp = parent_log_pmf(y, mu, alpha);
    double m = lp - weight(y);
    double s = 1.0;
    double prev = m;
    for (long j = y + 1; j < y + 50000000L; ++j) {
        lp += parent_log_step(j - 1, mu, alpha);
        const double t = lp - weight(j);
        if (t > m) {
            s = s * std::exp(m - t) + 1.0;
            m = t;
        } else {
            s += std::exp(t - m);
        }
        if (t < prev && t < m - 40.0) break;
        prev = t;
    }
    return m + std::log(s);
}

PgfAt parent_pgf_at(double mu, double alpha, double d) {
    return alpha > 0.0 ? negbin_pgf_at(mu, alpha, d) : poisson_pgf_at(mu, d);
}

// Solves mean(exp(x)) = target on the log scale: Newton with a numeric slope,
// falling back to bisection inside a maintained bracket.
double invert_mean(double target, double guess, const std::function<double(double)>& mean) {
    if (!(target > 0.0) || !std::isfinite(target)) throw DomainError("target mean must be positive");
    auto g = [&](double x) { return mean(std::exp(x)) - target; };
    double lo = std::log(target), hi = lo;
    double glo = g(lo);
    for (int i = 0; glo > 0.0; ++i) {
        if (i > 200) throw ConvergenceError("mean inversion: no lower bracket", lo, hi, glo);
        hi = lo;
        lo -= std::log(2.0);
        glo = g(lo);
    }
    double ghi = g(hi);
    for (int i = 0; ghi < 0.0; ++i) {
        if (i > 200) throw ConvergenceError("mean inversion: no upper bracket", lo, hi, ghi);
        lo = hi;
        glo = ghi;
        hi += std::log(2.0);
        ghi = g(hi);
    }
    double x = std::clamp(std::log(guess), lo, hi);
    for (int it = 0; it < 200; ++it) {
        const double gx = g(x);
        if (gx == 0.0) return std::exp(x);
        (gx < 0.0 ? lo : hi) = x;
        const double h = 1e-5;
        const double slope = (g(x + h) - g(x - h)) / (2.0 * h);
        double next = x - gx / slope;
        if (!(next > lo && next < hi) || !std::isfinite(next)) next = 0.5 * (lo + hi);
        if (std::fabs(next - x) < 1e-15 * std::max(1.0, std::fabs(x)) || hi - lo < 1e-15 * std::max(1.0, std::fabs(x)))
            return std::exp(next);
        x = next;
    }
    return std::exp(x);
}

double count_loglik(CountFamily family, const CountDataset& data, const CountParams& p) {
    if (!(p.mu0 > 0.0) || !std::isfinite(p.mu0)) return -kInf;
    if (is_negbin(family) && !(p.alpha > 0.0 && std::isfinite(p.alpha))) return -kInf;
    if (is_r_class(family) && !(p.shape > 1.0 && std::isfinite(p.shape))) return -kInf;
    if (is_lambda_class(family) && !(p.shape > 0.0 && std::isfinite(p.shape))) return -kInf;
    const double alpha = is_negbin(family) ? p.alpha : 0.0;

    // Rows sharing a linear predictor share a law, and the sum over the grouped
    // counts is independent of row order.
    std::map<double, std::map<long, long>> groups;
    for (const auto& row : data.rows) {
        double lin = 0.0;
        for (std::size_t j = 0; j < p.beta.size(); ++j) lin += p.beta[j] * row.covariates[j];
        ++groups[lin][row.count];
    }
    double l = 0.0;
    for (const auto& [lin, counts] : groups) {
        const double target = p.mu0 * std::exp(lin);
        if (!(target > 0.0) || !std::isfinite(target)) return -kInf;
        if (is_r_class(family)) {
            const double r = p.shape;
            const double mu = invert_r_class_mean(target, alpha, r);
            const double lr = std::log(r);
            const double delta = -std::expm1(-lr);
            const PgfAt h = parent_pgf_at(mu, alpha, delta);
            const double log_front = std::log(delta) - std::log(h.deficit + delta * h.value);
            for (const auto& [y, n] : counts) {
                // q_y = (delta / N) sum_(j >= y) p_j r^(y - j)
                const double ls = log_tail_sum(y, mu, alpha, [&](long j) { return (j - y) * lr; });
                l += n * (log_front + ls);
            }
        } else if (is_lambda_class(family)) {
            const double lambda = p.shape;
            const double mu = invert_lambda_class_mean(target, alpha, lambda);
            for (const auto& [y, n] : counts) {
                // q_y = ((y+1)^lambda - y^lambda) sum_(j >= y) p_j (j+1)^-lambda
                const double ls = log_tail_sum(y, mu, alpha, [&](long j) { return lambda * std::log(j + 1.0); });
                double front = 0.0;
                if (y > 0) {
                    const double ly1 = lambda * std::log(y + 1.0);
                    front = ly1 + std::log(-std::expm1(lambda * std::log(static_cast<double>(y)) - ly1));
                }
                l += n * (front + ls);
            }
        } else {
            for (const auto& [y, n] : counts) l += n * parent_log_pmf(y, target, alpha);
        }
    }
    return l;
}

CountParams count_params(CountFamily family, const CountDataset& data,
                         const std::function<double(const std::string&)>& get) {
    CountParams p{get("mu0"), 0.0, 0.0, {}};
    if (is_negbin(family)) p.alpha = get("alpha");
    if (is_r_class(family)) p.shape = get("r");
    if (is_lambda_class(family)) p.shape = get("lambda");
    for (const auto& c : data.covariate_names) p.beta.push_back(get("beta_" + c));
    return p;
}

}  // namespace

// ---- Public survival API ----

void SurvivalDataset::validate() const {
    if (rows.empty()) throw DomainError("survival dataset is empty");
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (!(rows[i].time > 0.0) || !std::isfinite(rows[i].time))
            throw DomainError("row " + std::to_string(i + 1) + ": time must be positive");
        if (rows[i].covariates.size() != covariate_names.size())
            throw DomainError("row " + std::to_string(i + 1) + ": wrong number of covariates");
    }
}

SurvivalFamily parse_survival_family(const std::string& id) {
    if (id == "exponential") return SurvivalFamily::Exponential;
    if (id == "weibull") return SurvivalFamily::Weibull;
    if (id == "mod-exponential") return SurvivalFamily::ModifiedExponential;
    if (id == "mod-weibull") return SurvivalFamily::ModifiedWeibull;
    throw DomainError("unknown survival family " + id);
}

std::string to_string(SurvivalFamily family) {
    switch (family) {
    case SurvivalFamily::Exponential: return "exponential";
    case SurvivalFamily::Weibull: return "weibull";
    case SurvivalFamily::ModifiedExponential: return "mod-exponential";
    case SurvivalFamily::ModifiedWeibull: return "mod-weibull";
    }
    return "?";
}

double survival_log_likelihood(SurvivalFamily family, const SurvivalDataset& data,
                               const std::map<std::string, double>& params) {
    data.validate();
    const SurvivalParams p =
        survival_params(family, data, [&](const std::string& name) { return natural_of(params, name); });
    return survival_loglik(family, data, p);
}

FitResult fit_survival(SurvivalFamily family, const SurvivalDataset& data, const FitOptions& options) {
    data.validate();
    FitOptions opts = options;
    std::vector<std::string> notes;
    // xi = 0 is the Weibull limit, outside the log scale of xi.
    if (family == SurvivalFamily::ModifiedWeibull) {
        if (auto it = opts.fixed.find("xi"); it != opts.fixed.end() && it->second == 0.0) {
            opts.fixed.erase(it);
            FitResult r = fit_survival(SurvivalFamily::Weibull, data, opts);
            r.model = "mod-weibull";
            r.parameters.insert(r.parameters.begin() + 2, ParameterEstimate{"xi", 0.0, kNaN, kNaN, true});
            r.flags.push_back("xi fixed at the Weibull limit");
            return r;
        }
    }

    double events = 0.0, total = 0.0;
    for (const auto& row : data.rows) {
        events += row.event ? 1.0 : 0.0;
        total += row.time;
    }
    const double rate = std::max(events, 1.0) / total;

    // The modified Weibull likelihood can hold a second mode near the Weibull limit,
    // so the search starts from the best point of a coarse (gamma, xi) grid, with
    // alpha0 matching the mean k/(k+1) Gamma(1 + 1/gamma)/alpha0 to sum(t)/events.
    if (family == SurvivalFamily::ModifiedWeibull && !opts.start.count("alpha0") && !opts.start.count("gamma") &&
        !opts.start.count("xi")) {
        const bool fix_g = opts.fixed.count("gamma") > 0, fix_x = opts.fixed.count("xi") > 0;
        const std::vector<double> gammas = fix_g ? std::vector<double>{opts.fixed.at("gamma")}
                                                 : std::vector<double>{0.5, 1.0, 1.5, 2.0, 3.0};
        const std::vector<double> xis = fix_x ? std::vector<double>{opts.fixed.at("xi")}
                                              : std::vector<double>{0.1, 0.3, 1.0, 3.0};
        double best = -kInf;
        std::vector<double> eta(data.covariate_names.size(), 0.0);
        for (const auto& [name, v] : opts.fixed)
            for (std::size_t j = 0; j < eta.size(); ++j)
                if (name == "eta_" + data.covariate_names[j]) eta[j] = v;
        for (double g : gammas) {
            for (double x : xis) {
                const double k = 1.0 / x;
                double a0 = rate * std::tgamma(1.0 + 1.0 / g) * k / (k + 1.0);
                if (opts.fixed.count("alpha0")) a0 = opts.fixed.at("alpha0");
                double l = -kInf;
                try {
                    l = survival_loglik(family, data, {a0, g, x, eta});
                } catch (const DomainError&) {
                } catch (const ConvergenceError&) {
                }
                if (l > best) {
                    best = l;
                    if (!opts.fixed.count("alpha0")) opts.start["alpha0"] = a0;
                    if (!fix_g) opts.start["gamma"] = g;
                    if (!fix_x) opts.start["xi"] = x;
                }
            }
        }
    }

    std::vector<ParamSpec> specs{{"alpha0", Scale::Log, rate}};
    if (family == SurvivalFamily::Weibull || family == SurvivalFamily::ModifiedWeibull)
        specs.push_back({"gamma", Scale::Log, 1.0});
    if (family == SurvivalFamily::ModifiedWeibull) specs.push_back({"xi", Scale::Log, 0.5});
    for (const auto& c : data.covariate_names) specs.push_back({"eta_" + c, Scale::Linear, 0.0, true});

    const NaturalLogLik ll = [&](const std::vector<double>& nat) {
        std::size_t k = 0;
        SurvivalParams p{nat[k++], 1.0, 0.0, {}};
        if (family == SurvivalFamily::Weibull || family == SurvivalFamily::ModifiedWeibull) p.gamma = nat[k++];
        if (family == SurvivalFamily::ModifiedWeibull) p.xi = nat[k++];
        p.eta.assign(nat.begin() + static_cast<long>(k), nat.end());
        return survival_loglik(family, data, p);
    };
    FitResult r = fit_named(to_string(family), specs, opts, ll);
    if (events == 0.0) r.warnings.push_back("no observed events");
    return r;
}

// ---- Public count API ----

void CountDataset::validate() const {
    if (rows.empty()) throw DomainError("count dataset is empty");
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].count < 0) throw DomainError("row " + std::to_string(i + 1) + ": count must be nonnegative");
        if (rows[i].covariates.size() != covariate_names.size())
            throw DomainError("row " + std::to_string(i + 1) + ": wrong number of covariates");
    }
}

CountFamily parse_count_family(const std::string& id) {
    if (id == "poisson") return CountFamily::Poisson;
    if (id == "negbin") return CountFamily::NegBin;
    if (id == "poisson-r") return CountFamily::PoissonR;
    if (id == "negbin-r") return CountFamily::NegBinR;
    if (id == "poisson-lambda") return CountFamily::PoissonLambda;
    if (id == "negbin-lambda") return CountFamily::NegBinLambda;
    throw DomainError("unknown count family " + id);
}

std::string to_string(CountFamily family) {
    switch (family) {
    case CountFamily::Poisson: return "poisson";
    case CountFamily::NegBin: return "negbin";
    case CountFamily::PoissonR: return "poisson-r";
    case CountFamily::NegBinR: return "negbin-r";
    case CountFamily::PoissonLambda: return "poisson-lambda";
    case CountFamily::NegBinLambda: return "negbin-lambda";
    }
    return "?";
}

double r_class_family_mean(double mu, double alpha, double r) {
    if (!(r > 1.0)) throw DomainError("r must exceed 1");
    const double delta = -std::expm1(-std::log(r));
    return r_class_mean(parent_pgf_at(mu, alpha, delta), delta);
}

double invert_r_class_mean(double target, double alpha, double r) {
    if (!(r > 1.0)) throw DomainError("r must exceed 1");
    // Large means sit near mu - 1/(r - 1); the r -> 1 limit near 2 mu_g.
    const double guess = target + std::min(target, 1.0 / (r - 1.0));
    return invert_mean(target, guess, [&](double mu) { return r_class_family_mean(mu, alpha, r); });
}

double lambda_class_family_mean(double mu, double alpha, double lambda) {
    return LambdaClassFamily(make_parent(mu, alpha), lambda).mean();
}

double invert_lambda_class_mean(double target, double alpha, double lambda) {
    if (!(lambda > 0.0)) throw DomainError("lambda must be positive");
    return invert_mean(target, target * (1.0 + 1.0 / lambda),
                       [&](double mu) { return lambda_class_family_mean(mu, alpha, lambda); });
}

double count_log_likelihood(CountFamily family, const CountDataset& data, const std::map<std::string, double>& params) {
    data.validate();
    const CountParams p = count_params(family, data, [&](const std::string& name) { return natural_of(params, name); });
    return count_loglik(family, data, p);
}

FitResult fit_counts(CountFamily family, const CountDataset& data, const FitOptions& options) {
    data.validate();
    double mean = 0.0, sq = 0.0;
    for (const auto& row : data.rows) {
        mean += static_cast<double>(row.count);
        sq += static_cast<double>(row.count) * static_cast<double>(row.count);
    }
    const double n = static_cast<double>(data.rows.size());
    mean /= n;
    const double var = sq / n - mean * mean;
    if (!(mean > 0.0)) throw FitError("all counts are zero; the mean link has no finite optimum");

    std::vector<ParamSpec> specs{{"mu0", Scale::Log, mean}};
    if (is_negbin(family)) specs.push_back({"alpha", Scale::Log, std::max(0.1, (var - mean) / (mean * mean))});
    if (is_r_class(family)) specs.push_back({"r", Scale::LogMinusOne, 2.0});
    if (is_lambda_class(family)) specs.push_back({"lambda", Scale::Log, 2.0});
    for (const auto& c : data.covariate_names) specs.push_back({"beta_" + c, Scale::Linear, 0.0, true});

    const NaturalLogLik ll = [&](const std::vector<double>& nat) {
        std::size_t k = 0;
        CountParams p{nat[k++], 0.0, 0.0, {}};
        if (is_negbin(family)) p.alpha = nat[k++];
        if (is_r_class(family) || is_lambda_class(family)) p.shape = nat[k++];
        p.beta.assign(nat.begin() + static_cast<long>(k), nat.end());
        return count_loglik(family, data, p);
    };
    FitResult r = fit_named(to_string(family), specs, options, ll);
    if (is_r_class(family) && !options.fixed.count("r") && r.estimate("r") - 1.0 < 1e-4)
        r.flags.push_back("r at the partial-sum limit r -> 1");
    if (is_lambda_class(family) && !options.fixed.count("lambda") && r.estimate("lambda") > 1e4)
        r.flags.push_back("lambda at the parent limit");
    return r;
}

// ---- Dominance ----

DominanceBase parse_dominance_base(const std::string& id) {
    if (id == "exponential") return DominanceBase::Exponential;
    if (id == "weibull") return DominanceBase::Weibull;
    throw DomainError("dominance test supports the exponential and weibull bases, not " + id);
}

std::string to_string(DominanceBase base) { return base == DominanceBase::Exponential ? "exponential" : "weibull"; }

namespace {

// theta = (ln alpha[, ln gamma]).
DistributionPtr base_law(DominanceBase base, const std::vector<double>& theta) {
    const double alpha = std::exp(theta[0]);
    if (base == DominanceBase::Exponential) return std::make_shared<Exponential>(alpha);
    return std::make_shared<Weibull>(alpha, std::exp(theta[1]));
}

double base_loglik(const ContinuousDistribution& f, const std::vector<double>& x) {
    double l = 0.0;
    for (double v : x) l += f.log_pdf(v);
    return l;
}

// Below this kappa the shifted law is the base to double precision.
constexpr double kKappaFloor = 1e-12;

// l(theta, kappa) for first ~ base, second ~ F^(1/kappa) L-shift of base.
double joint_loglik(DominanceBase base, const std::vector<double>& first, const std::vector<double>& second,
                    const std::vector<double>& theta, double kappa) {
    const DistributionPtr f = base_law(base, theta);
    double l = base_loglik(*f, first);
    if (kappa < kKappaFloor) return l + base_loglik(*f, second);
    const FLambdaFamily g(f, 1.0 / kappa);
    for (double v : second) l += g.log_pdf(v);
    return l;
}

struct NullFit {
    std::vector<double> theta;
    double loglik;
};

NullFit fit_base(DominanceBase base, const std::vector<double>& x, const OptimizerOptions& o) {
    double sum = 0.0;
    for (double v : x) sum += v;
    std::vector<double> theta{std::log(static_cast<double>(x.size()) / sum)};
    if (base == DominanceBase::Weibull) {
        theta.push_back(0.0);
        const LogLikelihood f = [&](const std::vector<double>& t) { return base_loglik(*base_law(base, t), x); };
        const Optimum opt = maximize(f, theta, o);
        return {opt.x, opt.value};
    }
    return {theta, base_loglik(*base_law(base, theta), x)};
}

struct AltFit {
    std::vector<double> theta;
    double kappa;
    double loglik;
};

// kappa = phi^2, from two starting shifts; kappa = 0 unless the shift gains.
AltFit fit_shift(DominanceBase base, const std::vector<double>& first, const std::vector<double>& second,
                 const NullFit& null, const OptimizerOptions& o) {
    const std::size_t nt = null.theta.size();
    const LogLikelihood f = [&](const std::vector<double>& w) {
        const std::vector<double> theta(w.begin(), w.begin() + static_cast<long>(nt));
        return joint_loglik(base, first, second, theta, w[nt] * w[nt]);
    };
    AltFit best{null.theta, 0.0, null.loglik};
    for (double phi : {0.3, 1.0}) {
        std::vector<double> start = null.theta;
        start.push_back(phi);
        const Optimum opt = maximize(f, start, o);
        if (opt.value > best.loglik + 1e-9) {
            best.theta.assign(opt.x.begin(), opt.x.begin() + static_cast<long>(nt));
            best.kappa = opt.x[nt] * opt.x[nt];
            best.loglik = opt.value;
        }
    }
    return best;
}

OrientationResult run_orientation(const std::string& label, DominanceBase base, const std::vector<double>& first,
                                  const std::vector<double>& second, const DominanceOptions& options,
                                  std::uint64_t stream) {
    std::vector<double> pooled = first;
    pooled.insert(pooled.end(), second.begin(), second.end());
    // The pooled fit is the null for every relabelling.
    const NullFit null = fit_base(base, pooled, options.optimizer);
    const AltFit alt = fit_shift(base, first, second, null, options.optimizer);

    OrientationResult r;
    r.label = label;
    r.kappa = alt.kappa;
    for (double t : alt.theta) r.base_parameters.push_back(std::exp(t));
    r.log_likelihood_null = null.loglik;
    r.log_likelihood_alt = std::max(alt.loglik, null.loglik);
    r.lrt_statistic = std::max(0.0, 2.0 * (r.log_likelihood_alt - r.log_likelihood_null));
    r.lrt_p_value = std::erfc(std::sqrt(r.lrt_statistic / 2.0));
    if (options.mode == DominanceMode::Lrt) return r;

    const RandomStream root(options.seed, stream);
    const int n_perm = options.n_perm;
    std::vector<double> kappas(static_cast<std::size_t>(n_perm), kNaN);
    std::atomic<int> next{0};
    auto worker = [&]() {
        for (int k = next++; k < n_perm; k = next++) {
            RandomStream rng = root.split(static_cast<std::uint64_t>(k));
            std::vector<double> perm = pooled;
            std::shuffle(perm.begin(), perm.end(), rng);
            const std::vector<double> a(perm.begin(), perm.begin() + static_cast<long>(first.size()));
            const std::vector<double> b(perm.begin() + static_cast<long>(first.size()), perm.end());
            try {
                kappas[static_cast<std::size_t>(k)] = fit_shift(base, a, b, null, options.optimizer).kappa;
            } catch (const std::runtime_error&) {
                // counted below as a failed permutation
            }
        }
    };
    unsigned threads = options.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : options.threads;
    threads = std::min<unsigned>(threads, static_cast<unsigned>(n_perm));
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    int ge = 0, eq = 0, failed = 0;
    for (double k : kappas) {
        if (std::isnan(k)) {
            ++failed;
        } else if (std::fabs(k - alt.kappa) <= options.tie_tolerance) {
            ++eq;
        } else if (k > alt.kappa) {
            ++ge;
        }
    }
    if (failed > 0.05 * n_perm) {
        std::ostringstream msg;
        msg << label << ": " << failed << " of " << n_perm << " permutation refits failed";
        throw FitError(msg.str());
    }
    const int used = n_perm - failed;
    RandomStream tie_rng = root.split(static_cast<std::uint64_t>(n_perm));
    r.permutations = used;
    r.failed_permutations = failed;
    r.permutation_p_value = (1.0 + ge + eq) / (used + 1.0);
    r.randomized_p_value = (ge + tie_rng.uniform() * (eq + 1.0)) / (used + 1.0);
    return r;
}

}  // namespace

DominanceResult dominance_test(const std::vector<double>& a, const std::vector<double>& b, DominanceBase base,
                               const DominanceOptions& options) {
    if (a.size() < 2 || b.size() < 2) throw DomainError("each sample needs at least two values");
    for (const auto* x : {&a, &b})
        for (double v : *x)
            if (!(v > 0.0) || !std::isfinite(v)) throw DomainError("dominance samples must be positive");
    if (options.mode == DominanceMode::Permutation && options.n_perm < 99)
        throw DomainError("permutation mode needs at least 99 permutations");

    DominanceResult r;
    r.base = base;
    for (double t : fit_base(base, a, options.optimizer).theta) r.fit_a.push_back(std::exp(t));
    for (double t : fit_base(base, b, options.optimizer).theta) r.fit_b.push_back(std::exp(t));
    r.b_below_a = run_orientation("B below A", base, a, b, options, 0);
    if (options.both_orientations) r.a_below_b = run_orientation("A below B", base, b, a, options, 1);
    return r;
}

}  // namespace partsdist
