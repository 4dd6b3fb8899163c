#include "partsdist/cli.hpp"

#include "partsdist/discrete_families.hpp"
#include "partsdist/error.hpp"
#include "partsdist/families.hpp"
#include "partsdist/inference.hpp"
#include "partsdist/random.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>

namespace partsdist {

namespace {

using Json = nlohmann::ordered_json;
using Params = std::map<std::string, double>;

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

std::string fmt_full(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

Json number_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, sep)) parts.push_back(cur);
    if (!s.empty() && s.back() == sep) parts.emplace_back();
    return parts;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

// Whole-string number parse; nullopt on trailing junk.
std::optional<double> parse_number(const std::string& text) {
    const std::string s = trim(text);
    if (s.empty()) return std::nullopt;
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) return std::nullopt;
        return v;
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

// ---- Parameter assignments ----

// name=value or name=v1,v2,... (curves only).
struct Assignments {
    Params single;
    std::string list_name;
    std::vector<double> list_values;
};

Assignments parse_assignments(const std::vector<std::string>& fixes, bool allow_list) {
    Assignments a;
    for (const auto& f : fixes) {
        const auto eq = f.find('=');
        if (eq == std::string::npos || eq == 0) throw DomainError("--fix expects name=value, got '" + f + "'");
        const std::string name = trim(f.substr(0, eq));
        std::vector<double> values;
        for (const auto& part : split(f.substr(eq + 1), ',')) {
            const auto v = parse_number(part);
            if (!v) throw DomainError("--fix " + name + ": cannot parse '" + part + "' as a number");
            values.push_back(*v);
        }
        if (values.empty()) throw DomainError("--fix " + name + " has no value");
        if (a.single.count(name) || a.list_name == name) throw DomainError("--fix " + name + " given twice");
        if (values.size() == 1) {
            a.single[name] = values[0];
        } else {
            if (!allow_list) throw DomainError("--fix " + name + ": a list of values is only allowed for curves");
            if (!a.list_name.empty()) throw DomainError("only one --fix parameter may take a list of values");
            a.list_name = name;
            a.list_values = values;
        }
    }
    return a;
}

double need(const Params& p, const std::string& family, const std::string& name) {
    auto it = p.find(name);
    if (it == p.end()) throw DomainError("family " + family + " needs --fix " + name + "=<value>");
    return it->second;
}

void reject_unknown(const Params& p, const std::string& family, const std::vector<std::string>& known) {
    for (const auto& [name, v] : p) {
        (void)v;
        if (std::find(known.begin(), known.end(), name) == known.end())
            throw DomainError("family " + family + " has no parameter " + name);
    }
}

// ---- Family registry for curves and sampling ----

struct ContinuousEntry {
    std::vector<std::string> params;
    std::function<DistributionPtr(const std::string&, const Params&)> make;
};

const std::map<std::string, ContinuousEntry>& continuous_registry() {
    static const std::map<std::string, ContinuousEntry> reg = {
        {"exponential", {{"alpha"}, [](const std::string& f, const Params& p) -> DistributionPtr {
             return std::make_shared<Exponential>(need(p, f, "alpha"));
         }}},
        {"weibull", {{"alpha", "gamma"}, [](const std::string& f, const Params& p) -> DistributionPtr {
             return std::make_shared<Weibull>(need(p, f, "alpha"), need(p, f, "gamma"));
         }}},
        {"stacy", {{"alpha", "beta", "gamma"}, [](const std::string& f, const Params& p) -> DistributionPtr {
             return std::make_shared<Stacy>(need(p, f, "alpha"), need(p, f, "beta"), need(p, f, "gamma"));
         }}},
        {"mod-exponential", {{"alpha"}, [](const std::string& f, const Params& p) -> DistributionPtr {
             return std::make_shared<ModifiedExponential>(need(p, f, "alpha"));
         }}},
        {"mod-weibull", {{"alpha", "gamma", "xi"}, [](const std::string& f, const Params& p) -> DistributionPtr {
             const double alpha = need(p, f, "alpha"), gamma = need(p, f, "gamma"), xi = need(p, f, "xi");
             if (xi == 0.0) return std::make_shared<Weibull>(alpha, gamma);
             if (!(xi > 0.0)) throw DomainError("xi must be nonnegative");
             return std::make_shared<StacyLShift>(alpha, 1.0, gamma, 1.0 / xi - gamma + 1.0);
         }}},
        {"stacy-lshift", {{"alpha", "beta", "gamma", "lambda"}, [](const std::string& f, const Params& p) -> DistributionPtr {
             return std::make_shared<StacyLShift>(need(p, f, "alpha"), need(p, f, "beta"), need(p, f, "gamma"),
                                                  need(p, f, "lambda"));
         }}},
        {"flambda-exponential", {{"alpha", "lambda"}, [](const std::string& f, const Params& p) -> DistributionPtr {
             return std::make_shared<FLambdaFamily>(std::make_shared<Exponential>(need(p, f, "alpha")),
                                                    need(p, f, "lambda"));
         }}},
        {"flambda-weibull", {{"alpha", "gamma", "lambda"}, [](const std::string& f, const Params& p) -> DistributionPtr {
             return std::make_shared<FLambdaFamily>(
                 std::make_shared<Weibull>(need(p, f, "alpha"), need(p, f, "gamma")), need(p, f, "lambda"));
         }}},
        {"explambda-exponential", {{"alpha", "lambda"}, [](const std::string& f, const Params& p) -> DistributionPtr {
             return std::make_shared<ExpLambdaFFamily>(std::make_shared<Exponential>(need(p, f, "alpha")),
                                                       need(p, f, "lambda"));
         }}},
        {"phase-type", {{"lambda"}, [](const std::string& f, const Params& p) -> DistributionPtr {
             return std::make_shared<PhaseTypeExponential>(need(p, f, "lambda"));
         }}},
        {"exp-gamma", {{"lambda"}, [](const std::string& f, const Params& p) -> DistributionPtr {
             return std::make_shared<ExpGammaMixture>(need(p, f, "lambda"));
         }}},
        {"beta-lshift", {{"a", "b", "lambda", "c"}, [](const std::string& f, const Params& p) -> DistributionPtr {
             const double c = p.count("c") ? p.at("c") : 0.0;
             return std::make_shared<BetaLShift>(need(p, f, "a"), need(p, f, "b"), need(p, f, "lambda"), c);
         }}},
        {"skew-normal", {{"lambda", "location", "scale"}, [](const std::string& f, const Params& p) -> DistributionPtr {
             const double loc = p.count("location") ? p.at("location") : 0.0;
             const double scale = p.count("scale") ? p.at("scale") : 1.0;
             return std::make_shared<SkewNormalIBP>(need(p, f, "lambda"), loc, scale);
         }}},
    };
    return reg;
}

// Discrete ids are <parent>[-<class>]: parents poisson(mu), negbin(mu, alpha),
// binomial(n, p); classes r, lambda, rminus, geomtail (r), product (t).
struct DiscreteId {
    std::string parent;
    std::string cls;  // empty for the parent itself
};

std::optional<DiscreteId> parse_discrete_id(const std::string& id) {
    for (const std::string parent : {"poisson", "negbin", "binomial"}) {
        if (id == parent) return DiscreteId{parent, ""};
        if (id.rfind(parent + "-", 0) == 0) {
            const std::string cls = id.substr(parent.size() + 1);
            if (cls == "r" || cls == "lambda" || cls == "rminus" || cls == "geomtail" || cls == "product")
                return DiscreteId{parent, cls};
        }
    }
    return std::nullopt;
}

std::vector<std::string> discrete_params(const DiscreteId& id) {
    std::vector<std::string> names;
    if (id.parent == "poisson") names = {"mu"};
    if (id.parent == "negbin") names = {"mu", "alpha"};
    if (id.parent == "binomial") names = {"n", "p"};
    if (id.cls == "r" || id.cls == "rminus" || id.cls == "geomtail") names.push_back("r");
    if (id.cls == "lambda") names.push_back("lambda");
    if (id.cls == "product") names.push_back("t");
    return names;
}

int integer_param(const Params& p, const std::string& family, const std::string& name) {
    const double v = need(p, family, name);
    if (v != std::floor(v) || std::fabs(v) > 1e9) throw DomainError(name + " must be an integer");
    return static_cast<int>(v);
}

ParentPtr make_discrete_parent(const DiscreteId& id, const std::string& family, const Params& p) {
    if (id.parent == "poisson") return std::make_shared<const DiscreteParent>(DiscreteParent::poisson(need(p, family, "mu")));
    if (id.parent == "negbin")
        return std::make_shared<const DiscreteParent>(
            DiscreteParent::negative_binomial(need(p, family, "mu"), need(p, family, "alpha")));
    return std::make_shared<const DiscreteParent>(
        DiscreteParent::binomial(integer_param(p, family, "n"), need(p, family, "p")));
}

std::shared_ptr<const CountModel> make_count_model(const DiscreteId& id, const std::string& family, const Params& p) {
    ParentPtr parent = make_discrete_parent(id, family, p);
    if (id.cls.empty()) return std::make_shared<ParentModel>(parent);
    if (id.cls == "r") return std::make_shared<RClassFamily>(parent, need(p, family, "r"));
    if (id.cls == "lambda") return std::make_shared<LambdaClassFamily>(parent, need(p, family, "lambda"));
    if (id.cls == "rminus") return std::make_shared<RMinusFamily>(parent, need(p, family, "r"));
    if (id.cls == "geomtail") return std::make_shared<GeometricLongTail>(parent, need(p, family, "r"));
    const int t = integer_param(p, family, "t");
    if (t < 1) throw DomainError("t must be at least 1");
    return std::make_shared<ProductUFamily>(parent, t);
}

std::string unknown_family_message(const std::string& family) {
    std::string msg = "unknown family '" + family + "'; continuous:";
    for (const auto& [name, e] : continuous_registry()) {
        (void)e;
        msg += " " + name;
    }
    return msg + "; discrete: poisson|negbin|binomial[-r|-lambda|-rminus|-geomtail|-product]";
}

// ---- Output plumbing ----

struct Output {
    std::ofstream file;
    std::ostream* stream;
    Output(const std::string& path, std::ostream& fallback) : stream(&fallback) {
        if (path.empty() || path == "-") return;
        file.open(path);
        if (!file) throw DataError("cannot write " + path);
        stream = &file;
    }
    std::ostream& operator*() { return *stream; }
};

// ---- Grid ----

struct Grid {
    double min, max;
    int points;
};

Grid parse_grid(const std::string& spec, bool discrete) {
    const auto parts = split(spec, ':');
    if (parts.size() != 3 && !(discrete && parts.size() == 2))
        throw DomainError("--grid expects min:max:points" + std::string(discrete ? " or min:max" : ""));
    const auto lo = parse_number(parts[0]), hi = parse_number(parts[1]);
    if (!lo || !hi) throw DomainError("--grid bounds must be numbers");
    Grid g{*lo, *hi, 0};
    if (parts.size() == 3) {
        const auto n = parse_number(parts[2]);
        if (!n || *n != std::floor(*n)) throw DomainError("--grid points must be an integer");
        if (*n < 2) throw DomainError("--grid needs at least 2 points");
        g.points = static_cast<int>(*n);
    }
    if (!(g.min < g.max)) throw DomainError("--grid needs min < max");
    if (discrete) {
        if (g.min != std::floor(g.min) || g.max != std::floor(g.max) || g.min < 0)
            throw DomainError("--grid bounds of a discrete curve must be nonnegative integers");
        if (g.points == 0) g.points = static_cast<int>(g.max - g.min) + 1;
    }
    return g;
}

// ---- Commands ----

struct Config {
    std::string family;
    std::vector<std::string> data;
    std::string time_col, event_col, count_col, covariates;
    std::vector<std::string> fix;
    std::string grid;
    std::uint64_t seed = 1;
    std::string out;
    long n = 1000;
    int n_perm = 199;
    std::string mode = "permutation";
    std::string format = "text";
    unsigned threads = 1;
    bool one_sided = false;
};

int cmd_curve(const Config& c, std::ostream& out) {
    const Assignments a = parse_assignments(c.fix, true);
    std::vector<Params> settings;
    std::vector<std::string> suffixes;
    if (a.list_name.empty()) {
        settings.push_back(a.single);
        suffixes.emplace_back();
    } else {
        for (double v : a.list_values) {
            Params p = a.single;
            p[a.list_name] = v;
            settings.push_back(p);
            suffixes.push_back("[" + a.list_name + "=" + fmt(v) + "]");
        }
    }
    if (c.grid.empty()) throw DomainError("curve needs --grid");

    if (auto it = continuous_registry().find(c.family); it != continuous_registry().end()) {
        const Grid g = parse_grid(c.grid, false);
        std::vector<DistributionPtr> laws;
        for (const auto& p : settings) {
            reject_unknown(p, c.family, it->second.params);
            laws.push_back(it->second.make(c.family, p));
        }
        Output o(c.out, out);
        *o << "x";
        for (const auto& s : suffixes) *o << "\tpdf" << s << "\tcdf" << s << "\tsurvival" << s << "\thazard" << s;
        *o << "\n";
        for (int k = 0; k < g.points; ++k) {
            const double x = k == g.points - 1 ? g.max : g.min + (g.max - g.min) * k / (g.points - 1.0);
            *o << fmt(x);
            for (const auto& law : laws) {
                const double pdf = law->pdf(x);
                const double sf = law->survival(x);
                const double cdf = law->cdf(x);
                const double hz = sf > 1e-12 ? pdf / sf : NAN;
                *o << "\t" << fmt(pdf) << "\t" << fmt(cdf) << "\t" << fmt(sf) << "\t" << fmt(hz);
            }
            *o << "\n";
        }
        return kExitOk;
    }

    const auto id = parse_discrete_id(c.family);
    if (!id) throw DomainError(unknown_family_message(c.family));
    const Grid g = parse_grid(c.grid, true);
    std::vector<std::shared_ptr<const CountModel>> laws;
    for (const auto& p : settings) {
        reject_unknown(p, c.family, discrete_params(*id));
        laws.push_back(make_count_model(*id, c.family, p));
    }
    std::shared_ptr<const CountModel> parent;
    if (!id->cls.empty()) parent = std::make_shared<ParentModel>(make_discrete_parent(*id, c.family, settings[0]));
    // A list over a parent parameter would give one parent per column; only the
    // class parameter may vary alongside a parent column.
    if (parent && !a.list_name.empty() && a.list_name != discrete_params(*id).back()) parent.reset();

    Output o(c.out, out);
    *o << "i";
    if (parent) *o << "\tparent_pmf";
    for (const auto& s : suffixes) *o << "\tpmf" << s << "\tcdf" << s << "\tsurvival" << s << "\thazard" << s;
    *o << "\n";
    long last = -1;
    for (int k = 0; k < g.points; ++k) {
        const long i = std::lround(g.min + (g.max - g.min) * k / (g.points - 1.0));
        if (i == last) continue;
        last = i;
        *o << i;
        if (parent) *o << "\t" << fmt(parent->pmf(i));
        for (const auto& law : laws) {
            const double pmf = law->pmf(i);
            const double sf = law->survival(i);
            const double cdf = law->cdf(i);
            // P(X = i | X >= i)
            const double at_risk = pmf + sf;
            const double hz = at_risk > 1e-12 ? pmf / at_risk : NAN;
            *o << "\t" << fmt(pmf) << "\t" << fmt(cdf) << "\t" << fmt(sf) << "\t" << fmt(hz);
        }
        *o << "\n";
    }
    return kExitOk;
}

int cmd_sample(const Config& c, std::ostream& out) {
    const Assignments a = parse_assignments(c.fix, false);
    if (c.n < 1) throw DomainError("--n must be at least 1");
    RandomStream rng(c.seed);
    if (auto it = continuous_registry().find(c.family); it != continuous_registry().end()) {
        reject_unknown(a.single, c.family, it->second.params);
        const DistributionPtr law = it->second.make(c.family, a.single);
        Output o(c.out, out);
        for (long k = 0; k < c.n; ++k) *o << fmt_full(law->sample(rng)) << "\n";
        return kExitOk;
    }
    const auto id = parse_discrete_id(c.family);
    if (!id) throw DomainError(unknown_family_message(c.family));
    reject_unknown(a.single, c.family, discrete_params(*id));
    const auto law = make_count_model(*id, c.family, a.single);
    Output o(c.out, out);
    for (long k = 0; k < c.n; ++k) *o << law->sample(rng) << "\n";
    return kExitOk;
}

std::vector<std::string> covariate_list(const std::string& spec) {
    std::vector<std::string> names;
    if (trim(spec).empty()) return names;
    for (const auto& s : split(spec, ',')) {
        const std::string t = trim(s);
        if (t.empty()) throw DomainError("--covariates has an empty name");
        names.push_back(t);
    }
    return names;
}

double csv_number(const CsvTable& t, std::size_t row, std::size_t col, const std::string& source) {
    const auto v = parse_number(t.rows[row][col]);
    if (!v || !std::isfinite(*v))
        throw DataError(source + ":" + std::to_string(row + 2) + ": column '" + t.header[col] + "': cannot parse '" +
                        t.rows[row][col] + "' as a number");
    return *v;
}

Json fit_json(const FitResult& r, std::size_t n, std::optional<std::size_t> events, const std::string& data) {
    Json j;
    j["command"] = "fit";
    j["model"] = r.model;
    j["data"] = data;
    j["observations"] = n;
    if (events) j["events"] = *events;
    Json params = Json::array();
    for (const auto& p : r.parameters) {
        params.push_back({{"name", p.name},
                          {"estimate", number_or_null(p.estimate)},
                          {"std_error", number_or_null(p.std_error)},
                          {"p_value", number_or_null(p.p_value)},
                          {"fixed", p.fixed}});
    }
    j["parameters"] = params;
    j["log_likelihood"] = r.log_likelihood;
    j["minus_log_likelihood"] = -r.log_likelihood;
    j["aic"] = r.aic;
    j["free_parameters"] = r.free_parameters;
    j["converged"] = r.converged;
    j["iterations"] = r.iterations;
    j["gradient_norm"] = r.gradient_norm;
    j["standard_errors_available"] = r.standard_errors_available;
    j["flags"] = r.flags;
    j["warnings"] = r.warnings;
    return j;
}

void write_fit_text(std::ostream& o, const Json& j) {
    o << "# partsdist fit report\n";
    o << "model\t" << j["model"].get<std::string>() << "\n";
    o << "data\t" << j["data"].get<std::string>() << "\n";
    o << "observations\t" << j["observations"].get<std::size_t>() << "\n";
    if (j.contains("events")) o << "events\t" << j["events"].get<std::size_t>() << "\n";
    o << "log_likelihood\t" << fmt(j["log_likelihood"].get<double>()) << "\n";
    o << "minus_log_likelihood\t" << fmt(j["minus_log_likelihood"].get<double>()) << "\n";
    o << "aic\t" << fmt(j["aic"].get<double>()) << "\n";
    o << "free_parameters\t" << j["free_parameters"].get<int>() << "\n";
    o << "converged\t" << (j["converged"].get<bool>() ? "yes" : "no") << "\n";
    o << "iterations\t" << j["iterations"].get<int>() << "\n";
    o << "gradient_norm\t" << fmt(j["gradient_norm"].get<double>()) << "\n";
    o << "standard_errors_available\t" << (j["standard_errors_available"].get<bool>() ? "yes" : "no") << "\n";
    for (const auto& f : j["flags"]) o << "flag\t" << f.get<std::string>() << "\n";
    for (const auto& w : j["warnings"]) o << "warning\t" << w.get<std::string>() << "\n";
    o << "\nparameter\testimate\tstd_error\tp_value\tfixed\n";
    auto cell = [](const Json& v) { return v.is_null() ? std::string("NA") : fmt(v.get<double>()); };
    for (const auto& p : j["parameters"]) {
        o << p["name"].get<std::string>() << "\t" << cell(p["estimate"]) << "\t" << cell(p["std_error"]) << "\t"
          << cell(p["p_value"]) << "\t" << (p["fixed"].get<bool>() ? "yes" : "no") << "\n";
    }
}

void emit(const Json& j, const Config& c, std::ostream& out, const std::function<void(std::ostream&, const Json&)>& text) {
    Output o(c.out, out);
    if (c.format == "json") {
        *o << j.dump(2) << "\n";
    } else {
        text(*o, j);
    }
}

int cmd_fit(const Config& c, std::ostream& out) {
    if (c.data.size() != 1) throw DomainError("fit needs exactly one --data file");
    const std::string& path = c.data[0];
    const Assignments a = parse_assignments(c.fix, false);
    FitOptions options;
    options.fixed = a.single;
    const std::vector<std::string> covs = covariate_list(c.covariates);

    std::optional<SurvivalFamily> sf;
    std::optional<CountFamily> cf;
    try {
        sf = parse_survival_family(c.family);
    } catch (const DomainError&) {
        try {
            cf = parse_count_family(c.family);
        } catch (const DomainError&) {
            throw DomainError("fit: unknown family '" + c.family +
                              "'; survival: exponential weibull mod-exponential mod-weibull; counts: poisson negbin "
                              "poisson-r negbin-r poisson-lambda negbin-lambda");
        }
    }

    const CsvTable t = read_csv(path);
    std::vector<std::size_t> cov_cols;
    for (const auto& name : covs) cov_cols.push_back(t.column(name, path));

    Json report;
    if (sf) {
        if (c.time_col.empty()) throw DomainError("survival fits need --time-col");
        const std::size_t tc = t.column(c.time_col, path);
        const std::optional<std::size_t> ec =
            c.event_col.empty() ? std::nullopt : std::optional<std::size_t>(t.column(c.event_col, path));
        SurvivalDataset d;
        d.covariate_names = covs;
        std::size_t events = 0;
        for (std::size_t i = 0; i < t.rows.size(); ++i) {
            SurvivalRow row;
            row.time = csv_number(t, i, tc, path);
            if (!(row.time > 0.0))
                throw DataError(path + ":" + std::to_string(i + 2) + ": column '" + c.time_col + "': time must be positive");
            if (ec) {
                const double e = csv_number(t, i, *ec, path);
                if (e != 0.0 && e != 1.0)
                    throw DataError(path + ":" + std::to_string(i + 2) + ": column '" + c.event_col + "': event must be 0 or 1");
                row.event = e == 1.0;
            }
            events += row.event ? 1 : 0;
            for (std::size_t k : cov_cols) row.covariates.push_back(csv_number(t, i, k, path));
            d.rows.push_back(std::move(row));
        }
        if (d.rows.empty()) throw DataError(path + ": no data rows");
        report = fit_json(fit_survival(*sf, d, options), d.rows.size(), events, path);
    } else {
        if (c.count_col.empty()) throw DomainError("count fits need --count-col");
        const std::size_t cc = t.column(c.count_col, path);
        CountDataset d;
        d.covariate_names = covs;
        for (std::size_t i = 0; i < t.rows.size(); ++i) {
            CountRow row;
            const double y = csv_number(t, i, cc, path);
            if (y < 0.0 || y != std::floor(y))
                throw DataError(path + ":" + std::to_string(i + 2) + ": column '" + c.count_col +
                                "': count must be a nonnegative integer");
            row.count = static_cast<long>(y);
            for (std::size_t k : cov_cols) row.covariates.push_back(csv_number(t, i, k, path));
            d.rows.push_back(std::move(row));
        }
        if (d.rows.empty()) throw DataError(path + ": no data rows");
        report = fit_json(fit_counts(*cf, d, options), d.rows.size(), std::nullopt, path);
    }
    emit(report, c, out, write_fit_text);
    return kExitOk;
}

std::vector<double> read_values(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot read " + path);
    std::vector<double> v;
    std::string line;
    for (long n = 1; std::getline(in, line); ++n) {
        const std::string s = trim(line);
        if (s.empty() || s[0] == '#') continue;
        const auto x = parse_number(s);
        if (!x) throw DataError(path + ":" + std::to_string(n) + ": cannot parse '" + s + "' as a number");
        v.push_back(*x);
    }
    return v;
}

Json orientation_json(const OrientationResult& r, bool permutation) {
    Json j;
    j["orientation"] = r.label;
    j["kappa"] = r.kappa;
    j["lambda"] = r.kappa > 0.0 ? Json(1.0 / r.kappa) : Json(nullptr);
    j["base_parameters"] = r.base_parameters;
    j["log_likelihood_null"] = r.log_likelihood_null;
    j["log_likelihood_alt"] = r.log_likelihood_alt;
    j["lrt_statistic"] = r.lrt_statistic;
    j["lrt_p_value"] = r.lrt_p_value;
    if (permutation) {
        j["permutation_p_value"] = r.permutation_p_value;
        j["randomized_p_value"] = r.randomized_p_value;
        j["permutations"] = r.permutations;
        j["failed_permutations"] = r.failed_permutations;
    }
    return j;
}

void write_dominance_text(std::ostream& o, const Json& j) {
    o << "# partsdist dominance report\n";
    o << "base\t" << j["base"].get<std::string>() << "\n";
    o << "mode\t" << j["mode"].get<std::string>() << "\n";
    o << "sample_a\t" << j["sample_a"].get<std::string>() << "\t" << j["n_a"].get<std::size_t>() << "\n";
    o << "sample_b\t" << j["sample_b"].get<std::string>() << "\t" << j["n_b"].get<std::size_t>() << "\n";
    auto list = [](const Json& v) {
        std::string s;
        for (const auto& x : v) s += (s.empty() ? "" : ",") + fmt(x.get<double>());
        return s;
    };
    o << "fit_a\t" << list(j["fit_a"]) << "\n";
    o << "fit_b\t" << list(j["fit_b"]) << "\n";
    for (const auto& r : j["orientations"]) {
        o << "\norientation\t" << r["orientation"].get<std::string>() << "\n";
        o << "kappa\t" << fmt(r["kappa"].get<double>()) << "\n";
        o << "base_parameters\t" << list(r["base_parameters"]) << "\n";
        o << "log_likelihood_null\t" << fmt(r["log_likelihood_null"].get<double>()) << "\n";
        o << "log_likelihood_alt\t" << fmt(r["log_likelihood_alt"].get<double>()) << "\n";
        o << "lrt_statistic\t" << fmt(r["lrt_statistic"].get<double>()) << "\n";
        o << "lrt_p_value\t" << fmt(r["lrt_p_value"].get<double>()) << "\n";
        if (r.contains("permutation_p_value")) {
            o << "permutation_p_value\t" << fmt(r["permutation_p_value"].get<double>()) << "\n";
            o << "randomized_p_value\t" << fmt(r["randomized_p_value"].get<double>()) << "\n";
            o << "permutations\t" << r["permutations"].get<int>() << "\n";
            o << "failed_permutations\t" << r["failed_permutations"].get<int>() << "\n";
        }
    }
}

int cmd_dominance(const Config& c, std::ostream& out) {
    if (c.data.size() != 2) throw DomainError("dominance needs two --data files (sample A, then sample B)");
    DominanceOptions o;
    if (c.mode == "lrt") {
        o.mode = DominanceMode::Lrt;
    } else if (c.mode == "permutation") {
        o.mode = DominanceMode::Permutation;
        if (c.n_perm < 99) throw DomainError("--n-perm must be at least 99 in permutation mode");
    } else {
        throw DomainError("--mode must be lrt or permutation");
    }
    o.n_perm = c.n_perm;
    o.seed = c.seed;
    o.threads = c.threads;
    o.both_orientations = !c.one_sided;
    const DominanceBase base = parse_dominance_base(c.family.empty() ? "exponential" : c.family);
    if (!c.fix.empty()) throw DomainError("dominance estimates every parameter; --fix is not accepted");
    const std::vector<double> a = read_values(c.data[0]);
    const std::vector<double> b = read_values(c.data[1]);
    const DominanceResult r = dominance_test(a, b, base, o);

    Json j;
    j["command"] = "dominance";
    j["base"] = to_string(base);
    j["mode"] = c.mode;
    j["sample_a"] = c.data[0];
    j["n_a"] = a.size();
    j["sample_b"] = c.data[1];
    j["n_b"] = b.size();
    j["fit_a"] = r.fit_a;
    j["fit_b"] = r.fit_b;
    Json orient = Json::array();
    orient.push_back(orientation_json(r.b_below_a, o.mode == DominanceMode::Permutation));
    if (r.a_below_b) orient.push_back(orientation_json(*r.a_below_b, o.mode == DominanceMode::Permutation));
    j["orientations"] = orient;
    emit(j, c, out, write_dominance_text);
    return kExitOk;
}

}  // namespace

// ---- CSV ----

std::size_t CsvTable::column(const std::string& name, const std::string& source) const {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return i;
    throw DataError(source + ": column '" + name + "' not found");
}

namespace {

std::vector<std::string> csv_fields(const std::string& line, const std::string& where) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false, was_quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char ch = line[i];
        if (quoted) {
            if (ch == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += ch;
            }
        } else if (ch == '"' && trim(cur).empty()) {
            quoted = true;
            was_quoted = true;
            cur.clear();
        } else if (was_quoted && ch != ',') {
            if (ch != ' ' && ch != '\t') throw DataError(where + ": text after a closing quote");
        } else if (ch == ',') {
            fields.push_back(was_quoted ? cur : trim(cur));
            cur.clear();
            was_quoted = false;
        } else {
            cur += ch;
        }
    }
    if (quoted) throw DataError(where + ": unterminated quote");
    fields.push_back(was_quoted ? cur : trim(cur));
    return fields;
}

}  // namespace

CsvTable parse_csv(std::istream& in, const std::string& source) {
    CsvTable t;
    std::string line;
    long n = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++n;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        const std::string where = source + ":" + std::to_string(n);
        auto fields = csv_fields(line, where);
        if (!have_header) {
            t.header = std::move(fields);
            have_header = true;
            continue;
        }
        if (fields.size() != t.header.size())
            throw DataError(where + ": expected " + std::to_string(t.header.size()) + " fields, found " +
                            std::to_string(fields.size()));
        t.rows.push_back(std::move(fields));
    }
    if (!have_header) throw DataError(source + ": missing header row");
    return t;
}

CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot read " + path);
    return parse_csv(in, path);
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"partsdist: integration- and summation-by-parts distribution families"};
    app.require_subcommand(1);
    Config c;

    auto add_common = [&](CLI::App* s) {
        s->add_option("--family", c.family, "Family id")->required();
        s->add_option("--fix", c.fix, "Parameter assignment name=value (repeatable)");
        s->add_option("--out", c.out, "Output path (default stdout)");
        s->add_option("--seed", c.seed, "Random seed");
    };
    CLI::App* fit = app.add_subcommand("fit", "Maximum-likelihood fit to CSV data");
    add_common(fit);
    fit->add_option("--data", c.data, "CSV file with a header row")->required();
    fit->add_option("--time-col", c.time_col, "Survival time column");
    fit->add_option("--event-col", c.event_col, "Event indicator column (1 = event, 0 = censored)");
    fit->add_option("--count-col", c.count_col, "Count column");
    fit->add_option("--covariates", c.covariates, "Comma-separated covariate columns");
    fit->add_option("--format", c.format, "text or json")->check(CLI::IsMember({"text", "json"}));

    CLI::App* curve = app.add_subcommand("curve", "Tabulate pdf/pmf, cdf, survival and hazard");
    add_common(curve);
    curve->add_option("--grid", c.grid, "min:max:points (min:max for discrete families)")->required();

    CLI::App* sample = app.add_subcommand("sample", "Draw random values, one per line");
    add_common(sample);
    sample->add_option("--n", c.n, "Number of draws");

    CLI::App* dom = app.add_subcommand("dominance", "Two-sample stochastic dominance test");
    dom->add_option("--family", c.family, "Base family: exponential or weibull");
    dom->add_option("--fix", c.fix, "Not accepted");
    dom->add_option("--out", c.out, "Output path (default stdout)");
    dom->add_option("--seed", c.seed, "Random seed for permutations");
    dom->add_option("--data", c.data, "Sample A file, then sample B file (one value per line)")->required();
    dom->add_option("--n-perm", c.n_perm, "Number of label permutations (at least 99)");
    dom->add_option("--mode", c.mode, "lrt or permutation");
    dom->add_option("--threads", c.threads, "Worker threads for permutations (0 = all cores)");
    dom->add_flag("--one-sided", c.one_sided, "Test only B below A");
    dom->add_option("--format", c.format, "text or json")->check(CLI::IsMember({"text", "json"}));

    std::vector<std::string> argv_store{"partsdist"};
    argv_store.insert(argv_store.end(), args.begin(), args.end());
    std::vector<const char*> argv;
    for (const auto& s : argv_store) argv.push_back(s.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*fit) return cmd_fit(c, out);
        if (*curve) return cmd_curve(c, out);
        if (*sample) return cmd_sample(c, out);
        return cmd_dominance(c, out);
    } catch (const DomainError& e) {
        err << "partsdist: " << e.what() << "\n";
        return kExitUsage;
    } catch (const DataError& e) {
        err << "partsdist: " << e.what() << "\n";
        return kExitUsage;
    } catch (const UnsupportedError& e) {
        err << "partsdist: unsupported: " << e.what() << "\n";
        return kExitUsage;
    } catch (const FitError& e) {
        err << "partsdist: fit failed: " << e.what() << "\n";
        return kExitFitFailure;
    } catch (const ConvergenceError& e) {
        err << "partsdist: fit failed: " << e.what() << "\n";
        return kExitFitFailure;
    } catch (const DivergenceError& e) {
        err << "partsdist: " << e.what() << "\n";
        return kExitFitFailure;
    }
}

}  // namespace partsdist
