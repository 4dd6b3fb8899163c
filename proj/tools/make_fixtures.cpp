// Writes the synthetic fixtures used by the CLI tests and README examples:
//   survival.csv        modified Weibull, accelerated time in x1 and x2, ~10% censored
//   counts.csv          negative binomial r-class with a mean link in x1 and x2
//   dominance_a.txt     Exp(1)
//   dominance_b.txt     F^1 L-shift of Exp(1)
//   dominance_null.txt  Exp(1), independent of dominance_a.txt
// Usage: make_fixtures <output directory>

#include "partsdist/discrete_families.hpp"
#include "partsdist/families.hpp"
#include "partsdist/inference.hpp"
#include "partsdist/random.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <string>

using namespace partsdist;

namespace {

std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

void write_survival(const std::string& path) {
    const double alpha0 = 0.5, gamma = 1.4, xi = 1.2, eta1 = 0.6, eta2 = -0.3;
    const StacyLShift unit(1.0, 1.0, gamma, 1.0 / xi - gamma + 1.0);
    RandomStream rng(20240601);
    std::ofstream out(path);
    out << "id,time,event,x1,x2\n";
    for (int i = 0; i < 500; ++i) {
        const double x1 = rng.uniform() < 0.5 ? 0.0 : 1.0;
        const double x2 = std::round(100.0 * (4.0 * rng.uniform() - 2.0)) / 100.0;
        const double alpha = alpha0 * std::exp(eta1 * x1 + eta2 * x2);
        const double t = unit.sample(rng) / alpha;
        const double c = -std::log(rng.uniform()) / 0.15;
        out << i + 1 << "," << num(std::min(t, c)) << "," << (t <= c ? 1 : 0) << "," << x1 << "," << num(x2) << "\n";
    }
}

void write_counts(const std::string& path) {
    const double mu0 = 2.0, alpha = 0.5, r = 2.5, beta1 = 0.3, beta2 = -0.5;
    RandomStream rng(20240602);
    std::map<std::pair<int, int>, std::shared_ptr<RClassFamily>> laws;
    std::ofstream out(path);
    out << "id,y,x1,x2\n";
    for (int i = 0; i < 600; ++i) {
        const int x1 = static_cast<int>(std::floor(3.0 * rng.uniform()));
        const int x2 = rng.uniform() < 0.4 ? 1 : 0;
        auto& law = laws[{x1, x2}];
        if (!law) {
            const double target = mu0 * std::exp(beta1 * x1 + beta2 * x2);
            const double mu = invert_r_class_mean(target, alpha, r);
            law = std::make_shared<RClassFamily>(
                std::make_shared<const DiscreteParent>(DiscreteParent::negative_binomial(mu, alpha)), r);
        }
        out << i + 1 << "," << law->sample(rng) << "," << x1 << "," << x2 << "\n";
    }
}

void write_values(const std::string& path, const ContinuousDistribution& law, int n, std::uint64_t seed) {
    RandomStream rng(seed);
    std::ofstream out(path);
    for (int i = 0; i < n; ++i) out << num(law.sample(rng)) << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    if (argc != 2) {
        std::cerr << "usage: make_fixtures <output directory>\n";
        return 2;
    }
    const std::string dir = argv[1];
    write_survival(dir + "/survival.csv");
    write_counts(dir + "/counts.csv");
    const auto base = std::make_shared<Exponential>(1.0);
    write_values(dir + "/dominance_a.txt", *base, 200, 31);
    write_values(dir + "/dominance_b.txt", FLambdaFamily(base, 1.0), 200, 32);
    write_values(dir + "/dominance_null.txt", *base, 200, 33);
    return 0;
}
