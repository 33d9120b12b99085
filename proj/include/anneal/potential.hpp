#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace anneal {

enum class GrowthClass { confining, bounded_below_quadratic, explosive, exploratory };

inline const char* to_string(GrowthClass g) {
    switch (g) {
        case GrowthClass::confining: return "confining";
        case GrowthClass::bounded_below_quadratic: return "bounded-below-quadratic";
        case GrowthClass::explosive: return "explosive";
        case GrowthClass::exploratory: return "exploratory";
    }
    return "?";
}

// A scalar field with gradient and metadata. Immutable after construction,
// safe to evaluate concurrently.
struct Potential {
    std::string name;
    int dim = 1;
    std::function<double(std::span<const double>)> value;
    std::function<void(std::span<const double>, std::span<double>)> gradient;
    // optional capability
    std::function<double(std::span<const double>)> laplacian;
    std::optional<double> alpha0;
    GrowthClass growth = GrowthClass::confining;
    std::optional<double> known_c_star;
    std::vector<std::vector<double>> known_global_minima;
    // declared L for the U >= -L(1+|x|^2) lower bound, when meaningful
    std::optional<double> quadratic_lower_L;

    bool has_laplacian() const { return static_cast<bool>(laplacian); }

    double value1(double x) const {
        return value(std::span<const double>(&x, 1));
    }
    double gradient1(double x) const {
        double g;
        gradient(std::span<const double>(&x, 1), std::span<double>(&g, 1));
        return g;
    }
};

struct EvalResult {
    double value;
    std::vector<double> gradient;
    std::optional<double> laplacian;
};

inline EvalResult eval_all(const Potential& p, std::span<const double> x) {
    if (static_cast<int>(x.size()) != p.dim)
        throw std::invalid_argument("eval_all: point dimension " + std::to_string(x.size()) +
                                    " != potential dimension " + std::to_string(p.dim));
    EvalResult r;
    r.value = p.value(x);
    r.gradient.resize(p.dim);
    p.gradient(x, r.gradient);
    if (p.has_laplacian()) r.laplacian = p.laplacian(x);
    bool finite = std::isfinite(r.value);
    for (double g : r.gradient) finite = finite && std::isfinite(g);
    if (!finite) {
        std::string msg = "eval_all: non-finite output of '" + p.name + "' at x=(";
        for (std::size_t i = 0; i < x.size(); ++i)
            msg += (i ? "," : "") + std::to_string(x[i]);
        throw std::runtime_error(msg + ")");
    }
    return r;
}

// Max over coordinates of |analytic - central difference| / (1 + |analytic|).
inline double check_gradient(const Potential& p, std::span<const double> x, double h) {
    if (!(h > 0.0)) throw std::invalid_argument("check_gradient: h must be > 0");
    std::vector<double> g(p.dim), xp(x.begin(), x.end());
    p.gradient(x, g);
    double worst = 0.0;
    for (int i = 0; i < p.dim; ++i) {
        xp[i] = x[i] + h;
        double up = p.value(xp);
        xp[i] = x[i] - h;
        double um = p.value(xp);
        xp[i] = x[i];
        if (!std::isfinite(up) || !std::isfinite(um))
            throw std::runtime_error("check_gradient: non-finite evaluation near x");
        double fd = (up - um) / (2.0 * h);
        double err = std::abs(g[i] - fd) / (1.0 + std::abs(g[i]));
        if (err > worst) worst = err;
    }
    return worst;
}

} // namespace anneal
