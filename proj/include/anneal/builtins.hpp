#pragma once

#include "anneal/potential.hpp"

#include <json.hpp>

#include <cmath>
#include <map>
#include <string>

namespace anneal {

namespace detail {

inline double norm2(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v * v;
    return s;
}

// critical points of x^4 - 2x^2 + delta*x, i.e. roots of 4x^3 - 4x + delta,
// refined by Newton from the untilted critical points
struct TiltedWellShape {
    double x_deep, x_saddle, x_shallow;
    double m;       // min of the raw potential, subtracted so min U = 0
    double c_star;  // U(saddle) - U(shallow well)
};

inline TiltedWellShape tilted_well_shape(double delta) {
    auto raw = [&](double x) { return x * x * x * x - 2.0 * x * x + delta * x; };
    auto newton = [&](double x) {
        for (int it = 0; it < 200; ++it) {
            double f = 4.0 * x * x * x - 4.0 * x + delta;
            double fp = 12.0 * x * x - 4.0;
            double step = f / fp;
            x -= step;
            if (std::abs(step) < 1e-15) break;
        }
        return x;
    };
    TiltedWellShape s;
    s.x_deep = newton(delta > 0 ? -1.0 : 1.0);
    s.x_shallow = newton(delta > 0 ? 1.0 : -1.0);
    s.x_saddle = newton(delta / 8.0);  // near 0 for small tilt
    s.m = std::min(raw(s.x_deep), raw(s.x_shallow));
    s.c_star = raw(s.x_saddle) - std::max(raw(s.x_deep), raw(s.x_shallow));
    return s;
}

} // namespace detail

inline Potential make_quadratic(int d) {
    if (d < 1) throw std::invalid_argument("quadratic_d: d must be >= 1");
    Potential p;
    p.name = "quadratic_d";
    p.dim = d;
    p.value = [](std::span<const double> x) { return 0.5 * detail::norm2(x); };
    p.gradient = [](std::span<const double> x, std::span<double> g) {
        for (std::size_t i = 0; i < x.size(); ++i) g[i] = x[i];
    };
    p.laplacian = [d](std::span<const double>) { return static_cast<double>(d); };
    p.alpha0 = 0.5;
    p.growth = GrowthClass::confining;
    p.known_c_star = 0.0;
    p.known_global_minima = {std::vector<double>(d, 0.0)};
    return p;
}

inline Potential make_double_well_1d() {
    Potential p;
    p.name = "double_well_1d";
    p.dim = 1;
    p.value = [](std::span<const double> x) {
        double s = x[0] * x[0] - 1.0;
        return s * s;
    };
    p.gradient = [](std::span<const double> x, std::span<double> g) {
        g[0] = 4.0 * x[0] * (x[0] * x[0] - 1.0);
    };
    p.laplacian = [](std::span<const double> x) { return 12.0 * x[0] * x[0] - 4.0; };
    p.alpha0 = 0.5;
    p.growth = GrowthClass::confining;
    p.known_c_star = 1.0;  // saddle at 0, U(0)=1, both minima global
    p.known_global_minima = {{-1.0}, {1.0}};
    return p;
}

inline Potential make_tilted_double_well_1d(double delta) {
    if (!(std::abs(delta) > 0.0) || std::abs(delta) >= 1.5)
        throw std::invalid_argument("tilted_double_well_1d: need 0 < |delta| < 1.5");
    auto s = detail::tilted_well_shape(delta);
    Potential p;
    p.name = "tilted_double_well_1d";
    p.dim = 1;
    double m = s.m;
    p.value = [delta, m](std::span<const double> x) {
        double t = x[0];
        return t * t * t * t - 2.0 * t * t + delta * t - m;
    };
    p.gradient = [delta](std::span<const double> x, std::span<double> g) {
        double t = x[0];
        g[0] = 4.0 * t * t * t - 4.0 * t + delta;
    };
    p.laplacian = [](std::span<const double> x) { return 12.0 * x[0] * x[0] - 4.0; };
    p.alpha0 = 0.5;
    p.growth = GrowthClass::confining;
    p.known_c_star = s.c_star;
    p.known_global_minima = {{s.x_deep}};
    return p;
}

inline Potential make_double_well_2d() {
    Potential p;
    p.name = "double_well_2d";
    p.dim = 2;
    p.value = [](std::span<const double> x) {
        double s = x[0] * x[0] - 1.0;
        return s * s + x[1] * x[1];
    };
    p.gradient = [](std::span<const double> x, std::span<double> g) {
        g[0] = 4.0 * x[0] * (x[0] * x[0] - 1.0);
        g[1] = 2.0 * x[1];
    };
    p.laplacian = [](std::span<const double> x) { return 12.0 * x[0] * x[0] - 4.0 + 2.0; };
    p.alpha0 = 0.5;
    p.growth = GrowthClass::confining;
    p.known_c_star = 1.0;
    p.known_global_minima = {{-1.0, 0.0}, {1.0, 0.0}};
    return p;
}

inline Potential make_oscillating_confining_1d() {
    Potential p;
    p.name = "oscillating_confining_1d";
    p.dim = 1;
    p.value = [](std::span<const double> x) {
        return 0.5 * x[0] * x[0] + 1.0 - std::cos(5.0 * x[0]);
    };
    p.gradient = [](std::span<const double> x, std::span<double> g) {
        g[0] = x[0] + 5.0 * std::sin(5.0 * x[0]);
    };
    p.laplacian = [](std::span<const double> x) { return 1.0 + 25.0 * std::cos(5.0 * x[0]); };
    p.alpha0 = 0.5;
    p.growth = GrowthClass::confining;
    p.known_global_minima = {{0.0}};
    return p;
}

// U(x) = -(1+|x|^2)^alpha; the SDE explodes in finite time iff alpha > 1
inline Potential make_explosive_alpha(double alpha, int d = 1) {
    if (!(alpha > 0.0)) throw std::invalid_argument("explosive_alpha: alpha must be > 0");
    if (d < 1) throw std::invalid_argument("explosive_alpha: d must be >= 1");
    Potential p;
    p.name = "explosive_alpha";
    p.dim = d;
    p.value = [alpha](std::span<const double> x) {
        return -std::pow(1.0 + detail::norm2(x), alpha);
    };
    p.gradient = [alpha](std::span<const double> x, std::span<double> g) {
        double f = -2.0 * alpha * std::pow(1.0 + detail::norm2(x), alpha - 1.0);
        for (std::size_t i = 0; i < x.size(); ++i) g[i] = f * x[i];
    };
    p.laplacian = [alpha, d](std::span<const double> x) {
        double r2 = detail::norm2(x);
        return -2.0 * alpha * std::pow(1.0 + r2, alpha - 2.0) *
               (d * (1.0 + r2) + 2.0 * (alpha - 1.0) * r2);
    };
    p.growth = alpha > 1.0 ? GrowthClass::explosive : GrowthClass::bounded_below_quadratic;
    if (alpha <= 1.0) p.quadratic_lower_L = 1.0;
    return p;
}

// U(x) = a * (log log(e^2 + |x|^2) - log 2): smooth everywhere, equals
// a*loglog|x| + const for large |x|, min 0 at the origin
inline Potential make_loglog(double a, int d = 1) {
    if (!(a > 0.0)) throw std::invalid_argument("loglog_d: a must be > 0");
    if (d < 1) throw std::invalid_argument("loglog_d: d must be >= 1");
    const double e2 = std::exp(2.0);
    Potential p;
    p.name = "loglog_d";
    p.dim = d;
    p.value = [a, e2](std::span<const double> x) {
        return a * (std::log(std::log(e2 + detail::norm2(x))) - std::log(2.0));
    };
    p.gradient = [a, e2](std::span<const double> x, std::span<double> g) {
        double s = e2 + detail::norm2(x);
        double f = a * 2.0 / (s * std::log(s));
        for (std::size_t i = 0; i < x.size(); ++i) g[i] = f * x[i];
    };
    p.growth = GrowthClass::exploratory;
    p.known_global_minima = {std::vector<double>(d, 0.0)};
    return p;
}

inline Potential builtin(const std::string& name,
                         const std::map<std::string, double>& params = {}) {
    auto get = [&](const std::string& key, double dflt) {
        auto it = params.find(key);
        return it == params.end() ? dflt : it->second;
    };
    if (name == "quadratic_d") return make_quadratic(static_cast<int>(get("d", 1)));
    if (name == "double_well_1d") return make_double_well_1d();
    if (name == "tilted_double_well_1d") return make_tilted_double_well_1d(get("delta", 0.5));
    if (name == "double_well_2d") return make_double_well_2d();
    if (name == "oscillating_confining_1d") return make_oscillating_confining_1d();
    if (name == "explosive_alpha")
        return make_explosive_alpha(get("alpha", 1.5), static_cast<int>(get("d", 1)));
    if (name == "loglog_d") return make_loglog(get("a", 4.0), static_cast<int>(get("d", 3)));
    throw std::invalid_argument("unknown builtin potential: " + name);
}

// Custom potential from a structured description (no dynamic code loading).
// Supported kinds:
//   {"type":"builtin","name":...,"params":{...}}
//   {"type":"polynomial","coeffs":[c0,c1,...]}            1-D, sum c_k x^k
//   {"type":"separable_polynomial","coeffs_per_axis":[[...],[...]]}
inline Potential potential_from_config(const nlohmann::json& j) {
    std::string type = j.at("type").get<std::string>();
    if (type == "builtin") {
        std::map<std::string, double> params;
        if (j.contains("params"))
            for (auto& [k, v] : j.at("params").items()) params[k] = v.get<double>();
        return builtin(j.at("name").get<std::string>(), params);
    }
    std::vector<std::vector<double>> axes;
    if (type == "polynomial") {
        axes.push_back(j.at("coeffs").get<std::vector<double>>());
    } else if (type == "separable_polynomial") {
        axes = j.at("coeffs_per_axis").get<std::vector<std::vector<double>>>();
    } else {
        throw std::invalid_argument("potential_from_config: unknown type '" + type + "'");
    }
    if (axes.empty()) throw std::invalid_argument("potential_from_config: empty coefficients");
    int d = static_cast<int>(axes.size());
    Potential p;
    p.name = "custom_polynomial";
    p.dim = d;
    p.value = [axes](std::span<const double> x) {
        double s = 0.0;
        for (std::size_t i = 0; i < axes.size(); ++i) {
            double acc = 0.0;
            for (auto it = axes[i].rbegin(); it != axes[i].rend(); ++it) acc = acc * x[i] + *it;
            s += acc;
        }
        return s;
    };
    p.gradient = [axes](std::span<const double> x, std::span<double> g) {
        for (std::size_t i = 0; i < axes.size(); ++i) {
            double acc = 0.0;
            for (std::size_t k = axes[i].size(); k-- > 1;)
                acc = acc * x[i] + static_cast<double>(k) * axes[i][k];
            g[i] = acc;
        }
    };
    p.growth = GrowthClass::exploratory;
    return p;
}

} // namespace anneal
