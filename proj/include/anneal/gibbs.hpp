#pragma once

#include "anneal/potential.hpp"
#include "anneal/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace anneal {

// Integration domain: an axis-aligned box, or the flat torus [-L, L)^d when
// periodic. Quadrature is Simpson on boxes and the trapezoid rule on tori.
struct Domain {
    std::vector<double> lo, hi;
    bool periodic = false;

    int dim() const { return static_cast<int>(lo.size()); }

    double volume() const {
        double v = 1.0;
        for (int a = 0; a < dim(); ++a) v *= hi[a] - lo[a];
        return v;
    }

    static Domain box(std::vector<double> lo, std::vector<double> hi) {
        if (lo.size() != hi.size() || lo.empty())
            throw std::invalid_argument("Domain::box: inconsistent bounds");
        for (std::size_t a = 0; a < lo.size(); ++a)
            if (!(hi[a] > lo[a])) throw std::invalid_argument("Domain::box: need hi > lo");
        return Domain{std::move(lo), std::move(hi), false};
    }

    static Domain torus(double L, int d = 1) {
        if (!(L > 0.0)) throw std::invalid_argument("Domain::torus: L must be > 0");
        Domain dom{std::vector<double>(d, -L), std::vector<double>(d, L), true};
        return dom;
    }
};

namespace detail {

// nodes and weights of the composite rule along one axis
struct AxisRule {
    std::vector<double> x, w;
};

inline AxisRule axis_rule(double lo, double hi, int resolution, bool periodic) {
    if (resolution < 4) throw std::invalid_argument("quadrature: resolution must be >= 4");
    AxisRule r;
    if (periodic) {
        double h = (hi - lo) / resolution;
        r.x.resize(resolution);
        r.w.assign(resolution, h);
        for (int i = 0; i < resolution; ++i) r.x[i] = lo + i * h;
    } else {
        if (resolution % 2) ++resolution;  // Simpson needs an even interval count
        double h = (hi - lo) / resolution;
        r.x.resize(resolution + 1);
        r.w.resize(resolution + 1);
        for (int i = 0; i <= resolution; ++i) {
            r.x[i] = lo + i * h;
            r.w[i] = (i == 0 || i == resolution) ? h / 3.0 : (i % 2 ? 4.0 * h / 3.0 : 2.0 * h / 3.0);
        }
    }
    return r;
}

// pairwise summation for a reproducible, accurate reduction
inline double pairwise_sum(const std::vector<double>& v, std::size_t lo, std::size_t hi) {
    if (hi - lo <= 8) {
        double s = 0.0;
        for (std::size_t i = lo; i < hi; ++i) s += v[i];
        return s;
    }
    std::size_t mid = lo + (hi - lo) / 2;
    return pairwise_sum(v, lo, mid) + pairwise_sum(v, mid, hi);
}

inline double pairwise_sum(const std::vector<double>& v) {
    return v.empty() ? 0.0 : pairwise_sum(v, 0, v.size());
}

} // namespace detail

// Gibbs measure mu_beta = e^{-beta U}/Z_beta restricted to a box or torus,
// represented on its own quadrature grid. The grid density sums to 1 exactly
// because Z is computed by the same rule.
struct GibbsMeasure {
    Potential potential;
    double beta = 1.0;
    Domain domain;
    int resolution = 0;
    double Z = 0.0;
    std::vector<detail::AxisRule> rules;  // per axis
    std::vector<double> u_nodes;          // U at flattened grid nodes
    std::vector<double> weights;          // tensor quadrature weights

    std::size_t num_nodes() const { return u_nodes.size(); }
    double density(std::size_t i) const { return std::exp(-beta * u_nodes[i]) / Z; }
};

namespace detail {

// walk the tensor grid once, handing (coords, weight) to the visitor
template <class F>
void for_each_node(const Domain& dom, const std::vector<AxisRule>& rules, F&& visit) {
    const int d = dom.dim();
    std::vector<std::size_t> idx(d, 0);
    std::vector<double> x(d);
    while (true) {
        double w = 1.0;
        for (int a = 0; a < d; ++a) {
            x[a] = rules[a].x[idx[a]];
            w *= rules[a].w[idx[a]];
        }
        visit(x, w);
        int a = d - 1;
        while (a >= 0 && ++idx[a] == rules[a].x.size()) idx[a--] = 0;
        if (a < 0) break;
    }
}

inline void require_integrable(const Potential& p, const Domain& dom) {
    if (static_cast<int>(dom.lo.size()) != p.dim)
        throw std::invalid_argument("gibbs: domain dimension != potential dimension");
    if (p.growth == GrowthClass::explosive)
        throw std::invalid_argument("gibbs: potential '" + p.name +
                                    "' is not confining; Z over a meaningful domain diverges");
}

} // namespace detail

inline GibbsMeasure make_gibbs(const Potential& p, double beta, const Domain& dom,
                               int resolution) {
    if (!(beta > 0.0)) throw std::invalid_argument("make_gibbs: beta must be > 0");
    detail::require_integrable(p, dom);
    if (dom.dim() > 2)
        throw std::invalid_argument("make_gibbs: deterministic quadrature only in d <= 2, "
                                    "use mc_partition_function");
    GibbsMeasure gm;
    gm.potential = p;
    gm.beta = beta;
    gm.domain = dom;
    gm.resolution = resolution;
    for (int a = 0; a < dom.dim(); ++a)
        gm.rules.push_back(detail::axis_rule(dom.lo[a], dom.hi[a], resolution, dom.periodic));
    std::vector<double> terms;
    detail::for_each_node(dom, gm.rules, [&](const std::vector<double>& x, double w) {
        double u = p.value(x);
        gm.u_nodes.push_back(u);
        gm.weights.push_back(w);
        terms.push_back(w * std::exp(-beta * u));
    });
    gm.Z = detail::pairwise_sum(terms);
    if (!(gm.Z > 0.0) || !std::isfinite(gm.Z))
        throw std::runtime_error("make_gibbs: non-positive partition function");
    return gm;
}

inline double partition_function(const Potential& p, double beta, const Domain& dom,
                                 int resolution = 2000) {
    return make_gibbs(p, beta, dom, resolution).Z;
}

// Monte Carlo fallback for d >= 3: uniform proposals over the box.
struct McEstimate {
    double value;
    double standard_error;
};

inline McEstimate mc_partition_function(const Potential& p, double beta, const Domain& dom,
                                        std::size_t samples, std::uint64_t seed) {
    if (!(beta > 0.0)) throw std::invalid_argument("mc_partition_function: beta must be > 0");
    detail::require_integrable(p, dom);
    if (dom.periodic)
        throw std::invalid_argument("mc_partition_function: box domains only");
    if (samples < 100) throw std::invalid_argument("mc_partition_function: samples < 100");
    CounterRng rng(seed, 0);
    const int d = dom.dim();
    std::vector<double> x(d);
    double sum = 0.0, sum2 = 0.0;
    for (std::size_t k = 0; k < samples; ++k) {
        for (int a = 0; a < d; ++a)
            x[a] = dom.lo[a] + (dom.hi[a] - dom.lo[a]) * rng.next_double();
        double v = std::exp(-beta * p.value(x));
        sum += v;
        sum2 += v * v;
    }
    double n = static_cast<double>(samples);
    double mean = sum / n;
    double var = std::max(0.0, sum2 / n - mean * mean);
    double vol = dom.volume();
    return {vol * mean, vol * std::sqrt(var / n)};
}

namespace detail {

// locate the sign change of U - eps inside [a, b] by bisection
inline double crossing(const Potential& p, double eps, double a, double b) {
    double fa = p.value1(a) - eps;
    for (int it = 0; it < 200; ++it) {
        double m = 0.5 * (a + b);
        double fm = p.value1(m) - eps;
        if ((fa <= 0.0) == (fm <= 0.0)) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
        if (b - a < 1e-14 * (1.0 + std::abs(a))) break;
    }
    return 0.5 * (a + b);
}

// composite Simpson of e^{-beta U} over [a, b]
inline double simpson_exp(const Potential& p, double beta, double a, double b, int segments) {
    if (b <= a) return 0.0;
    if (segments % 2) ++segments;
    segments = std::max(segments, 16);
    double h = (b - a) / segments;
    std::vector<double> terms(segments + 1);
    for (int i = 0; i <= segments; ++i) {
        double w = (i == 0 || i == segments) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        terms[i] = w * std::exp(-beta * p.value1(a + i * h));
    }
    return pairwise_sum(terms) * h / 3.0;
}

} // namespace detail

// mu_beta(U > eps) on the domain. In d = 1 the superlevel set boundary is
// located by bisection so the restricted integral retains smooth-integrand
// accuracy; in d = 2 a plain indicator quadrature is used.
inline double tail_mass(const Potential& p, double beta, double eps, const Domain& dom,
                        int resolution = 2000) {
    if (!(eps > 0.0)) throw std::invalid_argument("tail_mass: eps must be > 0");
    detail::require_integrable(p, dom);
    if (dom.dim() == 1) {
        double lo = dom.lo[0], hi = dom.hi[0];
        int cells = std::max(resolution, 4);
        double h = (hi - lo) / cells;
        // maximal subintervals of {U > eps}
        double Z_terms = partition_function(p, beta, dom, resolution);
        double acc = 0.0;
        double seg_start = 0.0;
        bool inside = p.value1(lo) > eps;
        if (inside) seg_start = lo;
        for (int i = 0; i < cells; ++i) {
            double a = lo + i * h, b = lo + (i + 1) * h;
            bool next_inside = p.value1(b) > eps;
            if (next_inside != inside) {
                double c = detail::crossing(p, eps, a, b);
                if (inside)
                    acc += detail::simpson_exp(p, beta, seg_start, c,
                                               static_cast<int>((c - seg_start) / h) + 16);
                else
                    seg_start = c;
                inside = next_inside;
            }
        }
        if (inside)
            acc += detail::simpson_exp(p, beta, seg_start, hi,
                                       static_cast<int>((hi - seg_start) / h) + 16);
        return acc / Z_terms;
    }
    GibbsMeasure gm = make_gibbs(p, beta, dom, resolution);
    std::vector<double> terms;
    terms.reserve(gm.num_nodes());
    for (std::size_t i = 0; i < gm.num_nodes(); ++i)
        terms.push_back(gm.u_nodes[i] > eps ? gm.weights[i] * std::exp(-beta * gm.u_nodes[i])
                                            : 0.0);
    return detail::pairwise_sum(terms) / gm.Z;
}

// min over betas of Z_beta * (beta+1)^d, an empirical kappa_0 for the
// Z >= kappa_0 (beta+1)^{-d} lower bound
inline double z_lower_bound_fit(const Potential& p, const std::vector<double>& betas,
                                const Domain& dom, int resolution = 2000) {
    if (betas.size() < 4) throw std::invalid_argument("z_lower_bound_fit: need >= 4 betas");
    if (!std::is_sorted(betas.begin(), betas.end()))
        throw std::invalid_argument("z_lower_bound_fit: betas must be increasing");
    const double d = static_cast<double>(dom.dim());
    double kappa = std::numeric_limits<double>::infinity();
    for (double b : betas) {
        double z = partition_function(p, b, dom, resolution);
        if (!(z > 0.0)) throw std::runtime_error("z_lower_bound_fit: non-positive Z");
        kappa = std::min(kappa, z * std::pow(b + 1.0, d));
    }
    return kappa;
}

// chi-square functional: quadrature of f^2 / mu against gm's grid. Nodes where
// the Gibbs density underflows (beta*U > 700) are excluded; they carry no mu
// mass at double precision.
inline double chi_square(const std::vector<double>& fgrid, const GibbsMeasure& gm) {
    if (fgrid.size() != gm.num_nodes())
        throw std::invalid_argument("chi_square: f grid size != measure grid size");
    std::vector<double> terms;
    terms.reserve(fgrid.size());
    for (std::size_t i = 0; i < fgrid.size(); ++i) {
        if (fgrid[i] < 0.0)
            throw std::invalid_argument("chi_square: density must be nonnegative");
        if (gm.beta * gm.u_nodes[i] > 700.0) continue;
        double mu = gm.density(i);
        terms.push_back(gm.weights[i] * fgrid[i] * fgrid[i] / mu);
    }
    return detail::pairwise_sum(terms);
}

// documented truncation boxes capturing all but <= 1e-10 of the Gibbs mass
// for every confining builtin at beta >= 0.5
inline Domain default_domain(const Potential& p) {
    if (p.name == "quadratic_d" || p.name == "oscillating_confining_1d")
        return Domain::box(std::vector<double>(p.dim, -12.0), std::vector<double>(p.dim, 12.0));
    if (p.name == "double_well_1d" || p.name == "tilted_double_well_1d" ||
        p.name == "double_well_2d")
        return Domain::box(std::vector<double>(p.dim, -3.0), std::vector<double>(p.dim, 3.0));
    throw std::invalid_argument("default_domain: no frozen truncation for '" + p.name + "'");
}

} // namespace anneal
