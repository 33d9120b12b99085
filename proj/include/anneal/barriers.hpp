#pragma once

#include "anneal/potential.hpp"
#include "anneal/torus.hpp"

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <queue>
#include <stdexcept>
#include <vector>

namespace anneal {

enum class Adjacency { axis, full_diagonal };

// Regular grid discretization of a box (or flat torus) used as the path space
// for barrier computations.
struct GridSpec {
    std::vector<double> lo, hi;
    std::vector<int> n;  // nodes per axis, >= 2
    bool periodic = false;
    Adjacency adj = Adjacency::axis;

    GridSpec() = default;
    GridSpec(std::vector<double> lo_, std::vector<double> hi_, std::vector<int> n_,
             bool periodic_ = false)
        : lo(std::move(lo_)), hi(std::move(hi_)), n(std::move(n_)), periodic(periodic_) {
        if (lo.size() != hi.size() || lo.size() != n.size() || lo.empty())
            throw std::invalid_argument("GridSpec: inconsistent axis counts");
        for (std::size_t a = 0; a < n.size(); ++a) {
            if (n[a] < 2) throw std::invalid_argument("GridSpec: need >= 2 nodes per axis");
            if (!(hi[a] > lo[a])) throw std::invalid_argument("GridSpec: need hi > lo");
        }
        // axis+diagonal adjacency in d <= 2, axis-only above
        adj = dim() <= 2 ? Adjacency::full_diagonal : Adjacency::axis;
    }

    int dim() const { return static_cast<int>(n.size()); }

    double spacing(int axis) const {
        return (hi[axis] - lo[axis]) / (periodic ? n[axis] : n[axis] - 1);
    }

    std::int64_t num_nodes() const {
        std::int64_t t = 1;
        for (int v : n) t *= v;
        return t;
    }

    std::vector<int> multi_index(std::int64_t node) const {
        std::vector<int> idx(n.size());
        for (std::size_t a = n.size(); a-- > 0;) {
            idx[a] = static_cast<int>(node % n[a]);
            node /= n[a];
        }
        return idx;
    }

    std::int64_t flat_index(const std::vector<int>& idx) const {
        std::int64_t node = 0;
        for (std::size_t a = 0; a < n.size(); ++a) node = node * n[a] + idx[a];
        return node;
    }

    std::vector<double> coords(std::int64_t node) const {
        auto idx = multi_index(node);
        std::vector<double> x(n.size());
        for (std::size_t a = 0; a < n.size(); ++a) x[a] = lo[a] + idx[a] * spacing(a);
        return x;
    }

    std::vector<std::int64_t> neighbors(std::int64_t node) const {
        auto idx = multi_index(node);
        std::vector<std::int64_t> out;
        const int d = dim();
        std::vector<int> off(d, -1), nb(d);
        // enumerate offsets in {-1,0,1}^d
        while (true) {
            bool all_zero = true, axis_like = true;
            int nonzero = 0;
            for (int a = 0; a < d; ++a) {
                if (off[a] != 0) {
                    all_zero = false;
                    ++nonzero;
                }
            }
            axis_like = nonzero == 1;
            if (!all_zero && (adj == Adjacency::full_diagonal || axis_like)) {
                bool ok = true;
                for (int a = 0; a < d; ++a) {
                    int v = idx[a] + off[a];
                    if (periodic)
                        v = (v + n[a]) % n[a];
                    else if (v < 0 || v >= n[a])
                        ok = false;
                    nb[a] = v;
                }
                if (ok) out.push_back(flat_index(nb));
            }
            int a = d - 1;
            while (a >= 0 && off[a] == 1) off[a--] = -1;
            if (a < 0) break;
            ++off[a];
        }
        return out;
    }

    std::vector<double> sample_values(const Potential& p) const {
        std::vector<double> v(num_nodes());
        for (std::int64_t i = 0; i < num_nodes(); ++i) v[i] = p.value(coords(i));
        return v;
    }
};

struct MergeEvent {
    double level;          // activation level at which the two components connect
    double component_min;  // the larger of the two component minima (absorbed side)
    std::int64_t component_min_node;
    double other_min;  // the smaller minimum; 0 for potentials normalized to min U = 0
    std::int64_t other_min_node;

    double depth() const { return (level - component_min) - other_min; }
};

struct BarrierResult {
    double c_star = 0.0;
    std::int64_t argmax_local_node = -1;   // min node of the shallower side of the argmax merge
    std::int64_t argmax_global_node = -1;  // min node of the deeper side
    double saddle_level = 0.0;
    double global_min_value = 0.0;
    std::vector<MergeEvent> merge_events;
};

// Graph algorithms over explicit adjacency lists; grids build these on demand.
namespace graph {

inline void check_node(std::int64_t v, std::size_t n, const char* what) {
    if (v < 0 || static_cast<std::size_t>(v) >= n)
        throw std::invalid_argument(std::string(what) + ": node out of range");
}

// min over paths a->b of the max node value (widest-path Dijkstra)
inline double minimax_level(const std::vector<double>& values,
                            const std::vector<std::vector<std::int64_t>>& adj,
                            std::int64_t a, std::int64_t b) {
    check_node(a, values.size(), "minimax_level");
    check_node(b, values.size(), "minimax_level");
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> best(values.size(), inf);
    using Item = std::pair<double, std::int64_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    best[a] = values[a];
    pq.emplace(best[a], a);
    while (!pq.empty()) {
        auto [lvl, u] = pq.top();
        pq.pop();
        if (lvl > best[u]) continue;
        if (u == b) return lvl;
        for (std::int64_t v : adj[u]) {
            double cand = std::max(lvl, values[v]);
            if (cand < best[v]) {
                best[v] = cand;
                pq.emplace(cand, v);
            }
        }
    }
    throw std::invalid_argument("minimax_level: nodes are disconnected");
}

inline double energy(const std::vector<double>& values,
                     const std::vector<std::vector<std::int64_t>>& adj,
                     std::int64_t a, std::int64_t b) {
    return minimax_level(values, adj, a, b) - values[a] - values[b];
}

// Sublevel-set union-find sweep computing sup over all node pairs (a, b) of
// energy(a, b) = minimax(a, b) - U(a) - U(b), pairs with a == b included.
// Nodes activate in ascending value order; when two components first connect
// at level l, the best pair across them is (min of A, min of B) with energy
// l - minA - minB, so scanning all union events (plus the self-pair floor
// -min U) covers every pair exactly.
inline BarrierResult c_star(const std::vector<double>& values,
                            const std::vector<std::vector<std::int64_t>>& adj) {
    const std::size_t n = values.size();
    if (n == 0) throw std::invalid_argument("c_star: empty graph");

    std::vector<std::int64_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::int64_t i, std::int64_t j) { return values[i] < values[j]; });

    std::vector<std::int64_t> parent(n, -1);  // -1: inactive
    std::vector<double> comp_min(n);
    std::vector<std::int64_t> comp_min_node(n);

    auto find = [&](std::int64_t v) {
        while (parent[v] != v) {
            parent[v] = parent[parent[v]];
            v = parent[v];
        }
        return v;
    };

    BarrierResult res;
    const std::int64_t gnode = order.front();
    const double gmin = values[gnode];
    res.global_min_value = gmin;
    // self pair at the global minimizer: energy(g, g) = -U(g)
    res.c_star = (gmin - gmin) - gmin;
    res.saddle_level = gmin;
    res.argmax_local_node = gnode;
    res.argmax_global_node = gnode;

    for (std::int64_t i : order) {
        parent[i] = i;
        comp_min[i] = values[i];
        comp_min_node[i] = i;
        const double level = values[i];
        for (std::int64_t j : adj[i]) {
            if (parent[j] < 0) continue;  // not yet activated
            std::int64_t ra = find(i), rb = find(j);
            if (ra == rb) continue;
            // shallower component (larger minimum) is the absorbed side
            std::int64_t sh = comp_min[ra] >= comp_min[rb] ? ra : rb;
            std::int64_t dp = sh == ra ? rb : ra;
            MergeEvent ev{level, comp_min[sh], comp_min_node[sh], comp_min[dp],
                          comp_min_node[dp]};
            double depth = ev.depth();
            res.merge_events.push_back(ev);
            if (depth > res.c_star) {
                res.c_star = depth;
                res.saddle_level = level;
                res.argmax_local_node = ev.component_min_node;
                res.argmax_global_node = ev.other_min_node;
            }
            // union: keep rb as root
            parent[ra] = rb;
            if (comp_min[ra] < comp_min[rb]) {
                comp_min[rb] = comp_min[ra];
                comp_min_node[rb] = comp_min_node[ra];
            }
        }
    }
    return res;
}

} // namespace graph

inline std::vector<std::vector<std::int64_t>> build_adjacency(const GridSpec& g) {
    std::vector<std::vector<std::int64_t>> adj(g.num_nodes());
    for (std::int64_t i = 0; i < g.num_nodes(); ++i) adj[i] = g.neighbors(i);
    return adj;
}

inline double minimax_level(const GridSpec& g, const std::vector<double>& values,
                            std::int64_t a, std::int64_t b) {
    return graph::minimax_level(values, build_adjacency(g), a, b);
}

inline double energy(const GridSpec& g, const std::vector<double>& values, std::int64_t a,
                     std::int64_t b) {
    return graph::energy(values, build_adjacency(g), a, b);
}

inline BarrierResult c_star(const GridSpec& g, const std::vector<double>& values) {
    return graph::c_star(values, build_adjacency(g));
}

// c* of the capped potential on the periodic grid of the torus
inline BarrierResult c_star_torus(const TorusSpec& ts, int resolution) {
    if (resolution < 16) throw std::invalid_argument("c_star_torus: resolution must be >= 16");
    const int d = ts.dim();
    GridSpec g(std::vector<double>(d, -ts.L), std::vector<double>(d, ts.L),
               std::vector<int>(d, resolution), /*periodic=*/true);
    return c_star(g, g.sample_values(ts.capped));
}

} // namespace anneal
