#pragma once

// Shared fixtures for the test programs: random genomes and sequences, and a
// finite-difference gradient used as an independent reference.

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <type_traits>
#include <vector>

#include "examm/genome.hpp"
#include "examm/network.hpp"

namespace examm::testing {

struct RandomGenomeSpec {
    std::size_t inputs = 2;
    std::size_t outputs = 1;
    std::size_t max_hidden = 5;
    std::vector<CellKind> cells{kAllCellKinds.begin(), kAllCellKinds.end()};
    std::vector<int> skips{1, 5, 10};
    double edge_prob = 0.5;
    double rec_prob = 0.25;
    double disable_prob = 0.0;
};

/// A valid genome with random hidden nodes, edges and recurrent edges, every
/// output wired to at least one input.
template <class Rng>
Genome random_genome(InnovationRegistry& reg, const RandomGenomeSpec& spec, Rng& rng) {
    std::uniform_real_distribution<double> w(-1.0, 1.0);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    Genome g;
    for (std::size_t i = 0; i < spec.inputs; ++i)
        g.add_node({reg.input_node(i), NodeRole::input, CellKind::simple, 0.0, true, static_cast<std::int32_t>(i), {}});
    for (std::size_t j = 0; j < spec.outputs; ++j)
        g.add_node({reg.output_node(j), NodeRole::output, CellKind::simple, 1.0, true, static_cast<std::int32_t>(j),
                    {w(rng)}});
    const std::size_t hidden = std::uniform_int_distribution<std::size_t>(0, spec.max_hidden)(rng);
    for (std::size_t h = 0; h < hidden; ++h) {
        Node n;
        n.innovation = reg.fresh_node();
        n.role = NodeRole::hidden;
        n.cell = spec.cells[std::uniform_int_distribution<std::size_t>(0, spec.cells.size() - 1)(rng)];
        n.depth = 0.05 + 0.9 * u01(rng);
        n.params.resize(param_count(n.cell));
        for (auto& p : n.params) p = w(rng);
        g.add_node(n);
    }
    for (const auto& a : g.nodes)
        for (const auto& b : g.nodes)
            if (a.depth < b.depth && u01(rng) < spec.edge_prob)
                g.add_edge({reg.edge(a.innovation, b.innovation), a.innovation, b.innovation, w(rng),
                            !(u01(rng) < spec.disable_prob)});
    for (std::size_t j = 0; j < spec.outputs; ++j) {
        const auto out = reg.output_node(j);
        const auto in = reg.input_node(std::uniform_int_distribution<std::size_t>(0, spec.inputs - 1)(rng));
        if (!g.has_edge(in, out)) g.add_edge({reg.edge(in, out), in, out, w(rng), true});
        for (auto& e : g.edges)
            if (e.from == in && e.to == out) e.enabled = true;
    }
    for (const auto& a : g.nodes)
        for (const auto& b : g.nodes) {
            if (b.role == NodeRole::input || !(u01(rng) < spec.rec_prob)) continue;
            const int k = spec.skips[std::uniform_int_distribution<std::size_t>(0, spec.skips.size() - 1)(rng)];
            if (g.has_rec_edge(a.innovation, b.innovation, k)) continue;
            g.add_rec_edge({reg.rec_edge(a.innovation, b.innovation, k), a.innovation, b.innovation, k, w(rng),
                            !(u01(rng) < spec.disable_prob)});
        }
    return g;
}

template <class Rng>
SequenceData random_sequence(std::size_t steps, std::size_t n_in, std::size_t n_out, Rng& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    SequenceData d;
    d.name = "random";
    d.steps = steps;
    d.n_in = n_in;
    d.n_out = n_out;
    for (std::size_t i = 0; i < steps * n_in; ++i) d.x.push_back(u(rng));
    for (std::size_t i = 0; i < steps * n_out; ++i) d.y.push_back(u(rng));
    return d;
}

/// Central differences of the network loss around `w`.
inline std::vector<double> numeric_gradient(Network& net, std::vector<double> w, const SequenceData& d,
                                            double eps = 1e-6) {
    std::vector<double> g(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) {
        const double keep = w[i];
        w[i] = keep + eps;
        const double up = net.loss(w, d);
        w[i] = keep - eps;
        const double down = net.loss(w, d);
        w[i] = keep;
        g[i] = (up - down) / (2.0 * eps);
    }
    return g;
}

/// max_i |a_i - b_i| / max(|a_i|, |b_i|, floor). The floor keeps parameters
/// whose gradient is ~0 from being judged on rounding noise alone.
inline double max_relative_error(const std::vector<double>& a, const std::vector<double>& b,
                                 double floor = 1e-6) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double denom = std::max({std::abs(a[i]), std::abs(b[i]), floor});
        worst = std::max(worst, std::abs(a[i] - b[i]) / denom);
    }
    return worst;
}

/// Reachability by Warshall transitive closure over usable edges. Slow and
/// obvious on purpose.
inline ReachableSet closure_reachable(const Genome& g) {
    const std::size_t n = g.nodes.size();
    std::vector<std::vector<char>> r(n, std::vector<char>(n, 0));
    auto idx = [&](Innovation i) { return static_cast<std::size_t>(g.node_index(i)); };
    auto usable = [&](Innovation a, Innovation b, bool en) {
        return en && g.nodes[idx(a)].enabled && g.nodes[idx(b)].enabled;
    };
    for (std::size_t i = 0; i < n; ++i) r[i][i] = g.nodes[i].enabled;
    for (const auto& e : g.edges)
        if (usable(e.from, e.to, e.enabled)) r[idx(e.from)][idx(e.to)] = 1;
    for (const auto& e : g.rec_edges)
        if (usable(e.from, e.to, e.enabled)) r[idx(e.from)][idx(e.to)] = 1;
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                if (r[i][k] && r[k][j]) r[i][j] = 1;
    auto from_input = [&](std::size_t j) {
        for (std::size_t i = 0; i < n; ++i)
            if (g.nodes[i].role == NodeRole::input && r[i][j]) return true;
        return false;
    };
    auto to_output = [&](std::size_t i) {
        for (std::size_t j = 0; j < n; ++j)
            if (g.nodes[j].role == NodeRole::output && r[i][j]) return true;
        return false;
    };
    ReachableSet out;
    for (std::size_t i = 0; i < n; ++i)
        if (from_input(i) && to_output(i)) out.nodes.push_back(g.nodes[i].innovation);
    for (const auto& e : g.edges)
        if (usable(e.from, e.to, e.enabled) && from_input(idx(e.from)) && to_output(idx(e.to)))
            out.edges.push_back(e.innovation);
    for (const auto& e : g.rec_edges)
        if (usable(e.from, e.to, e.enabled) && from_input(idx(e.from)) && to_output(idx(e.to)))
            out.rec_edges.push_back(e.innovation);
    return out;
}

/// Crossover written the slow way: look every innovation up in both parents
/// with a fixed r. Inputs and outputs are always kept.
inline Genome crossover_oracle(const Genome& p1, const Genome& p2, double r) {
    const ReachableSet r1 = closure_reachable(p1), r2 = closure_reachable(p2);
    auto contains = [](const std::vector<Innovation>& v, Innovation x) {
        return std::find(v.begin(), v.end(), x) != v.end();
    };
    auto blend = [&](double a, double b) { return r * (b - a) + a; };
    Genome c;
    c.binding = p1.binding.inputs.empty() ? p2.binding : p1.binding;

    std::map<Innovation, std::pair<const Node*, const Node*>> nodes;
    for (const auto& n : p1.nodes) nodes[n.innovation].first = &n;
    for (const auto& n : p2.nodes) nodes[n.innovation].second = &n;
    for (const auto& [id, pair] : nodes) {
        const Node* a = pair.first;
        const Node* b = pair.second;
        const bool io = (a ? a->role : b->role) != NodeRole::hidden;
        const bool ka = a && (io || contains(r1.nodes, id));
        const bool kb = b && (io || contains(r2.nodes, id));
        if (!ka && !kb) continue;
        Node n = ka ? *a : *b;
        if (ka && kb)
            for (std::size_t k = 0; k < n.params.size(); ++k) n.params[k] = blend(a->params[k], b->params[k]);
        if (n.role == NodeRole::input)
            n.enabled = (a && contains(r1.nodes, id)) || (b && contains(r2.nodes, id)) ||
                        (a ? a->enabled : b->enabled);
        else
            n.enabled = true;
        c.add_node(n);
    }
    auto merge = [&](const auto& l1, const auto& l2, const auto& keep1, const auto& keep2, auto& out) {
        using T = typename std::decay_t<decltype(l1)>::value_type;
        std::map<Innovation, std::pair<const T*, const T*>> all;
        for (const auto& e : l1) all[e.innovation].first = &e;
        for (const auto& e : l2) all[e.innovation].second = &e;
        for (const auto& [id, pair] : all) {
            const bool ka = pair.first && contains(keep1, id);
            const bool kb = pair.second && contains(keep2, id);
            if (!ka && !kb) continue;
            T e = ka ? *pair.first : *pair.second;
            if (ka && kb) e.weight = blend(pair.first->weight, pair.second->weight);
            e.enabled = true;
            out.push_back(e);
        }
    };
    merge(p1.edges, p2.edges, r1.edges, r2.edges, c.edges);
    merge(p1.rec_edges, p2.rec_edges, r1.rec_edges, r2.rec_edges, c.rec_edges);
    return c;
}

}  // namespace examm::testing
