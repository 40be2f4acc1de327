#pragma once

// Structural mutation operators, crossover, clone and Lamarckian weight
// initialization. Operators never touch their input genome; they work on a
// copy and report whether the child is usable.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "examm/cell.hpp"
#include "examm/genome.hpp"

namespace examm {

enum class OperatorKind : std::uint8_t {
    disable_edge,
    enable_edge,
    split_edge,
    add_edge,
    add_recurrent_edge,
    disable_node,
    enable_node,
    add_node,
    split_node,
    merge_node,
    clone,
    crossover_intra,
    crossover_inter,
};

inline constexpr std::array<OperatorKind, 11> kMutationOperators = {
    OperatorKind::disable_edge, OperatorKind::enable_edge,        OperatorKind::split_edge,
    OperatorKind::add_edge,     OperatorKind::add_recurrent_edge, OperatorKind::disable_node,
    OperatorKind::enable_node,  OperatorKind::add_node,           OperatorKind::split_node,
    OperatorKind::merge_node,   OperatorKind::clone};

inline std::string_view to_string(OperatorKind op) {
    switch (op) {
        case OperatorKind::disable_edge: return "disable_edge";
        case OperatorKind::enable_edge: return "enable_edge";
        case OperatorKind::split_edge: return "split_edge";
        case OperatorKind::add_edge: return "add_edge";
        case OperatorKind::add_recurrent_edge: return "add_recurrent_edge";
        case OperatorKind::disable_node: return "disable_node";
        case OperatorKind::enable_node: return "enable_node";
        case OperatorKind::add_node: return "add_node";
        case OperatorKind::split_node: return "split_node";
        case OperatorKind::merge_node: return "merge_node";
        case OperatorKind::clone: return "clone";
        case OperatorKind::crossover_intra: return "crossover_intra";
        case OperatorKind::crossover_inter: return "crossover_inter";
    }
    return "unknown";
}

inline std::optional<OperatorKind> parse_operator(std::string_view s) {
    for (auto op : kMutationOperators)
        if (to_string(op) == s) return op;
    if (s == "crossover_intra") return OperatorKind::crossover_intra;
    if (s == "crossover_inter") return OperatorKind::crossover_inter;
    return std::nullopt;
}

struct MutationConfig {
    std::vector<CellKind> allowed_cells{CellKind::simple};
    int max_time_skip = kDefaultMaxTimeSkip;
    bool recurrent_edges = true;
    // Relative selection weights, indexed like kMutationOperators. Split edge is
    // off by default; the rest are equally likely.
    std::array<double, kMutationOperators.size()> op_weights{1, 1, 0, 1, 1, 1, 1, 1, 1, 1, 1};
    int mutations_per_child = 1;
    double lstm_forget_bias = 1.0;
    int max_attempts = 20;

    double& weight(OperatorKind op) { return op_weights[static_cast<std::size_t>(op)]; }
    double weight(OperatorKind op) const { return op_weights[static_cast<std::size_t>(op)]; }
};

/// Statistics of a parent genome used to initialise new structure.
struct WeightInitStats {
    double mu = 0.0;
    double sigma2 = 0.0;
    double in_mean = 1.0, in_var = 0.0;
    double out_mean = 1.0, out_var = 0.0;
    double rec_in_mean = 0.0, rec_in_var = 0.0;
    double rec_out_mean = 0.0, rec_out_var = 0.0;
};

namespace detail {

inline void mean_var(const std::vector<double>& xs, double& mean, double& var) {
    if (xs.empty()) return;
    double m = 0.0;
    for (double x : xs) m += x;
    m /= static_cast<double>(xs.size());
    double v = 0.0;
    for (double x : xs) v += (x - m) * (x - m);
    mean = m;
    var = v / static_cast<double>(xs.size());
}

template <class Rng>
std::size_t pick(std::size_t n, Rng& rng) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

template <class Rng>
double normal_draw(double mean, double var, Rng& rng) {
    if (!(var > 0.0)) return mean;
    return std::normal_distribution<double>(mean, std::sqrt(var))(rng);
}

}  // namespace detail

/// Mean and variance of the enabled edge weights plus per-node edge-count
/// statistics over the enabled nodes of `g`.
inline WeightInitStats compute_stats(const Genome& g) {
    WeightInitStats s;
    std::vector<double> weights;
    for (const auto& e : g.edges)
        if (e.enabled) weights.push_back(e.weight);
    for (const auto& e : g.rec_edges)
        if (e.enabled) weights.push_back(e.weight);
    detail::mean_var(weights, s.mu, s.sigma2);

    std::vector<double> ins, outs, rins, routs;
    for (const auto& n : g.nodes) {
        if (!n.enabled) continue;
        double in = 0, out = 0, rin = 0, rout = 0;
        for (const auto& e : g.edges) {
            if (!e.enabled) continue;
            if (e.to == n.innovation) ++in;
            if (e.from == n.innovation) ++out;
        }
        for (const auto& e : g.rec_edges) {
            if (!e.enabled) continue;
            if (e.to == n.innovation) ++rin;
            if (e.from == n.innovation) ++rout;
        }
        if (n.role != NodeRole::input) {
            ins.push_back(in);
            rins.push_back(rin);
        }
        if (n.role != NodeRole::output) outs.push_back(out);
        routs.push_back(rout);
    }
    detail::mean_var(ins, s.in_mean, s.in_var);
    detail::mean_var(outs, s.out_mean, s.out_var);
    detail::mean_var(rins, s.rec_in_mean, s.rec_in_var);
    detail::mean_var(routs, s.rec_out_mean, s.rec_out_var);
    return s;
}

/// p = n_re / (n_ff + n_re) over enabled edges; 0 when there are none.
inline double recurrent_probability(const Genome& g) {
    const double n_ff = static_cast<double>(g.enabled_edge_count());
    const double n_re = static_cast<double>(g.enabled_rec_edge_count());
    if (n_ff + n_re == 0.0) return 0.0;
    return n_re / (n_ff + n_re);
}

template <class Rng>
double lamarckian_new_weight(const WeightInitStats& stats, Rng& rng) {
    return detail::normal_draw(stats.mu, stats.sigma2, rng);
}

template <class Rng>
double uniform_init_weight(Rng& rng) {
    return std::uniform_real_distribution<double>(-0.5, 0.5)(rng);
}

/// r(w_p2 - w_p1) + w_p1 with r drawn from [-0.5, 1.5]; w_p1 belongs to the fitter parent.
inline double crossover_weight(double w_p1, double w_p2, double r) { return r * (w_p2 - w_p1) + w_p1; }

template <class Rng>
double crossover_weight(double w_p1, double w_p2, Rng& rng) {
    return crossover_weight(w_p1, w_p2, std::uniform_real_distribution<double>(-0.5, 1.5)(rng));
}

template <class Rng>
std::vector<double> new_cell_params(CellKind cell, const WeightInitStats& stats,
                                    double lstm_forget_bias, Rng& rng) {
    std::vector<double> p(param_count(cell));
    for (double& x : p) x = lamarckian_new_weight(stats, rng);
    if (cell == CellKind::lstm) p[lstm_p::f_b] += lstm_forget_bias;
    return p;
}

/// Every input wired to every output, no hidden nodes, weights and output
/// biases uniform in [-0.5, 0.5].
template <class Rng>
Genome make_minimal_genome(InnovationRegistry& registry, std::size_t n_inputs,
                           std::size_t n_outputs, Rng& rng) {
    Genome g;
    for (std::size_t i = 0; i < n_inputs; ++i) {
        Node n;
        n.innovation = registry.input_node(i);
        n.role = NodeRole::input;
        n.depth = 0.0;
        n.slot = static_cast<std::int32_t>(i);
        g.add_node(n);
    }
    for (std::size_t j = 0; j < n_outputs; ++j) {
        Node n;
        n.innovation = registry.output_node(j);
        n.role = NodeRole::output;
        n.depth = 1.0;
        n.slot = static_cast<std::int32_t>(j);
        n.params = {uniform_init_weight(rng)};
        g.add_node(n);
    }
    for (std::size_t i = 0; i < n_inputs; ++i) {
        for (std::size_t j = 0; j < n_outputs; ++j) {
            const auto from = registry.input_node(i);
            const auto to = registry.output_node(j);
            g.add_edge({registry.edge(from, to), from, to, uniform_init_weight(rng), true});
        }
    }
    return g;
}

template <class Rng>
struct MutationContext {
    InnovationRegistry& registry;
    const MutationConfig& config;
    Rng& rng;
    WeightInitStats stats;
};

namespace ops {

// Each apply_* edits `g` in place and returns false, leaving `g` untouched,
// when the operator has no candidates.

template <class Rng>
CellKind random_cell(MutationContext<Rng>& ctx) {
    const auto& cells = ctx.config.allowed_cells;
    if (cells.empty()) throw ConfigError("no cell kinds allowed");
    return cells[detail::pick(cells.size(), ctx.rng)];
}

template <class Rng>
Node make_hidden(Innovation id, double depth, CellKind cell, MutationContext<Rng>& ctx) {
    Node n;
    n.innovation = id;
    n.role = NodeRole::hidden;
    n.cell = cell;
    n.depth = depth;
    n.params = new_cell_params(cell, ctx.stats, ctx.config.lstm_forget_bias, ctx.rng);
    return n;
}

template <class Rng>
void connect(Genome& g, Innovation from, Innovation to, MutationContext<Rng>& ctx) {
    g.add_edge({ctx.registry.edge(from, to), from, to, lamarckian_new_weight(ctx.stats, ctx.rng),
                true});
}

template <class Rng>
void connect_rec(Genome& g, Innovation from, Innovation to, std::int32_t k,
                 MutationContext<Rng>& ctx) {
    g.add_rec_edge({ctx.registry.rec_edge(from, to, k), from, to, k,
                    lamarckian_new_weight(ctx.stats, ctx.rng), true});
}

template <class Rng>
std::int32_t random_skip(MutationContext<Rng>& ctx) {
    return std::uniform_int_distribution<std::int32_t>(1, ctx.config.max_time_skip)(ctx.rng);
}

inline void set_incident(Genome& g, Innovation node, bool enabled) {
    for (auto& e : g.edges)
        if (e.from == node || e.to == node) e.enabled = enabled;
    for (auto& e : g.rec_edges)
        if (e.from == node || e.to == node) e.enabled = enabled;
}

template <class Rng>
bool disable_edge(Genome& g, MutationContext<Rng>& ctx) {
    std::vector<bool*> flags;
    for (auto& e : g.edges)
        if (e.enabled) flags.push_back(&e.enabled);
    for (auto& e : g.rec_edges)
        if (e.enabled) flags.push_back(&e.enabled);
    if (flags.empty()) return false;
    *flags[detail::pick(flags.size(), ctx.rng)] = false;
    return true;
}

template <class Rng>
bool enable_edge(Genome& g, MutationContext<Rng>& ctx) {
    std::vector<bool*> flags;
    for (auto& e : g.edges)
        if (!e.enabled) flags.push_back(&e.enabled);
    for (auto& e : g.rec_edges)
        if (!e.enabled) flags.push_back(&e.enabled);
    if (flags.empty()) return false;
    *flags[detail::pick(flags.size(), ctx.rng)] = true;
    return true;
}

template <class Rng>
bool split_edge(Genome& g, MutationContext<Rng>& ctx) {
    const std::size_t n_ff = static_cast<std::size_t>(
        std::count_if(g.edges.begin(), g.edges.end(), [](const Edge& e) { return e.enabled; }));
    const std::size_t n_rec = g.enabled_rec_edge_count();
    if (n_ff + n_rec == 0) return false;
    std::size_t choice = detail::pick(n_ff + n_rec, ctx.rng);
    const bool recurrent = choice >= n_ff;
    if (recurrent) choice -= n_ff;

    Innovation from = 0, to = 0, split = 0;
    std::int32_t k = 0;
    std::size_t index = 0;
    auto nth_enabled = [&](auto& list) {
        for (std::size_t i = 0, seen = 0; i < list.size(); ++i)
            if (list[i].enabled && seen++ == choice) return i;
        return list.size();
    };
    if (recurrent) {
        index = nth_enabled(g.rec_edges);
        const auto& e = g.rec_edges[index];
        from = e.from;
        to = e.to;
        split = e.innovation;
        k = e.time_skip;
    } else {
        index = nth_enabled(g.edges);
        const auto& e = g.edges[index];
        from = e.from;
        to = e.to;
        split = e.innovation;
    }

    const double d_from = g.find_node(from)->depth;
    const double d_to = g.find_node(to)->depth;
    double depth = 0.5 * (d_from + d_to);
    if (!recurrent && !(d_from < depth && depth < d_to)) return false;
    if (recurrent && !(depth > 0.0 && depth < 1.0))
        depth = std::uniform_real_distribution<double>(0.0, 1.0)(ctx.rng);
    if (!(depth > 0.0 && depth < 1.0)) return false;

    const CellKind cell = random_cell(ctx);
    Innovation id = ctx.registry.split_node(split, recurrent, cell);
    if (g.find_node(id)) id = ctx.registry.fresh_node();

    if (recurrent)
        g.rec_edges[index].enabled = false;
    else
        g.edges[index].enabled = false;
    g.add_node(make_hidden(id, depth, cell, ctx));
    if (recurrent) {
        connect_rec(g, from, id, k, ctx);
        connect_rec(g, id, to, k, ctx);
    } else {
        connect(g, from, id, ctx);
        connect(g, id, to, ctx);
    }
    return true;
}

template <class Rng>
bool add_edge(Genome& g, MutationContext<Rng>& ctx) {
    std::vector<std::pair<Innovation, Innovation>> pairs;
    for (const auto& a : g.nodes) {
        if (!a.enabled) continue;
        for (const auto& b : g.nodes) {
            if (!b.enabled || !(a.depth < b.depth)) continue;
            if (!g.has_edge(a.innovation, b.innovation)) pairs.emplace_back(a.innovation, b.innovation);
        }
    }
    if (pairs.empty()) return false;
    const auto [from, to] = pairs[detail::pick(pairs.size(), ctx.rng)];
    connect(g, from, to, ctx);
    return true;
}

template <class Rng>
bool add_recurrent_edge(Genome& g, MutationContext<Rng>& ctx) {
    if (!ctx.config.recurrent_edges) return false;
    std::vector<Innovation> sources, targets;
    for (const auto& n : g.nodes) {
        if (!n.enabled) continue;
        sources.push_back(n.innovation);
        if (n.role != NodeRole::input) targets.push_back(n.innovation);
    }
    if (sources.empty() || targets.empty()) return false;
    for (int attempt = 0; attempt < ctx.config.max_attempts; ++attempt) {
        const Innovation from = sources[detail::pick(sources.size(), ctx.rng)];
        const Innovation to = targets[detail::pick(targets.size(), ctx.rng)];
        const std::int32_t k = random_skip(ctx);
        if (g.has_rec_edge(from, to, k)) continue;
        connect_rec(g, from, to, k, ctx);
        return true;
    }
    return false;
}

template <class Rng>
bool disable_node(Genome& g, MutationContext<Rng>& ctx) {
    std::vector<std::size_t> candidates;
    for (std::size_t i = 0; i < g.nodes.size(); ++i)
        if (g.nodes[i].enabled && g.nodes[i].role != NodeRole::output) candidates.push_back(i);
    if (candidates.empty()) return false;
    Node& n = g.nodes[candidates[detail::pick(candidates.size(), ctx.rng)]];
    n.enabled = false;
    set_incident(g, n.innovation, false);
    return true;
}

template <class Rng>
bool enable_node(Genome& g, MutationContext<Rng>& ctx) {
    std::vector<std::size_t> candidates;
    for (std::size_t i = 0; i < g.nodes.size(); ++i)
        if (!g.nodes[i].enabled) candidates.push_back(i);
    if (candidates.empty()) return false;
    Node& n = g.nodes[candidates[detail::pick(candidates.size(), ctx.rng)]];
    n.enabled = true;
    set_incident(g, n.innovation, true);
    return true;
}

template <class Rng>
std::size_t sample_count(double mean, double var, std::size_t lo, MutationContext<Rng>& ctx) {
    const double draw = std::round(detail::normal_draw(mean, var, ctx.rng));
    if (!(draw > static_cast<double>(lo))) return lo;
    return static_cast<std::size_t>(draw);
}

template <class Rng>
bool add_node(Genome& g, MutationContext<Rng>& ctx) {
    double depth = 0.0;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    while (!(depth > 0.0 && depth < 1.0)) depth = unit(ctx.rng);

    std::vector<Innovation> shallower, deeper, any, targets;
    for (const auto& n : g.nodes) {
        if (!n.enabled) continue;
        if (n.depth < depth) shallower.push_back(n.innovation);
        if (n.depth > depth) deeper.push_back(n.innovation);
        any.push_back(n.innovation);
        if (n.role != NodeRole::input) targets.push_back(n.innovation);
    }
    if (shallower.empty() || deeper.empty()) return false;

    const auto& s = ctx.stats;
    std::size_t n_in = std::min(sample_count(s.in_mean, s.in_var, 1, ctx), shallower.size());
    std::size_t n_out = std::min(sample_count(s.out_mean, s.out_var, 1, ctx), deeper.size());
    std::size_t n_rec_in = 0, n_rec_out = 0;
    if (ctx.config.recurrent_edges) {
        n_rec_in = sample_count(s.rec_in_mean, s.rec_in_var, 0, ctx);
        n_rec_out = sample_count(s.rec_out_mean, s.rec_out_var, 0, ctx);
    }

    const CellKind cell = random_cell(ctx);
    const Innovation id = ctx.registry.fresh_node();
    g.add_node(make_hidden(id, depth, cell, ctx));

    std::shuffle(shallower.begin(), shallower.end(), ctx.rng);
    std::shuffle(deeper.begin(), deeper.end(), ctx.rng);
    for (std::size_t i = 0; i < n_in; ++i) connect(g, shallower[i], id, ctx);
    for (std::size_t i = 0; i < n_out; ++i) connect(g, id, deeper[i], ctx);

    any.push_back(id);
    targets.push_back(id);
    auto add_rec = [&](bool incoming) {
        for (int attempt = 0; attempt < ctx.config.max_attempts; ++attempt) {
            const Innovation other =
                incoming ? any[detail::pick(any.size(), ctx.rng)]
                         : targets[detail::pick(targets.size(), ctx.rng)];
            const std::int32_t k = random_skip(ctx);
            const Innovation from = incoming ? other : id;
            const Innovation to = incoming ? id : other;
            if (g.has_rec_edge(from, to, k)) continue;
            connect_rec(g, from, to, k, ctx);
            return;
        }
    };
    for (std::size_t i = 0; i < n_rec_in; ++i) add_rec(true);
    for (std::size_t i = 0; i < n_rec_out; ++i) add_rec(false);
    return true;
}

struct Incident {
    std::vector<Edge> in, out;
    std::vector<RecurrentEdge> rec;
};

inline Incident enabled_incident(const Genome& g, Innovation node) {
    Incident inc;
    for (const auto& e : g.edges) {
        if (!e.enabled) continue;
        if (e.to == node) inc.in.push_back(e);
        if (e.from == node) inc.out.push_back(e);
    }
    for (const auto& e : g.rec_edges)
        if (e.enabled && (e.from == node || e.to == node)) inc.rec.push_back(e);
    return inc;
}

// Splits `edges` between two children: one each guaranteed when there are at
// least two, a lone edge goes to both, the rest are assigned at random.
template <class Rng>
std::pair<std::vector<Edge>, std::vector<Edge>> partition_edges(std::vector<Edge> edges,
                                                                 MutationContext<Rng>& ctx) {
    std::pair<std::vector<Edge>, std::vector<Edge>> out;
    if (edges.empty()) return out;
    if (edges.size() == 1) {
        out.first.push_back(edges[0]);
        out.second.push_back(edges[0]);
        return out;
    }
    std::shuffle(edges.begin(), edges.end(), ctx.rng);
    out.first.push_back(edges[0]);
    out.second.push_back(edges[1]);
    for (std::size_t i = 2; i < edges.size(); ++i)
        (detail::pick(2, ctx.rng) == 0 ? out.first : out.second).push_back(edges[i]);
    return out;
}

template <class Rng>
bool split_node(Genome& g, MutationContext<Rng>& ctx) {
    std::vector<std::size_t> candidates;
    for (std::size_t i = 0; i < g.nodes.size(); ++i)
        if (g.nodes[i].enabled && g.nodes[i].role == NodeRole::hidden) candidates.push_back(i);
    if (candidates.empty()) return false;
    const Node parent = g.nodes[candidates[detail::pick(candidates.size(), ctx.rng)]];
    const Incident inc = enabled_incident(g, parent.innovation);

    g.find_node(parent.innovation)->enabled = false;
    set_incident(g, parent.innovation, false);

    const Innovation a = ctx.registry.fresh_node();
    const Innovation b = ctx.registry.fresh_node();
    g.add_node(make_hidden(a, parent.depth, random_cell(ctx), ctx));
    g.add_node(make_hidden(b, parent.depth, random_cell(ctx), ctx));

    const auto ins = partition_edges(inc.in, ctx);
    const auto outs = partition_edges(inc.out, ctx);
    for (const auto& e : ins.first) connect(g, e.from, a, ctx);
    for (const auto& e : ins.second) connect(g, e.from, b, ctx);
    for (const auto& e : outs.first) connect(g, a, e.to, ctx);
    for (const auto& e : outs.second) connect(g, b, e.to, ctx);
    for (const auto& e : inc.rec) {
        const Innovation child = detail::pick(2, ctx.rng) == 0 ? a : b;
        const Innovation from = e.from == parent.innovation ? child : e.from;
        const Innovation to = e.to == parent.innovation ? child : e.to;
        if (!g.has_rec_edge(from, to, e.time_skip)) connect_rec(g, from, to, e.time_skip, ctx);
    }
    return true;
}

template <class Rng>
bool merge_node(Genome& g, MutationContext<Rng>& ctx) {
    std::vector<std::size_t> candidates;
    for (std::size_t i = 0; i < g.nodes.size(); ++i)
        if (g.nodes[i].enabled && g.nodes[i].role == NodeRole::hidden) candidates.push_back(i);
    if (candidates.size() < 2) return false;
    std::shuffle(candidates.begin(), candidates.end(), ctx.rng);
    const Node first = g.nodes[candidates[0]];
    const Node second = g.nodes[candidates[1]];
    const double depth = 0.5 * (first.depth + second.depth);

    std::vector<Edge> ff;
    std::vector<RecurrentEdge> rec;
    for (const Node* n : {&first, &second}) {
        const Incident inc = enabled_incident(g, n->innovation);
        ff.insert(ff.end(), inc.in.begin(), inc.in.end());
        ff.insert(ff.end(), inc.out.begin(), inc.out.end());
        rec.insert(rec.end(), inc.rec.begin(), inc.rec.end());
    }
    for (const Node* n : {&first, &second}) {
        g.find_node(n->innovation)->enabled = false;
        set_incident(g, n->innovation, false);
    }

    const Innovation id = ctx.registry.fresh_node();
    g.add_node(make_hidden(id, depth, random_cell(ctx), ctx));
    auto merged = [&](Innovation x) {
        return x == first.innovation || x == second.innovation;
    };
    std::sort(ff.begin(), ff.end(), [](const Edge& l, const Edge& r) { return l.innovation < r.innovation; });
    for (const auto& e : ff) {
        const Innovation other = merged(e.from) ? e.to : e.from;
        if (merged(other)) continue;
        const double d = g.find_node(other)->depth;
        if (d < depth && !g.has_edge(other, id))
            connect(g, other, id, ctx);
        else if (d > depth && !g.has_edge(id, other))
            connect(g, id, other, ctx);
    }
    std::sort(rec.begin(), rec.end(),
              [](const RecurrentEdge& l, const RecurrentEdge& r) { return l.innovation < r.innovation; });
    for (const auto& e : rec) {
        const Innovation from = merged(e.from) ? id : e.from;
        const Innovation to = merged(e.to) ? id : e.to;
        if (!g.has_rec_edge(from, to, e.time_skip)) connect_rec(g, from, to, e.time_skip, ctx);
    }
    return true;
}

template <class Rng>
bool apply(OperatorKind op, Genome& g, MutationContext<Rng>& ctx) {
    switch (op) {
        case OperatorKind::disable_edge: return disable_edge(g, ctx);
        case OperatorKind::enable_edge: return enable_edge(g, ctx);
        case OperatorKind::split_edge: return split_edge(g, ctx);
        case OperatorKind::add_edge: return add_edge(g, ctx);
        case OperatorKind::add_recurrent_edge: return add_recurrent_edge(g, ctx);
        case OperatorKind::disable_node: return disable_node(g, ctx);
        case OperatorKind::enable_node: return enable_node(g, ctx);
        case OperatorKind::add_node: return add_node(g, ctx);
        case OperatorKind::split_node: return split_node(g, ctx);
        case OperatorKind::merge_node: return merge_node(g, ctx);
        case OperatorKind::clone: return true;
        default: return false;
    }
}

}  // namespace ops

enum class MutationStatus { ok, inapplicable, discarded };

struct MutationOutcome {
    MutationStatus status = MutationStatus::inapplicable;
    Genome child;
    std::vector<OperatorKind> applied;
};

inline Genome fresh_child(const Genome& parent) {
    Genome child = parent;
    child.fitness = std::numeric_limits<double>::infinity();
    child.generation_id = -1;
    child.lineage = {};
    return child;
}

/// Applies exactly one named operator to a copy of `parent`. The child is
/// discarded when an output node ends up unreachable.
template <class Rng>
MutationOutcome apply_operator(const Genome& parent, OperatorKind op, InnovationRegistry& registry,
                               const MutationConfig& config, Rng& rng) {
    MutationContext<Rng> ctx{registry, config, rng, compute_stats(parent)};
    MutationOutcome out;
    out.child = fresh_child(parent);
    if (!ops::apply(op, out.child, ctx)) {
        out.status = MutationStatus::inapplicable;
        out.child = {};
        return out;
    }
    out.applied.push_back(op);
    out.status = outputs_reachable(out.child) ? MutationStatus::ok : MutationStatus::discarded;
    return out;
}

/// Clone: same structure and weights, unevaluated.
inline Genome clone(const Genome& parent) { return fresh_child(parent); }

/// Applies `config.mutations_per_child` operators drawn by weight. An
/// inapplicable draw is replaced by a draw from the remaining operators, up
/// to `max_attempts` times, falling back to clone. Reachability is checked
/// once after the whole batch.
template <class Rng>
MutationOutcome mutate(const Genome& parent, InnovationRegistry& registry,
                       const MutationConfig& config, Rng& rng) {
    MutationContext<Rng> ctx{registry, config, rng, compute_stats(parent)};
    MutationOutcome out;
    out.child = fresh_child(parent);
    for (int m = 0; m < std::max(1, config.mutations_per_child); ++m) {
        auto weights = config.op_weights;
        bool done = false;
        for (int attempt = 0; attempt < config.max_attempts && !done; ++attempt) {
            double total = 0.0;
            for (double w : weights) total += w;
            if (!(total > 0.0)) break;
            std::discrete_distribution<std::size_t> dist(weights.begin(), weights.end());
            const std::size_t k = dist(rng);
            const OperatorKind op = kMutationOperators[k];
            if (ops::apply(op, out.child, ctx)) {
                out.applied.push_back(op);
                done = true;
            } else {
                weights[k] = 0.0;
            }
        }
        if (!done) out.applied.push_back(OperatorKind::clone);
    }
    out.status = outputs_reachable(out.child) ? MutationStatus::ok : MutationStatus::discarded;
    return out;
}

namespace detail {

// Merges two innovation-sorted element lists in one pass.
template <class T, class Combine>
void merge_by_innovation(const std::vector<T>& better, const std::vector<char>& better_reach,
                         const std::vector<T>& worse, const std::vector<char>& worse_reach,
                         std::vector<T>& out, Combine combine) {
    std::size_t i = 0, j = 0;
    while (i < better.size() || j < worse.size()) {
        if (j == worse.size() || (i < better.size() && better[i].innovation < worse[j].innovation)) {
            if (better_reach[i]) out.push_back(better[i]);
            ++i;
        } else if (i == better.size() || worse[j].innovation < better[i].innovation) {
            if (worse_reach[j]) out.push_back(worse[j]);
            ++j;
        } else {
            if (better_reach[i] && worse_reach[j])
                out.push_back(combine(better[i], worse[j]));
            else if (better_reach[i])
                out.push_back(better[i]);
            else if (worse_reach[j])
                out.push_back(worse[j]);
            ++i;
            ++j;
        }
    }
}

}  // namespace detail

/// Child made of every reachable element of either parent, aligned by
/// innovation number. Elements in both parents get recombined weights with a
/// fresh r from `draw_r()` per element; input and output nodes are always kept.
template <class DrawR>
Genome crossover_with(const Genome& better, const Genome& worse, DrawR&& draw_r) {
    const auto rb = reachability(better);
    const auto rw = reachability(worse);
    auto keep_io = [](const Genome& g, std::vector<char> mask) {
        for (std::size_t i = 0; i < g.nodes.size(); ++i)
            if (g.nodes[i].role != NodeRole::hidden) mask[i] = 1;
        return mask;
    };

    Genome child;
    child.binding = better.binding.inputs.empty() ? worse.binding : better.binding;
    detail::merge_by_innovation(
        better.nodes, keep_io(better, rb.nodes), worse.nodes, keep_io(worse, rw.nodes), child.nodes,
        [&](const Node& a, const Node& b) {
            Node n = a;
            const double r = draw_r();
            for (std::size_t k = 0; k < n.params.size() && k < b.params.size(); ++k)
                n.params[k] = crossover_weight(a.params[k], b.params[k], r);
            n.enabled = a.enabled || b.enabled;
            return n;
        });
    for (std::size_t i = 0; i < child.nodes.size(); ++i) {
        Node& n = child.nodes[i];
        if (n.role == NodeRole::hidden || n.role == NodeRole::output) n.enabled = true;
    }
    // Input nodes unreachable in both parents keep the better parent's flag.
    for (auto& n : child.nodes) {
        if (n.role != NodeRole::input) continue;
        const Node* a = better.find_node(n.innovation);
        const Node* b = worse.find_node(n.innovation);
        const bool reach_a = a && rb.nodes[static_cast<std::size_t>(a - better.nodes.data())];
        const bool reach_b = b && rw.nodes[static_cast<std::size_t>(b - worse.nodes.data())];
        n.enabled = reach_a || reach_b || (a ? a->enabled : b->enabled);
    }
    auto combine_edge = [&](auto a, const auto& b) {
        a.weight = crossover_weight(a.weight, b.weight, draw_r());
        a.enabled = true;
        return a;
    };
    detail::merge_by_innovation(better.edges, rb.edges, worse.edges, rw.edges, child.edges,
                                combine_edge);
    detail::merge_by_innovation(better.rec_edges, rb.rec_edges, worse.rec_edges, rw.rec_edges,
                                child.rec_edges, combine_edge);
    return child;
}

template <class Rng>
Genome crossover(const Genome& better, const Genome& worse, Rng& rng) {
    std::uniform_real_distribution<double> r(-0.5, 1.5);
    return crossover_with(better, worse, [&] { return r(rng); });
}

}  // namespace examm
