#pragma once

// RNN genome graph: typed nodes, feed-forward edges and time-skip recurrent
// edges, all keyed by innovation number.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "examm/cell.hpp"

namespace examm {

using Innovation = std::int32_t;
using GenomeId = std::int64_t;

inline constexpr int kDefaultMaxTimeSkip = 10;

enum class NodeRole : std::uint8_t { input = 0, hidden = 1, output = 2 };

inline std::string_view to_string(NodeRole role) {
    switch (role) {
        case NodeRole::input: return "input";
        case NodeRole::hidden: return "hidden";
        case NodeRole::output: return "output";
    }
    return "unknown";
}

struct Node {
    Innovation innovation = 0;
    NodeRole role = NodeRole::hidden;
    CellKind cell = CellKind::simple;
    double depth = 0.5;
    bool enabled = true;
    // Column slot for input/output nodes, -1 for hidden nodes.
    std::int32_t slot = -1;
    // Empty for input nodes, which pass their series value through unchanged.
    std::vector<double> params;

    bool operator==(const Node&) const = default;
};

struct Edge {
    Innovation innovation = 0;
    Innovation from = 0;
    Innovation to = 0;
    double weight = 0.0;
    bool enabled = true;

    bool operator==(const Edge&) const = default;
};

struct RecurrentEdge {
    Innovation innovation = 0;
    Innovation from = 0;
    Innovation to = 0;
    std::int32_t time_skip = 1;
    double weight = 0.0;
    bool enabled = true;

    bool operator==(const RecurrentEdge&) const = default;
};

struct Lineage {
    std::string op = "seed";
    std::vector<GenomeId> parents;

    bool operator==(const Lineage&) const = default;
};

// Series columns and scaling a genome was trained against, so a saved genome
// can be applied to raw data later.
struct ColumnRange {
    std::string column;
    double min = 0.0;
    double max = 1.0;

    bool operator==(const ColumnRange&) const = default;
};

struct DataBinding {
    std::vector<std::string> inputs;
    std::vector<std::string> outputs;
    std::vector<ColumnRange> scaling;  // empty when data was not normalized

    bool operator==(const DataBinding&) const = default;
};

struct Genome {
    std::vector<Node> nodes;               // sorted by innovation
    std::vector<Edge> edges;               // sorted by innovation
    std::vector<RecurrentEdge> rec_edges;  // sorted by innovation
    double fitness = std::numeric_limits<double>::infinity();
    std::int32_t island = -1;
    GenomeId generation_id = -1;
    Lineage lineage;
    DataBinding binding;

    bool operator==(const Genome&) const = default;

    const Node* find_node(Innovation id) const {
        auto it = std::lower_bound(nodes.begin(), nodes.end(), id,
                                   [](const Node& n, Innovation v) { return n.innovation < v; });
        return (it != nodes.end() && it->innovation == id) ? &*it : nullptr;
    }
    Node* find_node(Innovation id) {
        return const_cast<Node*>(static_cast<const Genome&>(*this).find_node(id));
    }
    std::ptrdiff_t node_index(Innovation id) const {
        const Node* n = find_node(id);
        return n ? n - nodes.data() : -1;
    }

    std::size_t input_count() const {
        return static_cast<std::size_t>(std::count_if(
            nodes.begin(), nodes.end(), [](const Node& n) { return n.role == NodeRole::input; }));
    }
    std::size_t output_count() const {
        return static_cast<std::size_t>(std::count_if(
            nodes.begin(), nodes.end(), [](const Node& n) { return n.role == NodeRole::output; }));
    }
    std::size_t enabled_edge_count() const {
        return static_cast<std::size_t>(
            std::count_if(edges.begin(), edges.end(), [](const Edge& e) { return e.enabled; }));
    }
    std::size_t enabled_rec_edge_count() const {
        return static_cast<std::size_t>(std::count_if(
            rec_edges.begin(), rec_edges.end(), [](const RecurrentEdge& e) { return e.enabled; }));
    }
    std::size_t enabled_node_count() const {
        return static_cast<std::size_t>(
            std::count_if(nodes.begin(), nodes.end(), [](const Node& n) { return n.enabled; }));
    }
    bool has_edge(Innovation from, Innovation to) const {
        return std::any_of(edges.begin(), edges.end(),
                           [&](const Edge& e) { return e.from == from && e.to == to; });
    }
    bool has_rec_edge(Innovation from, Innovation to, std::int32_t k) const {
        return std::any_of(rec_edges.begin(), rec_edges.end(), [&](const RecurrentEdge& e) {
            return e.from == from && e.to == to && e.time_skip == k;
        });
    }

    void add_node(Node n) {
        auto it = std::upper_bound(
            nodes.begin(), nodes.end(), n.innovation,
            [](Innovation v, const Node& x) { return v < x.innovation; });
        nodes.insert(it, std::move(n));
    }
    void add_edge(Edge e) {
        auto it = std::upper_bound(
            edges.begin(), edges.end(), e.innovation,
            [](Innovation v, const Edge& x) { return v < x.innovation; });
        edges.insert(it, e);
    }
    void add_rec_edge(RecurrentEdge e) {
        auto it = std::upper_bound(
            rec_edges.begin(), rec_edges.end(), e.innovation,
            [](Innovation v, const RecurrentEdge& x) { return v < x.innovation; });
        rec_edges.insert(it, e);
    }
};

/// Issues innovation numbers. Identical structural signatures map to the same
/// number for the whole run; counters only grow.
class InnovationRegistry {
  public:
    InnovationRegistry() = default;
    InnovationRegistry(std::size_t inputs, std::size_t outputs)
        : inputs_(static_cast<Innovation>(inputs)),
          outputs_(static_cast<Innovation>(outputs)),
          next_node_(static_cast<Innovation>(inputs + outputs)) {}

    Innovation input_node(std::size_t i) const { return static_cast<Innovation>(i); }
    Innovation output_node(std::size_t j) const { return inputs_ + static_cast<Innovation>(j); }

    Innovation fresh_node() { return next_node_++; }

    // Node created by splitting `edge` (recurrent or not) with the given cell kind.
    Innovation split_node(Innovation edge, bool recurrent, CellKind cell) {
        auto key = std::make_tuple(recurrent, edge, static_cast<int>(cell));
        auto [it, inserted] = split_nodes_.try_emplace(key, next_node_);
        if (inserted) ++next_node_;
        return it->second;
    }

    Innovation edge(Innovation from, Innovation to) {
        auto [it, inserted] = edges_.try_emplace({from, to}, next_edge_);
        if (inserted) ++next_edge_;
        return it->second;
    }

    Innovation rec_edge(Innovation from, Innovation to, std::int32_t k) {
        auto [it, inserted] = rec_edges_.try_emplace({from, to, k}, next_rec_edge_);
        if (inserted) ++next_rec_edge_;
        return it->second;
    }

    Innovation next_node_innovation() const { return next_node_; }
    Innovation next_edge_innovation() const { return next_edge_; }
    Innovation next_rec_edge_innovation() const { return next_rec_edge_; }

  private:
    Innovation inputs_ = 0;
    Innovation outputs_ = 0;
    Innovation next_node_ = 0;
    Innovation next_edge_ = 0;
    Innovation next_rec_edge_ = 0;
    std::map<std::tuple<bool, Innovation, int>, Innovation> split_nodes_;
    std::map<std::pair<Innovation, Innovation>, Innovation> edges_;
    std::map<std::tuple<Innovation, Innovation, std::int32_t>, Innovation> rec_edges_;
};

/// Index-aligned reachability flags (parallel to nodes / edges / rec_edges).
struct ReachabilityMask {
    std::vector<char> nodes;
    std::vector<char> edges;
    std::vector<char> rec_edges;
};

struct ReachableSet {
    std::vector<Innovation> nodes;
    std::vector<Innovation> edges;
    std::vector<Innovation> rec_edges;

    bool operator==(const ReachableSet&) const = default;
};

/// An element is reachable when it lies on an enabled path from some input
/// and on an enabled path to some output. Recurrent edges count as path steps.
inline ReachabilityMask reachability(const Genome& g) {
    const std::size_t n = g.nodes.size();
    std::vector<std::vector<std::size_t>> succ(n), pred(n);
    auto usable = [&](Innovation from, Innovation to, bool enabled, std::size_t& a,
                      std::size_t& b) {
        if (!enabled) return false;
        const auto ia = g.node_index(from);
        const auto ib = g.node_index(to);
        if (ia < 0 || ib < 0) return false;
        if (!g.nodes[ia].enabled || !g.nodes[ib].enabled) return false;
        a = static_cast<std::size_t>(ia);
        b = static_cast<std::size_t>(ib);
        return true;
    };
    std::size_t a = 0, b = 0;
    for (const auto& e : g.edges) {
        if (usable(e.from, e.to, e.enabled, a, b)) {
            succ[a].push_back(b);
            pred[b].push_back(a);
        }
    }
    for (const auto& e : g.rec_edges) {
        if (usable(e.from, e.to, e.enabled, a, b)) {
            succ[a].push_back(b);
            pred[b].push_back(a);
        }
    }

    auto sweep = [&](NodeRole start, const std::vector<std::vector<std::size_t>>& adj) {
        std::vector<char> seen(n, 0);
        std::deque<std::size_t> queue;
        for (std::size_t i = 0; i < n; ++i) {
            if (g.nodes[i].role == start && g.nodes[i].enabled) {
                seen[i] = 1;
                queue.push_back(i);
            }
        }
        while (!queue.empty()) {
            const std::size_t cur = queue.front();
            queue.pop_front();
            for (std::size_t next : adj[cur]) {
                if (!seen[next]) {
                    seen[next] = 1;
                    queue.push_back(next);
                }
            }
        }
        return seen;
    };
    const auto fwd = sweep(NodeRole::input, succ);
    const auto bwd = sweep(NodeRole::output, pred);

    ReachabilityMask mask;
    mask.nodes.resize(n);
    for (std::size_t i = 0; i < n; ++i) mask.nodes[i] = fwd[i] && bwd[i];
    mask.edges.resize(g.edges.size());
    for (std::size_t i = 0; i < g.edges.size(); ++i) {
        const auto& e = g.edges[i];
        mask.edges[i] = usable(e.from, e.to, e.enabled, a, b) && fwd[a] && bwd[b];
    }
    mask.rec_edges.resize(g.rec_edges.size());
    for (std::size_t i = 0; i < g.rec_edges.size(); ++i) {
        const auto& e = g.rec_edges[i];
        mask.rec_edges[i] = usable(e.from, e.to, e.enabled, a, b) && fwd[a] && bwd[b];
    }
    return mask;
}

inline ReachableSet reachable_set(const Genome& g) {
    const auto mask = reachability(g);
    ReachableSet out;
    for (std::size_t i = 0; i < g.nodes.size(); ++i)
        if (mask.nodes[i]) out.nodes.push_back(g.nodes[i].innovation);
    for (std::size_t i = 0; i < g.edges.size(); ++i)
        if (mask.edges[i]) out.edges.push_back(g.edges[i].innovation);
    for (std::size_t i = 0; i < g.rec_edges.size(); ++i)
        if (mask.rec_edges[i]) out.rec_edges.push_back(g.rec_edges[i].innovation);
    return out;
}

inline bool outputs_reachable(const Genome& g) {
    const auto mask = reachability(g);
    bool any_output = false;
    for (std::size_t i = 0; i < g.nodes.size(); ++i) {
        if (g.nodes[i].role == NodeRole::output) {
            any_output = true;
            if (!mask.nodes[i]) return false;
        }
    }
    return any_output;
}

struct ValidateOptions {
    int max_time_skip = kDefaultMaxTimeSkip;
    bool require_reachable_outputs = true;
};

/// Checks every structural invariant; returns one message per violation.
inline std::vector<std::string> validate(const Genome& g, const ValidateOptions& opt = {}) {
    std::vector<std::string> v;
    auto id = [](auto x) { return std::to_string(x); };

    for (std::size_t i = 0; i < g.nodes.size(); ++i) {
        const Node& n = g.nodes[i];
        if (i > 0 && g.nodes[i - 1].innovation >= n.innovation)
            v.push_back("duplicate or unsorted node innovation " + id(n.innovation));
        switch (n.role) {
            case NodeRole::input:
                if (n.depth != 0.0) v.push_back("input depth must be 0 (node " + id(n.innovation) + ")");
                if (!n.params.empty()) v.push_back("input node carries parameters " + id(n.innovation));
                break;
            case NodeRole::output:
                if (n.depth != 1.0) v.push_back("output depth must be 1 (node " + id(n.innovation) + ")");
                if (!n.enabled) v.push_back("disabled output node " + id(n.innovation));
                break;
            case NodeRole::hidden:
                if (!(n.depth > 0.0 && n.depth < 1.0))
                    v.push_back("hidden depth outside (0,1) (node " + id(n.innovation) + ")");
                break;
        }
        if (n.role != NodeRole::hidden && n.cell != CellKind::simple)
            v.push_back("input/output node must be simple " + id(n.innovation));
        if (n.role != NodeRole::input && n.params.size() != param_count(n.cell))
            v.push_back("parameter count mismatch on node " + id(n.innovation));
        for (double p : n.params)
            if (!std::isfinite(p)) v.push_back("non-finite parameter on node " + id(n.innovation));
    }

    std::map<std::pair<Innovation, Innovation>, int> pairs;
    for (std::size_t i = 0; i < g.edges.size(); ++i) {
        const Edge& e = g.edges[i];
        if (i > 0 && g.edges[i - 1].innovation >= e.innovation)
            v.push_back("duplicate or unsorted edge innovation " + id(e.innovation));
        const Node* a = g.find_node(e.from);
        const Node* b = g.find_node(e.to);
        if (!a || !b) {
            v.push_back("dangling edge endpoint (edge " + id(e.innovation) + ")");
            continue;
        }
        if (!(a->depth < b->depth))
            v.push_back("feed-forward depth order violated (edge " + id(e.innovation) + ")");
        if (++pairs[{e.from, e.to}] == 2)
            v.push_back("duplicate edge " + id(e.from) + "->" + id(e.to));
        if (!std::isfinite(e.weight)) v.push_back("non-finite edge weight " + id(e.innovation));
    }

    std::map<std::tuple<Innovation, Innovation, std::int32_t>, int> triples;
    for (std::size_t i = 0; i < g.rec_edges.size(); ++i) {
        const RecurrentEdge& e = g.rec_edges[i];
        if (i > 0 && g.rec_edges[i - 1].innovation >= e.innovation)
            v.push_back("duplicate or unsorted recurrent edge innovation " + id(e.innovation));
        const Node* a = g.find_node(e.from);
        const Node* b = g.find_node(e.to);
        if (!a || !b) {
            v.push_back("dangling recurrent edge endpoint (edge " + id(e.innovation) + ")");
            continue;
        }
        if (b->role == NodeRole::input)
            v.push_back("recurrent edge into input node (edge " + id(e.innovation) + ")");
        if (e.time_skip < 1 || e.time_skip > opt.max_time_skip)
            v.push_back("time skip out of range (edge " + id(e.innovation) + ")");
        if (++triples[{e.from, e.to, e.time_skip}] == 2)
            v.push_back("duplicate recurrent edge " + id(e.from) + "->" + id(e.to) +
                        " k=" + id(e.time_skip));
        if (!std::isfinite(e.weight))
            v.push_back("non-finite recurrent edge weight " + id(e.innovation));
    }

    if (opt.require_reachable_outputs && !g.nodes.empty() && !outputs_reachable(g))
        v.push_back("output unreachable");
    return v;
}

}  // namespace examm
