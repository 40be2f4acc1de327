#pragma once

// Unrolled evaluation of a genome over a sequence: forward pass, full BPTT
// gradient, and the flat parameter layout shared by trainer and optimizer.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "examm/cell.hpp"
#include "examm/genome.hpp"

namespace examm {

/// One multivariate sequence prepared for a genome: `x` is steps × inputs,
/// `y` is steps × outputs, both row-major. The prediction made at step t is
/// scored against y at t+1.
struct SequenceData {
    std::string name;
    std::size_t steps = 0;
    std::size_t n_in = 0;
    std::size_t n_out = 0;
    std::vector<double> x;
    std::vector<double> y;

    double input(std::size_t t, std::size_t i) const { return x[t * n_in + i]; }
    double target(std::size_t t, std::size_t j) const { return y[t * n_out + j]; }
};

/// Canonical flat order of trainable scalars: edge weights, recurrent edge
/// weights, then node parameters, each in innovation order.
inline std::size_t parameter_count(const Genome& g) {
    std::size_t n = g.edges.size() + g.rec_edges.size();
    for (const auto& node : g.nodes) n += node.params.size();
    return n;
}

inline std::vector<double> flatten_weights(const Genome& g) {
    std::vector<double> w;
    w.reserve(parameter_count(g));
    for (const auto& e : g.edges) w.push_back(e.weight);
    for (const auto& e : g.rec_edges) w.push_back(e.weight);
    for (const auto& n : g.nodes) w.insert(w.end(), n.params.begin(), n.params.end());
    return w;
}

inline void assign_weights(Genome& g, std::span<const double> w) {
    if (w.size() != parameter_count(g))
        throw std::invalid_argument("weight vector length does not match genome");
    std::size_t k = 0;
    for (auto& e : g.edges) e.weight = w[k++];
    for (auto& e : g.rec_edges) e.weight = w[k++];
    for (auto& n : g.nodes)
        for (auto& p : n.params) p = w[k++];
}

/// Reachable part of a genome laid out for evaluation in depth order.
class Network {
  public:
    struct FeedInput {
        std::size_t src;     // compiled node index
        std::size_t weight;  // flat parameter index
    };
    struct RecInput {
        std::size_t src;
        std::size_t skip;
        std::size_t weight;
    };
    struct Unit {
        NodeRole role = NodeRole::hidden;
        CellKind cell = CellKind::simple;
        std::size_t slot = 0;
        std::size_t param_offset = 0;
        std::vector<FeedInput> ff;
        std::vector<RecInput> rec;
    };

    explicit Network(const Genome& g) : n_params_(examm::parameter_count(g)) {
        const auto mask = reachability(g);
        std::vector<std::size_t> param_offset(g.nodes.size());
        std::size_t off = g.edges.size() + g.rec_edges.size();
        for (std::size_t i = 0; i < g.nodes.size(); ++i) {
            param_offset[i] = off;
            off += g.nodes[i].params.size();
        }

        std::vector<std::size_t> order;
        for (std::size_t i = 0; i < g.nodes.size(); ++i)
            if (mask.nodes[i] || g.nodes[i].role == NodeRole::output) order.push_back(i);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return g.nodes[a].depth < g.nodes[b].depth;
        });
        std::vector<std::ptrdiff_t> compiled(g.nodes.size(), -1);
        for (std::size_t k = 0; k < order.size(); ++k) {
            const Node& n = g.nodes[order[k]];
            compiled[order[k]] = static_cast<std::ptrdiff_t>(k);
            Unit u;
            u.role = n.role;
            u.cell = n.cell;
            u.slot = n.slot < 0 ? 0 : static_cast<std::size_t>(n.slot);
            u.param_offset = param_offset[order[k]];
            if (n.role == NodeRole::input) max_input_slot_ = std::max(max_input_slot_, u.slot + 1);
            if (n.role == NodeRole::output) max_output_slot_ = std::max(max_output_slot_, u.slot + 1);
            units_.push_back(std::move(u));
        }
        for (std::size_t i = 0; i < g.edges.size(); ++i) {
            if (!mask.edges[i]) continue;
            const auto& e = g.edges[i];
            const auto src = compiled[static_cast<std::size_t>(g.node_index(e.from))];
            const auto dst = compiled[static_cast<std::size_t>(g.node_index(e.to))];
            units_[static_cast<std::size_t>(dst)].ff.push_back({static_cast<std::size_t>(src), i});
        }
        for (std::size_t i = 0; i < g.rec_edges.size(); ++i) {
            if (!mask.rec_edges[i]) continue;
            const auto& e = g.rec_edges[i];
            const auto src = compiled[static_cast<std::size_t>(g.node_index(e.from))];
            const auto dst = compiled[static_cast<std::size_t>(g.node_index(e.to))];
            units_[static_cast<std::size_t>(dst)].rec.push_back(
                {static_cast<std::size_t>(src), static_cast<std::size_t>(e.time_skip),
                 g.edges.size() + i});
        }
    }

    std::size_t size() const { return units_.size(); }
    std::size_t parameter_count() const { return n_params_; }
    const std::vector<Unit>& units() const { return units_; }

    /// Runs the sequence forward and returns steps × outputs predictions.
    std::vector<double> forward(std::span<const double> w, const SequenceData& data) {
        check(w, data);
        run_forward(w, data);
        return collect_predictions(data);
    }

    double loss(std::span<const double> w, const SequenceData& data) {
        check(w, data);
        run_forward(w, data);
        return mse(data);
    }

    /// Exact gradient of the mean squared one-step-ahead error with respect to
    /// every flat parameter. `grad` is overwritten. Returns the loss.
    double gradient(std::span<const double> w, const SequenceData& data, std::span<double> grad) {
        check(w, data);
        if (grad.size() != n_params_) throw std::invalid_argument("gradient buffer size mismatch");
        run_forward(w, data);
        const double l = mse(data);
        std::fill(grad.begin(), grad.end(), 0.0);

        const std::size_t T = data.steps;
        const std::size_t N = units_.size();
        ds_.assign(T * N, 0.0);
        dc_.assign(T * N, 0.0);
        const double scale = 2.0 / static_cast<double>((T - 1) * data.n_out);
        for (std::size_t t = 0; t + 1 < T; ++t) {
            for (std::size_t k = 0; k < N; ++k) {
                const Unit& u = units_[k];
                if (u.role != NodeRole::output) continue;
                ds_[t * N + k] += scale * (s_[t * N + k] - data.target(t + 1, u.slot));
            }
        }

        for (std::size_t t = T; t-- > 0;) {
            for (std::size_t k = N; k-- > 0;) {
                const Unit& u = units_[k];
                if (u.role == NodeRole::input) continue;
                const double ds = ds_[t * N + k];
                const double dc = dc_[t * N + k];
                if (ds == 0.0 && dc == 0.0) continue;
                const std::size_t np = param_count(u.cell);
                const CellInputGrad gi =
                    cell_backward(u.cell, traces_[t * N + k], w.subspan(u.param_offset, np), ds,
                                  dc, grad.subspan(u.param_offset, np));
                if (t > 0) {
                    ds_[(t - 1) * N + k] += gi.s_prev;
                    dc_[(t - 1) * N + k] += gi.c_prev;
                }
                if (gi.e == 0.0) continue;
                for (const auto& in : u.ff) {
                    grad[in.weight] += gi.e * s_[t * N + in.src];
                    ds_[t * N + in.src] += gi.e * w[in.weight];
                }
                for (const auto& in : u.rec) {
                    if (t < in.skip) continue;
                    const std::size_t tp = t - in.skip;
                    grad[in.weight] += gi.e * s_[tp * N + in.src];
                    ds_[tp * N + in.src] += gi.e * w[in.weight];
                }
            }
        }
        return l;
    }

  private:
    void check(std::span<const double> w, const SequenceData& data) const {
        if (w.size() != n_params_) throw std::invalid_argument("weight vector length mismatch");
        if (data.steps < 2) throw std::invalid_argument("sequence needs at least 2 steps");
        if (data.n_in < max_input_slot_ || data.n_out < max_output_slot_)
            throw std::invalid_argument("sequence has fewer columns than the genome expects");
    }

    void run_forward(std::span<const double> w, const SequenceData& data) {
        const std::size_t T = data.steps;
        const std::size_t N = units_.size();
        s_.assign(T * N, 0.0);
        c_.assign(T * N, 0.0);
        traces_.resize(T * N);
        for (std::size_t t = 0; t < T; ++t) {
            for (std::size_t k = 0; k < N; ++k) {
                const Unit& u = units_[k];
                if (u.role == NodeRole::input) {
                    s_[t * N + k] = data.input(t, u.slot);
                    continue;
                }
                double e = 0.0;
                for (const auto& in : u.ff) e += w[in.weight] * s_[t * N + in.src];
                for (const auto& in : u.rec)
                    if (t >= in.skip) e += w[in.weight] * s_[(t - in.skip) * N + in.src];
                const CellState prev =
                    t > 0 ? CellState{s_[(t - 1) * N + k], c_[(t - 1) * N + k]} : CellState{};
                const CellState next = cell_forward(
                    u.cell, e, prev, w.subspan(u.param_offset, param_count(u.cell)),
                    traces_[t * N + k]);
                s_[t * N + k] = next.s;
                c_[t * N + k] = next.c;
            }
        }
    }

    std::vector<double> collect_predictions(const SequenceData& data) const {
        const std::size_t N = units_.size();
        std::vector<double> out(data.steps * data.n_out, 0.0);
        for (std::size_t t = 0; t < data.steps; ++t)
            for (std::size_t k = 0; k < N; ++k)
                if (units_[k].role == NodeRole::output)
                    out[t * data.n_out + units_[k].slot] = s_[t * N + k];
        return out;
    }

    double mse(const SequenceData& data) const {
        const std::size_t N = units_.size();
        double sum = 0.0;
        for (std::size_t t = 0; t + 1 < data.steps; ++t)
            for (std::size_t k = 0; k < N; ++k)
                if (units_[k].role == NodeRole::output) {
                    const double d = s_[t * N + k] - data.target(t + 1, units_[k].slot);
                    sum += d * d;
                }
        return sum / static_cast<double>((data.steps - 1) * data.n_out);
    }

    std::vector<Unit> units_;
    std::size_t n_params_ = 0;
    std::size_t max_input_slot_ = 0;
    std::size_t max_output_slot_ = 0;
    std::vector<double> s_, c_, ds_, dc_;
    std::vector<CellTrace> traces_;
};

/// Predictions (steps × outputs) of a genome on one sequence.
inline std::vector<double> forward_pass(const Genome& g, const SequenceData& data) {
    Network net(g);
    const auto w = flatten_weights(g);
    return net.forward(w, data);
}

struct GradientResult {
    std::vector<double> gradient;
    double loss = 0.0;
};

inline GradientResult bptt_gradient(const Genome& g, const SequenceData& data) {
    Network net(g);
    const auto w = flatten_weights(g);
    GradientResult r;
    r.gradient.resize(w.size());
    r.loss = net.gradient(w, data, r.gradient);
    return r;
}

}  // namespace examm
