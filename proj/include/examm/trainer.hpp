#pragma once

// Local training of a genome: SGD with Nesterov momentum over full-sequence
// BPTT gradients, with norm clipping (t_h) and norm boosting (t_l).

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "examm/genome.hpp"
#include "examm/network.hpp"

namespace examm {

enum class FitnessMetric { mae, mse };

inline std::string_view to_string(FitnessMetric m) { return m == FitnessMetric::mae ? "mae" : "mse"; }

inline FitnessMetric parse_metric(std::string_view s) {
    if (s == "mae") return FitnessMetric::mae;
    if (s == "mse") return FitnessMetric::mse;
    throw ConfigError("unknown fitness metric '" + std::string(s) + "'");
}

struct TrainConfig {
    double learning_rate = 0.001;
    double momentum = 0.9;
    int epochs = 10;
    double high_threshold = 1.0;
    double low_threshold = 0.05;
    FitnessMetric metric = FitnessMetric::mae;
    double lstm_forget_bias = 1.0;  // added to new lstm forget-gate biases
    // Windows longer than this are split for training; 0 trains on whole series.
    std::size_t truncation = 0;

    void check() const {
        if (!(learning_rate >= 0.0)) throw ConfigError("learning rate must be >= 0");
        if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("momentum must be in [0,1)");
        if (epochs < 1) throw ConfigError("epochs must be >= 1");
        if (!(low_threshold >= 0.0 && low_threshold < high_threshold))
            throw ConfigError("thresholds must satisfy 0 <= t_l < t_h");
    }
};

class TrainingError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

inline double l2_norm(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

/// Re-scales the whole gradient vector in place: down to t_h when its norm
/// exceeds t_h, up to t_l when its norm is below t_l. A zero vector is left
/// alone. Returns the factor applied.
inline double rescale_gradient(std::span<double> g, double t_h, double t_l) {
    const double norm = l2_norm(g);
    if (norm == 0.0 || !std::isfinite(norm)) return 1.0;
    double factor = 1.0;
    if (norm > t_h)
        factor = t_h / norm;
    else if (norm < t_l)
        factor = t_l / norm;
    if (factor != 1.0)
        for (double& x : g) x *= factor;
    return factor;
}

struct TrainResult {
    Genome genome;
    std::vector<double> epoch_loss;  // mean training loss seen during each epoch
};

namespace detail {

inline std::vector<SequenceData> split_windows(const std::vector<SequenceData>& series,
                                               std::size_t length) {
    if (length == 0) return series;
    std::vector<SequenceData> out;
    for (const auto& s : series) {
        if (s.steps <= length) {
            out.push_back(s);
            continue;
        }
        // Consecutive windows overlap by one step so every target is scored once.
        for (std::size_t start = 0; start + 1 < s.steps; start += length - 1) {
            const std::size_t end = std::min(s.steps, start + length);
            if (end - start < 2) break;
            SequenceData w;
            w.name = s.name;
            w.steps = end - start;
            w.n_in = s.n_in;
            w.n_out = s.n_out;
            w.x.assign(s.x.begin() + static_cast<std::ptrdiff_t>(start * s.n_in),
                       s.x.begin() + static_cast<std::ptrdiff_t>(end * s.n_in));
            w.y.assign(s.y.begin() + static_cast<std::ptrdiff_t>(start * s.n_out),
                       s.y.begin() + static_cast<std::ptrdiff_t>(end * s.n_out));
            out.push_back(std::move(w));
            if (end == s.steps) break;
        }
    }
    return out;
}

}  // namespace detail

/// Trains a copy of `g` for `config.epochs` passes, one Nesterov step per
/// sequence per pass, visiting sequences in an order shuffled by `rng`.
/// Momentum starts from zero on every call.
template <class Rng>
TrainResult train(const Genome& g, const std::vector<SequenceData>& series,
                  const TrainConfig& config, Rng& rng) {
    config.check();
    if (series.empty()) throw std::invalid_argument("no training series");
    const auto windows = detail::split_windows(series, config.truncation);

    Network net(g);
    std::vector<double> w = flatten_weights(g);
    std::vector<double> velocity(w.size(), 0.0);
    std::vector<double> ahead(w.size());
    std::vector<double> grad(w.size());
    std::vector<std::size_t> order(windows.size());
    std::iota(order.begin(), order.end(), std::size_t{0});

    TrainResult result;
    result.epoch_loss.reserve(static_cast<std::size_t>(config.epochs));
    const double mu = config.momentum;
    const double eta = config.learning_rate;
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        double epoch_loss = 0.0;
        for (std::size_t idx : order) {
            for (std::size_t i = 0; i < w.size(); ++i) ahead[i] = w[i] + mu * velocity[i];
            epoch_loss += net.gradient(ahead, windows[idx], grad);
            rescale_gradient(grad, config.high_threshold, config.low_threshold);
            for (std::size_t i = 0; i < w.size(); ++i) {
                velocity[i] = mu * velocity[i] - eta * grad[i];
                w[i] += velocity[i];
            }
        }
        epoch_loss /= static_cast<double>(windows.size());
        if (!std::isfinite(epoch_loss)) throw TrainingError("training diverged (non-finite loss)");
        result.epoch_loss.push_back(epoch_loss);
    }
    for (double x : w)
        if (!std::isfinite(x)) throw TrainingError("training produced non-finite weights");

    result.genome = g;
    assign_weights(result.genome, w);
    return result;
}

/// Mean per-step absolute (or squared) one-step-ahead error per series,
/// averaged over series.
inline double evaluate(const Genome& g, const std::vector<SequenceData>& series,
                       FitnessMetric metric) {
    if (series.empty()) throw std::invalid_argument("no evaluation series");
    Network net(g);
    const auto w = flatten_weights(g);
    double total = 0.0;
    for (const auto& s : series) {
        const auto pred = net.forward(w, s);
        double sum = 0.0;
        for (std::size_t t = 0; t + 1 < s.steps; ++t) {
            for (std::size_t j = 0; j < s.n_out; ++j) {
                const double d = pred[t * s.n_out + j] - s.target(t + 1, j);
                sum += metric == FitnessMetric::mae ? std::abs(d) : d * d;
            }
        }
        total += sum / static_cast<double>((s.steps - 1) * s.n_out);
    }
    const double fitness = total / static_cast<double>(series.size());
    return std::isfinite(fitness) ? fitness : std::numeric_limits<double>::infinity();
}

}  // namespace examm
