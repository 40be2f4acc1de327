#pragma once

// Scalar memory cells. Every evolved node is a cell of width one whose input
// is the aggregated weighted sum e_w of its feed-forward and recurrent inputs.

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

namespace examm {

enum class CellKind : std::uint8_t { simple = 0, delta_rnn = 1, gru = 2, lstm = 3, mgu = 4, ugrnn = 5 };

inline constexpr std::array<CellKind, 6> kAllCellKinds = {
    CellKind::simple, CellKind::delta_rnn, CellKind::gru,
    CellKind::lstm,   CellKind::mgu,       CellKind::ugrnn};

class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

inline std::string_view to_string(CellKind kind) {
    switch (kind) {
        case CellKind::simple: return "simple";
        case CellKind::delta_rnn: return "delta";
        case CellKind::gru: return "gru";
        case CellKind::lstm: return "lstm";
        case CellKind::mgu: return "mgu";
        case CellKind::ugrnn: return "ugrnn";
    }
    return "unknown";
}

inline std::optional<CellKind> parse_cell_kind(std::string_view name) {
    if (name == "simple") return CellKind::simple;
    if (name == "delta" || name == "delta_rnn") return CellKind::delta_rnn;
    if (name == "gru") return CellKind::gru;
    if (name == "lstm") return CellKind::lstm;
    if (name == "mgu") return CellKind::mgu;
    if (name == "ugrnn") return CellKind::ugrnn;
    return std::nullopt;
}

inline CellKind cell_kind_from_byte(std::uint8_t b) {
    if (b > static_cast<std::uint8_t>(CellKind::ugrnn)) {
        throw ConfigError("unknown cell kind " + std::to_string(b));
    }
    return static_cast<CellKind>(b);
}

// Parameter slot layouts. Gated cells carry, per gate, an input weight on e_w,
// a recurrent weight on the cell's own previous output, and a bias.
namespace simple_p {
enum : std::size_t { bias, count };
}
namespace delta_p {
enum : std::size_t { alpha, beta1, beta2, bias, m, count };
}
namespace gru_p {
enum : std::size_t { z_w, z_u, z_b, r_w, r_u, r_b, h_w, h_u, h_b, count };
}
namespace mgu_p {
enum : std::size_t { f_w, f_u, f_b, h_w, h_u, h_b, count };
}
namespace ugrnn_p {
enum : std::size_t { c_w, c_u, c_b, g_w, g_u, g_b, count };
}
namespace lstm_p {
enum : std::size_t { i_w, i_u, i_b, f_w, f_u, f_b, o_w, o_u, o_b, c_w, c_u, c_b, count };
}

inline constexpr std::size_t param_count(CellKind kind) {
    switch (kind) {
        case CellKind::simple: return simple_p::count;
        case CellKind::delta_rnn: return delta_p::count;
        case CellKind::gru: return gru_p::count;
        case CellKind::lstm: return lstm_p::count;
        case CellKind::mgu: return mgu_p::count;
        case CellKind::ugrnn: return ugrnn_p::count;
    }
    return 0;
}

inline std::span<const std::string_view> param_names(CellKind kind) {
    static constexpr std::array<std::string_view, 1> simple{"bias"};
    static constexpr std::array<std::string_view, 5> delta{"alpha", "beta1", "beta2", "b", "m"};
    static constexpr std::array<std::string_view, 9> gru{"z_w", "z_u", "z_b", "r_w", "r_u",
                                                          "r_b", "h_w", "h_u", "h_b"};
    static constexpr std::array<std::string_view, 6> mgu{"f_w", "f_u", "f_b", "h_w", "h_u", "h_b"};
    static constexpr std::array<std::string_view, 6> ugrnn{"c_w", "c_u", "c_b",
                                                            "g_w", "g_u", "g_b"};
    static constexpr std::array<std::string_view, 12> lstm{"i_w", "i_u", "i_b", "f_w",
                                                            "f_u", "f_b", "o_w", "o_u",
                                                            "o_b", "c_w", "c_u", "c_b"};
    switch (kind) {
        case CellKind::simple: return simple;
        case CellKind::delta_rnn: return delta;
        case CellKind::gru: return gru;
        case CellKind::lstm: return lstm;
        case CellKind::mgu: return mgu;
        case CellKind::ugrnn: return ugrnn;
    }
    return {};
}

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

struct CellState {
    double s = 0.0;
    double c = 0.0;  // lstm internal cell state, unused elsewhere
};

// Everything the backward pass needs from one forward step.
struct CellTrace {
    double e = 0.0;
    double s_prev = 0.0;
    double c_prev = 0.0;
    // delta: e_v, r, s~ | gru: z, r, h~ | mgu: f, h~ | ugrnn: c, g | lstm: i, f, o, g, tanh(c)
    std::array<double, 5> gate{};
    double s = 0.0;
    double c = 0.0;
};

struct CellInputGrad {
    double e = 0.0;
    double s_prev = 0.0;
    double c_prev = 0.0;
};

inline double simple_forward(double e, double bias) { return std::tanh(e + bias); }

/// Weighted input sum: feed-forward terms at t plus recurrent terms at t-k.
/// Callers pass 0 for recurrent sources whose t-k falls before the series start.
inline double aggregate_inputs(std::span<const double> ff_weights, std::span<const double> ff_values,
                               std::span<const double> rec_weights,
                               std::span<const double> rec_values) {
    double e = 0.0;
    for (std::size_t i = 0; i < ff_weights.size(); ++i) e += ff_weights[i] * ff_values[i];
    for (std::size_t i = 0; i < rec_weights.size(); ++i) e += rec_weights[i] * rec_values[i];
    return e;
}

namespace detail {

inline CellState delta_step(double e, CellState prev, std::span<const double> p, CellTrace& tr) {
    using namespace delta_p;
    const double sp = prev.s;
    const double ev = p[m] * sp;
    const double d1 = p[alpha] * ev * e;
    const double d2 = p[beta1] * ev + p[beta2] * e;
    const double r = sigmoid(e + p[bias]);
    const double st = std::tanh(d1 + d2);
    const double s = std::tanh((1.0 - r) * st + r * sp);
    tr.gate = {ev, r, st, 0.0, 0.0};
    return {s, 0.0};
}

inline CellState gru_step(double e, CellState prev, std::span<const double> p, CellTrace& tr) {
    using namespace gru_p;
    const double sp = prev.s;
    const double z = sigmoid(p[z_w] * e + p[z_u] * sp + p[z_b]);
    const double r = sigmoid(p[r_w] * e + p[r_u] * sp + p[r_b]);
    const double hh = std::tanh(p[h_w] * e + p[h_u] * (r * sp) + p[h_b]);
    tr.gate = {z, r, hh, 0.0, 0.0};
    return {z * sp + (1.0 - z) * hh, 0.0};
}

inline CellState mgu_step(double e, CellState prev, std::span<const double> p, CellTrace& tr) {
    using namespace mgu_p;
    const double sp = prev.s;
    const double f = sigmoid(p[f_w] * e + p[f_u] * sp + p[f_b]);
    const double hh = std::tanh(p[h_w] * e + p[h_u] * (f * sp) + p[h_b]);
    tr.gate = {f, hh, 0.0, 0.0, 0.0};
    return {(1.0 - f) * sp + f * hh, 0.0};
}

inline CellState ugrnn_step(double e, CellState prev, std::span<const double> p, CellTrace& tr) {
    using namespace ugrnn_p;
    const double sp = prev.s;
    const double c = std::tanh(p[c_w] * e + p[c_u] * sp + p[c_b]);
    const double g = sigmoid(p[g_w] * e + p[g_u] * sp + p[g_b]);
    tr.gate = {c, g, 0.0, 0.0, 0.0};
    return {g * sp + (1.0 - g) * c, 0.0};
}

inline CellState lstm_step(double e, CellState prev, std::span<const double> p, CellTrace& tr) {
    using namespace lstm_p;
    const double sp = prev.s;
    const double i = sigmoid(p[i_w] * e + p[i_u] * sp + p[i_b]);
    const double f = sigmoid(p[f_w] * e + p[f_u] * sp + p[f_b]);
    const double o = sigmoid(p[o_w] * e + p[o_u] * sp + p[o_b]);
    const double g = std::tanh(p[c_w] * e + p[c_u] * sp + p[c_b]);
    const double c = f * prev.c + i * g;
    const double tc = std::tanh(c);
    tr.gate = {i, f, o, g, tc};
    return {o * tc, c};
}

// Accumulates the three-slot (w on e, u on s_prev, bias) gate gradient.
inline void gate_backward(double dpre, double e, double sp, std::span<const double> p,
                          std::span<double> dp, std::size_t w, std::size_t u, std::size_t b,
                          CellInputGrad& g) {
    dp[w] += dpre * e;
    dp[u] += dpre * sp;
    dp[b] += dpre;
    g.e += dpre * p[w];
    g.s_prev += dpre * p[u];
}

}  // namespace detail

/// One time step of a cell. Fills `tr` for the backward pass.
inline CellState cell_forward(CellKind kind, double e, CellState prev, std::span<const double> p,
                              CellTrace& tr) {
    if (p.size() != param_count(kind)) {
        throw ConfigError("parameter vector length mismatch for cell " +
                          std::string(to_string(kind)));
    }
    tr.e = e;
    tr.s_prev = prev.s;
    tr.c_prev = prev.c;
    CellState out;
    switch (kind) {
        case CellKind::simple:
            out = {simple_forward(e, p[simple_p::bias]), 0.0};
            break;
        case CellKind::delta_rnn: out = detail::delta_step(e, prev, p, tr); break;
        case CellKind::gru: out = detail::gru_step(e, prev, p, tr); break;
        case CellKind::mgu: out = detail::mgu_step(e, prev, p, tr); break;
        case CellKind::ugrnn: out = detail::ugrnn_step(e, prev, p, tr); break;
        case CellKind::lstm: out = detail::lstm_step(e, prev, p, tr); break;
    }
    tr.s = out.s;
    tr.c = out.c;
    return out;
}

inline CellState delta_forward(double e, double s_prev, std::span<const double> p, CellTrace& tr) {
    return cell_forward(CellKind::delta_rnn, e, {s_prev, 0.0}, p, tr);
}

inline CellState gated_forward(CellKind kind, double e, CellState prev, std::span<const double> p,
                               CellTrace& tr) {
    if (kind == CellKind::simple || kind == CellKind::delta_rnn) {
        throw ConfigError("gated_forward called with non-gated cell " +
                          std::string(to_string(kind)));
    }
    return cell_forward(kind, e, prev, p, tr);
}

/// Chain rule through one forward step. `ds` and `dc` are the upstream
/// gradients on s(t) and (lstm only) c(t). Parameter gradients accumulate into `dp`.
inline CellInputGrad cell_backward(CellKind kind, const CellTrace& tr, std::span<const double> p,
                                   double ds, double dc, std::span<double> dp) {
    CellInputGrad g;
    const double e = tr.e;
    const double sp = tr.s_prev;
    switch (kind) {
        case CellKind::simple: {
            const double da = ds * (1.0 - tr.s * tr.s);
            dp[simple_p::bias] += da;
            g.e = da;
            break;
        }
        case CellKind::delta_rnn: {
            using namespace delta_p;
            const auto [ev, r, st, u0, u1] = tr.gate;
            const double dz = ds * (1.0 - tr.s * tr.s);
            const double dst = dz * (1.0 - r);
            const double dr = dz * (sp - st);
            g.s_prev = dz * r;
            const double da = dst * (1.0 - st * st);
            dp[alpha] += da * ev * e;
            dp[beta1] += da * ev;
            dp[beta2] += da * e;
            const double dev = da * (p[alpha] * e + p[beta1]);
            g.e = da * (p[alpha] * ev + p[beta2]);
            const double drpre = dr * r * (1.0 - r);
            g.e += drpre;
            dp[bias] += drpre;
            dp[m] += dev * sp;
            g.s_prev += dev * p[m];
            break;
        }
        case CellKind::gru: {
            using namespace gru_p;
            const auto [z, r, hh, u0, u1] = tr.gate;
            const double dz = ds * (sp - hh);
            const double dhh = ds * (1.0 - z);
            g.s_prev = ds * z;
            const double dhpre = dhh * (1.0 - hh * hh);
            dp[h_w] += dhpre * e;
            dp[h_u] += dhpre * r * sp;
            dp[h_b] += dhpre;
            g.e += dhpre * p[h_w];
            const double dr = dhpre * p[h_u] * sp;
            g.s_prev += dhpre * p[h_u] * r;
            detail::gate_backward(dr * r * (1.0 - r), e, sp, p, dp, r_w, r_u, r_b, g);
            detail::gate_backward(dz * z * (1.0 - z), e, sp, p, dp, z_w, z_u, z_b, g);
            break;
        }
        case CellKind::mgu: {
            using namespace mgu_p;
            const auto [f, hh, u0, u1, u2] = tr.gate;
            double df = ds * (hh - sp);
            const double dhh = ds * f;
            g.s_prev = ds * (1.0 - f);
            const double dhpre = dhh * (1.0 - hh * hh);
            dp[h_w] += dhpre * e;
            dp[h_u] += dhpre * f * sp;
            dp[h_b] += dhpre;
            g.e += dhpre * p[h_w];
            df += dhpre * p[h_u] * sp;
            g.s_prev += dhpre * p[h_u] * f;
            detail::gate_backward(df * f * (1.0 - f), e, sp, p, dp, f_w, f_u, f_b, g);
            break;
        }
        case CellKind::ugrnn: {
            using namespace ugrnn_p;
            const auto [c, gt, u0, u1, u2] = tr.gate;
            const double dgt = ds * (sp - c);
            const double dcand = ds * (1.0 - gt);
            g.s_prev = ds * gt;
            detail::gate_backward(dcand * (1.0 - c * c), e, sp, p, dp, c_w, c_u, c_b, g);
            detail::gate_backward(dgt * gt * (1.0 - gt), e, sp, p, dp, g_w, g_u, g_b, g);
            break;
        }
        case CellKind::lstm: {
            using namespace lstm_p;
            const auto [i, f, o, gc, tc] = tr.gate;
            const double d_o = ds * tc;
            const double dcell = dc + ds * o * (1.0 - tc * tc);
            g.c_prev = dcell * f;
            detail::gate_backward(dcell * i * (1.0 - i) * gc, e, sp, p, dp, i_w, i_u, i_b, g);
            detail::gate_backward(dcell * tr.c_prev * f * (1.0 - f), e, sp, p, dp, f_w, f_u, f_b,
                                  g);
            detail::gate_backward(d_o * o * (1.0 - o), e, sp, p, dp, o_w, o_u, o_b, g);
            detail::gate_backward(dcell * i * (1.0 - gc * gc), e, sp, p, dp, c_w, c_u, c_b, g);
            break;
        }
    }
    return g;
}

}  // namespace examm
