#pragma once

// Time-series ingestion, min-max normalization, fold construction and
// synthetic benchmark series.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "examm/genome.hpp"
#include "examm/network.hpp"

namespace examm {

class DataError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// CSV cell that failed to parse. `row` is the 1-based file line (the header
/// is line 1), `column` is 1-based.
class CsvParseError : public DataError {
  public:
    CsvParseError(const std::string& source, std::size_t row, std::size_t column,
                  const std::string& cell)
        : DataError(source + ": non-numeric value '" + cell + "' at row " + std::to_string(row) +
                    ", column " + std::to_string(column)),
          row_(row),
          column_(column) {}
    std::size_t row() const { return row_; }
    std::size_t column() const { return column_; }

  private:
    std::size_t row_;
    std::size_t column_;
};

/// Named multivariate series, row-major rows × columns.
struct TimeSeries {
    std::string name;
    std::vector<std::string> columns;
    std::size_t rows = 0;
    std::vector<double> values;

    std::size_t cols() const { return columns.size(); }
    double at(std::size_t r, std::size_t c) const { return values[r * columns.size() + c]; }
    double& at(std::size_t r, std::size_t c) { return values[r * columns.size() + c]; }

    std::ptrdiff_t column_index(std::string_view col) const {
        auto it = std::find(columns.begin(), columns.end(), col);
        return it == columns.end() ? -1 : it - columns.begin();
    }
    std::vector<double> column(std::size_t c) const {
        std::vector<double> out(rows);
        for (std::size_t r = 0; r < rows; ++r) out[r] = at(r, c);
        return out;
    }
};

namespace detail {

inline std::vector<std::string> split_csv_line(std::string_view line) {
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        std::string_view cell = line.substr(start, comma == std::string_view::npos ? line.npos : comma - start);
        while (!cell.empty() && (cell.front() == ' ' || cell.front() == '\t')) cell.remove_prefix(1);
        while (!cell.empty() && (cell.back() == ' ' || cell.back() == '\t' || cell.back() == '\r'))
            cell.remove_suffix(1);
        cells.emplace_back(cell);
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return cells;
}

inline bool parse_double(const std::string& s, double& out) {
    if (s.empty()) return false;
    const char* begin = s.data();
    if (*begin == '+') ++begin;
    const auto [ptr, ec] = std::from_chars(begin, s.data() + s.size(), out);
    return ec == std::errc() && ptr == s.data() + s.size();
}

}  // namespace detail

inline TimeSeries parse_csv(std::istream& in, const std::string& name) {
    TimeSeries ts;
    ts.name = name;
    std::string line;
    std::size_t line_no = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        auto cells = detail::split_csv_line(line);
        if (!have_header) {
            if (line_no == 1 && line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF)
                cells[0].erase(0, 3);  // UTF-8 byte order mark
            ts.columns = std::move(cells);
            have_header = true;
            continue;
        }
        if (cells.size() != ts.columns.size())
            throw DataError(name + ": row " + std::to_string(line_no) + " has " +
                            std::to_string(cells.size()) + " values, header has " +
                            std::to_string(ts.columns.size()));
        for (std::size_t c = 0; c < cells.size(); ++c) {
            double v = 0.0;
            if (!detail::parse_double(cells[c], v)) throw CsvParseError(name, line_no, c + 1, cells[c]);
            ts.values.push_back(v);
        }
        ++ts.rows;
    }
    if (!have_header) throw DataError(name + ": empty file");
    if (ts.rows < 2) throw DataError(name + ": T < 2 (need at least two data rows)");
    return ts;
}

inline TimeSeries load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);
    std::string name = path;
    if (const auto slash = name.find_last_of('/'); slash != std::string::npos) name.erase(0, slash + 1);
    if (const auto dot = name.rfind(".csv"); dot != std::string::npos && dot + 4 == name.size())
        name.erase(dot);
    return parse_csv(in, name);
}

inline void write_csv(const TimeSeries& ts, std::ostream& out) {
    for (std::size_t c = 0; c < ts.cols(); ++c) out << (c ? "," : "") << ts.columns[c];
    out << '\n';
    char buf[40];
    for (std::size_t r = 0; r < ts.rows; ++r) {
        for (std::size_t c = 0; c < ts.cols(); ++c) {
            std::snprintf(buf, sizeof buf, "%.17g", ts.at(r, c));
            out << (c ? "," : "") << buf;
        }
        out << '\n';
    }
}

/// Per-column min/max scaling metadata.
struct Normalization {
    std::vector<ColumnRange> ranges;

    const ColumnRange* find(std::string_view column) const {
        for (const auto& r : ranges)
            if (r.column == column) return &r;
        return nullptr;
    }
    double normalize(std::string_view column, double x) const {
        const ColumnRange* r = find(column);
        if (!r) return x;
        const double span = r->max - r->min;
        return span > 0.0 ? (x - r->min) / span : 0.0;
    }
    double denormalize(std::string_view column, double x) const {
        const ColumnRange* r = find(column);
        if (!r) return x;
        return r->min + x * (r->max - r->min);
    }
};

/// Min/max of every column over `fit` (the training series only).
inline Normalization fit_minmax(const std::vector<TimeSeries>& fit) {
    Normalization norm;
    if (fit.empty()) return norm;
    for (const auto& col : fit.front().columns) {
        ColumnRange r{col, std::numeric_limits<double>::infinity(),
                      -std::numeric_limits<double>::infinity()};
        for (const auto& ts : fit) {
            const auto c = ts.column_index(col);
            if (c < 0) throw DataError(ts.name + ": missing column '" + col + "'");
            for (std::size_t row = 0; row < ts.rows; ++row) {
                r.min = std::min(r.min, ts.at(row, static_cast<std::size_t>(c)));
                r.max = std::max(r.max, ts.at(row, static_cast<std::size_t>(c)));
            }
        }
        norm.ranges.push_back(r);
    }
    return norm;
}

/// x' = (x - min) / (max - min); constant columns map to 0.
inline TimeSeries apply_normalization(const TimeSeries& ts, const Normalization& norm) {
    TimeSeries out = ts;
    for (std::size_t c = 0; c < ts.cols(); ++c)
        for (std::size_t r = 0; r < ts.rows; ++r)
            out.at(r, c) = norm.normalize(ts.columns[c], ts.at(r, c));
    return out;
}

inline TimeSeries apply_denormalization(const TimeSeries& ts, const Normalization& norm) {
    TimeSeries out = ts;
    for (std::size_t c = 0; c < ts.cols(); ++c)
        for (std::size_t r = 0; r < ts.rows; ++r)
            out.at(r, c) = norm.denormalize(ts.columns[c], ts.at(r, c));
    return out;
}

struct NormalizedSet {
    std::vector<TimeSeries> series;
    Normalization metadata;
};

/// Scales every series with statistics taken from `fit` only.
inline NormalizedSet normalize_minmax(const std::vector<TimeSeries>& all,
                                      const std::vector<TimeSeries>& fit) {
    NormalizedSet out;
    out.metadata = fit_minmax(fit);
    for (const auto& ts : all) out.series.push_back(apply_normalization(ts, out.metadata));
    return out;
}

struct Fold {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};

/// Consecutive groups of `fold_size` series take turns as the test split.
inline std::vector<Fold> make_folds(std::size_t n_series, std::size_t fold_size = 2) {
    if (fold_size == 0) throw DataError("fold size must be >= 1");
    if (n_series <= fold_size)
        throw DataError("need more than " + std::to_string(fold_size) +
                        " series to leave a non-empty training split");
    std::vector<Fold> folds;
    for (std::size_t start = 0; start < n_series; start += fold_size) {
        Fold f;
        for (std::size_t i = 0; i < n_series; ++i)
            (i >= start && i < start + fold_size ? f.test : f.train).push_back(i);
        folds.push_back(std::move(f));
    }
    return folds;
}

/// Selects input/output columns of a series for a genome.
inline SequenceData to_sequence(const TimeSeries& ts, const std::vector<std::string>& inputs,
                                const std::vector<std::string>& outputs) {
    std::vector<std::size_t> in_idx, out_idx;
    std::vector<std::string> missing;
    for (const auto& c : inputs) {
        const auto i = ts.column_index(c);
        if (i < 0) missing.push_back(c); else in_idx.push_back(static_cast<std::size_t>(i));
    }
    for (const auto& c : outputs) {
        const auto i = ts.column_index(c);
        if (i < 0) missing.push_back(c); else out_idx.push_back(static_cast<std::size_t>(i));
    }
    if (!missing.empty()) {
        std::string msg = ts.name + ": column mismatch; expected [";
        for (std::size_t i = 0; i < missing.size(); ++i) msg += (i ? ", " : "") + missing[i];
        msg += "] but found [";
        for (std::size_t i = 0; i < ts.columns.size(); ++i) msg += (i ? ", " : "") + ts.columns[i];
        throw DataError(msg + "]");
    }
    SequenceData d;
    d.name = ts.name;
    d.steps = ts.rows;
    d.n_in = in_idx.size();
    d.n_out = out_idx.size();
    d.x.reserve(d.steps * d.n_in);
    d.y.reserve(d.steps * d.n_out);
    for (std::size_t r = 0; r < ts.rows; ++r) {
        for (auto c : in_idx) d.x.push_back(ts.at(r, c));
        for (auto c : out_idx) d.y.push_back(ts.at(r, c));
    }
    return d;
}

// ---------------------------------------------------------------------------
// Synthetic series

enum class SynthKind { sine_mix, lagged_echo, spike_process };

inline SynthKind parse_synth_kind(std::string_view s) {
    if (s == "sine_mix") return SynthKind::sine_mix;
    if (s == "lagged_echo") return SynthKind::lagged_echo;
    if (s == "spike_process") return SynthKind::spike_process;
    throw ConfigError("unknown synthetic series kind '" + std::string(s) + "'");
}

struct SineMixParams {
    double a1, period1, phase1;
    double a2, period2, phase2;

    double component1(double t) const {
        return std::sin(2.0 * std::numbers::pi * t / period1 + phase1);
    }
    double target(double t) const {
        return a1 * component1(t) + a2 * std::sin(2.0 * std::numbers::pi * t / period2 + phase2);
    }
};

inline SineMixParams sine_mix_params(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    SineMixParams p;
    p.a1 = 0.5 + 0.5 * u(rng);
    p.period1 = 20.0 + 30.0 * u(rng);
    p.phase1 = 2.0 * std::numbers::pi * u(rng);
    p.a2 = 0.2 + 0.3 * u(rng);
    p.period2 = 5.0 + 10.0 * u(rng);
    p.phase2 = 2.0 * std::numbers::pi * u(rng);
    return p;
}

struct SynthOptions {
    SynthKind kind = SynthKind::sine_mix;
    std::size_t length = 1000;
    double noise = 0.0;
    std::uint64_t seed = 1;
    std::size_t lag = 5;  // lagged_echo delay
};

/// Deterministic given the seed.
///  - sine_mix: columns (drive, target); target is a sum of two sinusoids and
///    drive is its slower component.
///  - lagged_echo: columns (signal, echo); echo(t) = signal(t - lag).
///  - spike_process: columns (load, regime, target); step-wise regimes with
///    short spikes triggered by load excursions.
inline TimeSeries synth_series(const SynthOptions& opt) {
    if (opt.length < 2) throw DataError("synthetic series length must be >= 2");
    std::mt19937_64 rng(opt.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto noise = [&] { return opt.noise > 0.0 ? opt.noise * gauss(rng) : 0.0; };

    TimeSeries ts;
    ts.rows = opt.length;
    switch (opt.kind) {
        case SynthKind::sine_mix: {
            ts.name = "sine_mix_" + std::to_string(opt.seed);
            ts.columns = {"drive", "target"};
            const auto p = sine_mix_params(opt.seed);
            for (std::size_t t = 0; t < opt.length; ++t) {
                const double tt = static_cast<double>(t);
                ts.values.push_back(p.component1(tt) + noise());
                ts.values.push_back(p.target(tt) + noise());
            }
            break;
        }
        case SynthKind::lagged_echo: {
            ts.name = "lagged_echo_" + std::to_string(opt.seed);
            ts.columns = {"signal", "echo"};
            std::vector<double> signal(opt.length + opt.lag);
            for (auto& s : signal) s = 2.0 * unit(rng) - 1.0;
            for (std::size_t t = 0; t < opt.length; ++t) {
                ts.values.push_back(signal[t + opt.lag]);
                ts.values.push_back(signal[t] + noise());
            }
            break;
        }
        case SynthKind::spike_process: {
            ts.name = "spike_process_" + std::to_string(opt.seed);
            ts.columns = {"load", "regime", "target"};
            double load = 0.0;
            double regime = 0.5;
            int spike = 0;
            for (std::size_t t = 0; t < opt.length; ++t) {
                load = 0.95 * load + 0.3 * gauss(rng);
                if (unit(rng) < 0.01) regime = 0.2 + 0.6 * unit(rng);
                if (spike == 0 && std::abs(load) > 1.5) spike = 5;
                double target = regime + 0.1 * std::tanh(load);
                if (spike > 0) {
                    target += load > 0 ? 1.0 : -0.8;
                    --spike;
                }
                ts.values.push_back(load + noise());
                ts.values.push_back(regime);
                ts.values.push_back(target + noise());
            }
            break;
        }
    }
    return ts;
}

}  // namespace examm
