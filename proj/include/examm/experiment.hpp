#pragma once

// Experiment runner: run configuration, experiment labels, artifact files,
// fold x repeat matrices and the deviations-from-mean ranking.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "examm/genome_io.hpp"
#include "examm/island.hpp"
#include "examm/timeseries.hpp"

namespace examm {

// ---------------------------------------------------------------------------
// Labels: "simple", "all", "<cell>", "<cell>+simple", each optionally "+rec".

struct ExperimentKind {
    std::vector<CellKind> cells;
    bool deep_recurrence = false;
    std::string label;
};

inline ExperimentKind parse_experiment_label(std::string_view label) {
    std::vector<std::string> parts;
    std::string cur;
    for (char ch : label) {
        if (ch == '+') {
            parts.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    parts.push_back(cur);

    auto bad = [&] { return ConfigError("bad experiment label '" + std::string(label) + "'"); };
    ExperimentKind k;
    const std::string& base = parts[0];
    std::size_t i = 1;
    if (base == "simple") {
        k.cells = {CellKind::simple};
    } else if (base == "all") {
        k.cells.assign(kAllCellKinds.begin(), kAllCellKinds.end());
    } else if (auto c = parse_cell_kind(base); c && *c != CellKind::simple) {
        k.cells = {*c};
        if (i < parts.size() && parts[i] == "simple") {
            k.cells.insert(k.cells.begin(), CellKind::simple);
            ++i;
        }
    } else {
        throw bad();
    }
    if (i < parts.size() && parts[i] == "rec") {
        k.deep_recurrence = true;
        ++i;
    }
    if (i != parts.size()) throw bad();

    k.label = base == "delta_rnn" ? "delta" : base;
    if (k.cells.size() == 2) k.label += "+simple";
    if (k.deep_recurrence) k.label += "+rec";
    return k;
}

/// The 24 settings of the full study.
inline std::vector<std::string> standard_experiment_labels() {
    std::vector<std::string> out;
    for (const char* rec : {"", "+rec"}) {
        for (const char* c : {"delta", "gru", "lstm", "mgu", "ugrnn"}) out.push_back(std::string(c) + rec);
        out.push_back(std::string("simple") + rec);
        out.push_back(std::string("all") + rec);
        for (const char* c : {"delta", "gru", "lstm", "mgu", "ugrnn"})
            out.push_back(std::string(c) + "+simple" + rec);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Run configuration

enum class NormalizeMode { train, global, none };

inline NormalizeMode parse_normalize_mode(std::string_view s) {
    if (s == "train") return NormalizeMode::train;
    if (s == "global") return NormalizeMode::global;
    if (s == "none") return NormalizeMode::none;
    throw ConfigError("unknown normalize mode '" + std::string(s) + "'");
}

inline std::string_view to_string(NormalizeMode m) {
    switch (m) {
        case NormalizeMode::train: return "train";
        case NormalizeMode::global: return "global";
        case NormalizeMode::none: return "none";
    }
    return "train";
}

struct RunConfig {
    // Data: either `data` plus a fold index, or explicit train/test lists.
    std::vector<std::string> data;
    std::vector<std::string> train;
    std::vector<std::string> test;
    std::size_t fold_size = 2;
    std::size_t fold = 0;
    std::vector<std::string> inputs;  // empty: every column
    std::vector<std::string> outputs;
    NormalizeMode normalize = NormalizeMode::train;

    std::string experiment = "all+rec";
    int max_time_skip = kDefaultMaxTimeSkip;
    bool recurrent_edges = true;

    std::size_t islands = 10;
    std::size_t population = 5;
    std::size_t budget = 2000;
    double mutation_rate = 0.70;
    double intra_rate = 0.20;
    double inter_rate = 0.10;
    std::map<std::string, double> mutation_weights;  // overrides by operator name
    int mutations_per_child = 1;

    TrainConfig training;

    std::uint64_t seed = 1;
    std::size_t workers = 1;
    std::size_t window = 4;
    Scheduling scheduling = Scheduling::ordered;
    bool record_wallclock = false;
    std::string out = "examm_out";

    // Matrix mode
    std::vector<std::string> experiments;
    std::size_t repeats = 1;

    void check() const {
        parse_experiment_label(experiment);
        for (const auto& e : experiments) parse_experiment_label(e);
        if (max_time_skip < 1) throw ConfigError("max_time_skip must be >= 1");
        if (budget < 1) throw ConfigError("budget must be >= 1");
        if (outputs.empty()) throw ConfigError("no output columns configured");
        for (const auto& [name, w] : mutation_weights) {
            const auto op = parse_operator(name);
            if (!op || *op == OperatorKind::crossover_intra || *op == OperatorKind::crossover_inter)
                throw ConfigError("unknown mutation operator '" + name + "'");
            if (!(w >= 0.0 && w <= 1.0)) throw ConfigError("mutation probability for " + name + " not in [0,1]");
        }
        engine_config().check();
        training.check();
    }

    /// Engine settings with the experiment label applied. Without "+rec",
    /// recurrent edges are limited to a single step.
    EngineConfig engine_config() const {
        const auto kind = parse_experiment_label(experiment);
        EngineConfig e;
        e.islands = islands;
        e.capacity = population;
        e.budget = budget;
        e.mutation_rate = mutation_rate;
        e.intra_rate = intra_rate;
        e.inter_rate = inter_rate;
        e.mutation.allowed_cells = kind.cells;
        e.mutation.max_time_skip = kind.deep_recurrence ? max_time_skip : 1;
        e.mutation.recurrent_edges = recurrent_edges;
        e.mutation.mutations_per_child = mutations_per_child;
        e.mutation.lstm_forget_bias = training.lstm_forget_bias;
        for (const auto& [name, w] : mutation_weights)
            if (auto op = parse_operator(name)) e.mutation.weight(*op) = w;
        e.scheduling = scheduling;
        e.window = window;
        e.record_wallclock = record_wallclock;
        return e;
    }
};

inline nlohmann::json to_json(const RunConfig& c) {
    nlohmann::json j;
    j["data"] = c.data;
    j["train"] = c.train;
    j["test"] = c.test;
    j["fold_size"] = c.fold_size;
    j["fold"] = c.fold;
    j["inputs"] = c.inputs;
    j["outputs"] = c.outputs;
    j["normalize"] = to_string(c.normalize);
    j["experiment"] = c.experiment;
    j["max_time_skip"] = c.max_time_skip;
    j["recurrent_edges"] = c.recurrent_edges;
    j["islands"] = c.islands;
    j["population"] = c.population;
    j["budget"] = c.budget;
    j["rates"] = {{"mutation", c.mutation_rate}, {"intra", c.intra_rate}, {"inter", c.inter_rate}};
    j["mutation_weights"] = c.mutation_weights;
    j["mutations_per_child"] = c.mutations_per_child;
    j["training"] = {{"learning_rate", c.training.learning_rate},
                     {"momentum", c.training.momentum},
                     {"epochs", c.training.epochs},
                     {"high_threshold", c.training.high_threshold},
                     {"low_threshold", c.training.low_threshold},
                     {"metric", to_string(c.training.metric)},
                     {"lstm_forget_bias", c.training.lstm_forget_bias},
                     {"truncation", c.training.truncation}};
    j["seed"] = c.seed;
    j["workers"] = c.workers;
    j["window"] = c.window;
    j["scheduling"] = c.scheduling == Scheduling::ordered ? "ordered" : "async";
    j["record_wallclock"] = c.record_wallclock;
    j["out"] = c.out;
    j["experiments"] = c.experiments;
    j["repeats"] = c.repeats;
    return j;
}

/// Fills `c` from a JSON document; absent keys keep their current values.
inline void merge_json(RunConfig& c, const nlohmann::json& j) {
    static const std::set<std::string> known = {
        "data", "train", "test", "fold_size", "fold", "inputs", "outputs", "normalize",
        "experiment", "max_time_skip", "recurrent_edges", "islands", "population", "budget",
        "rates", "mutation_weights", "mutations_per_child", "training", "seed", "workers",
        "window", "scheduling", "record_wallclock", "out", "experiments", "repeats"};
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    for (const auto& [key, _] : j.items())
        if (!known.count(key)) throw ConfigError("unknown config key '" + key + "'");
    auto get = [&](const char* key, auto& field) {
        if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
    };
    try {
        get("data", c.data);
        get("train", c.train);
        get("test", c.test);
        get("fold_size", c.fold_size);
        get("fold", c.fold);
        get("inputs", c.inputs);
        get("outputs", c.outputs);
        if (j.contains("normalize")) c.normalize = parse_normalize_mode(j.at("normalize").get<std::string>());
        get("experiment", c.experiment);
        get("max_time_skip", c.max_time_skip);
        get("recurrent_edges", c.recurrent_edges);
        get("islands", c.islands);
        get("population", c.population);
        get("budget", c.budget);
        if (j.contains("rates")) {
            const auto& r = j.at("rates");
            if (r.contains("mutation")) c.mutation_rate = r.at("mutation").get<double>();
            if (r.contains("intra")) c.intra_rate = r.at("intra").get<double>();
            if (r.contains("inter")) c.inter_rate = r.at("inter").get<double>();
        }
        get("mutation_weights", c.mutation_weights);
        get("mutations_per_child", c.mutations_per_child);
        if (j.contains("training")) {
            const auto& t = j.at("training");
            auto tget = [&](const char* key, auto& field) {
                if (t.contains(key)) field = t.at(key).get<std::decay_t<decltype(field)>>();
            };
            tget("learning_rate", c.training.learning_rate);
            tget("momentum", c.training.momentum);
            tget("epochs", c.training.epochs);
            tget("high_threshold", c.training.high_threshold);
            tget("low_threshold", c.training.low_threshold);
            if (t.contains("metric")) c.training.metric = parse_metric(t.at("metric").get<std::string>());
            tget("lstm_forget_bias", c.training.lstm_forget_bias);
            tget("truncation", c.training.truncation);
        }
        get("seed", c.seed);
        get("workers", c.workers);
        get("window", c.window);
        if (j.contains("scheduling")) {
            const auto s = j.at("scheduling").get<std::string>();
            if (s == "ordered") c.scheduling = Scheduling::ordered;
            else if (s == "async") c.scheduling = Scheduling::async;
            else throw ConfigError("unknown scheduling '" + s + "'");
        }
        get("record_wallclock", c.record_wallclock);
        get("out", c.out);
        get("experiments", c.experiments);
        get("repeats", c.repeats);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
}

inline RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path);
    RunConfig c;
    try {
        merge_json(c, nlohmann::json::parse(in));
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(path + ": " + e.what());
    }
    return c;
}

/// EXAMM_SEED, when set, replaces the configured seed.
inline void apply_seed_env(RunConfig& c) {
    if (const char* s = std::getenv("EXAMM_SEED"); s && *s) {
        char* end = nullptr;
        const auto v = std::strtoull(s, &end, 10);
        if (*end != '\0') throw ConfigError("EXAMM_SEED is not an integer");
        c.seed = v;
    }
}

// ---------------------------------------------------------------------------
// Data preparation

struct Dataset {
    std::vector<TimeSeries> train;
    std::vector<TimeSeries> test;
};

inline Dataset split_fold(const std::vector<TimeSeries>& all, std::size_t fold_size, std::size_t fold) {
    const auto folds = make_folds(all.size(), fold_size);
    if (fold >= folds.size())
        throw ConfigError("fold " + std::to_string(fold) + " out of range (" +
                          std::to_string(folds.size()) + " folds)");
    Dataset d;
    for (auto i : folds[fold].train) d.train.push_back(all[i]);
    for (auto i : folds[fold].test) d.test.push_back(all[i]);
    return d;
}

inline Dataset load_dataset(const RunConfig& c) {
    Dataset d;
    if (!c.data.empty()) {
        std::vector<TimeSeries> all;
        for (const auto& p : c.data) all.push_back(load_csv(p));
        return split_fold(all, c.fold_size, c.fold);
    }
    if (c.train.empty() || c.test.empty()) throw ConfigError("config needs 'data' or both 'train' and 'test'");
    for (const auto& p : c.train) d.train.push_back(load_csv(p));
    for (const auto& p : c.test) d.test.push_back(load_csv(p));
    return d;
}

struct PreparedData {
    std::vector<SequenceData> train, test;
    std::vector<TimeSeries> test_raw;
    std::vector<std::string> inputs, outputs;
    Normalization norm;
};

inline PreparedData prepare(const RunConfig& c, const Dataset& d) {
    if (d.train.empty() || d.test.empty()) throw DataError("empty train or test split");
    PreparedData p;
    p.inputs = c.inputs.empty() ? d.train.front().columns : c.inputs;
    p.outputs = c.outputs;
    switch (c.normalize) {
        case NormalizeMode::train: p.norm = fit_minmax(d.train); break;
        case NormalizeMode::global: {
            auto all = d.train;
            all.insert(all.end(), d.test.begin(), d.test.end());
            p.norm = fit_minmax(all);
            break;
        }
        case NormalizeMode::none: break;
    }
    for (const auto& ts : d.train) p.train.push_back(to_sequence(apply_normalization(ts, p.norm), p.inputs, p.outputs));
    for (const auto& ts : d.test) p.test.push_back(to_sequence(apply_normalization(ts, p.norm), p.inputs, p.outputs));
    p.test_raw = d.test;
    return p;
}

inline DataBinding make_binding(const PreparedData& p) {
    DataBinding b;
    b.inputs = p.inputs;
    b.outputs = p.outputs;
    std::set<std::string> used(p.inputs.begin(), p.inputs.end());
    used.insert(p.outputs.begin(), p.outputs.end());
    for (const auto& r : p.norm.ranges)
        if (used.count(r.column)) b.scaling.push_back(r);
    return b;
}

// ---------------------------------------------------------------------------
// Prediction

struct PredictionRow {
    std::size_t t = 0;  // index of the predicted step
    std::vector<double> actual, predicted;
};

struct PredictionResult {
    std::vector<PredictionRow> rows;  // original scale
    double mae = 0.0;      // on the genome's (normalized) scale, as in evaluate()
    double mse = 0.0;
    double mae_raw = 0.0;  // on the original scale
};

/// Applies a saved genome to a raw series using the scaling it carries.
inline PredictionResult predict(const Genome& g, const TimeSeries& raw) {
    if (g.binding.outputs.empty()) throw DataError("genome carries no column binding");
    Normalization norm{g.binding.scaling};
    const auto seq = to_sequence(apply_normalization(raw, norm), g.binding.inputs, g.binding.outputs);
    const auto pred = forward_pass(g, seq);
    PredictionResult r;
    const std::size_t n_out = seq.n_out;
    for (std::size_t t = 0; t + 1 < seq.steps; ++t) {
        PredictionRow row;
        row.t = t + 1;
        for (std::size_t j = 0; j < n_out; ++j) {
            const auto& col = g.binding.outputs[j];
            const double p = pred[t * n_out + j];
            const double d = p - seq.target(t + 1, j);
            r.mae += std::abs(d);
            r.mse += d * d;
            row.predicted.push_back(norm.denormalize(col, p));
            row.actual.push_back(norm.denormalize(col, seq.target(t + 1, j)));
            r.mae_raw += std::abs(row.predicted.back() - row.actual.back());
        }
        r.rows.push_back(std::move(row));
    }
    const double n = static_cast<double>((seq.steps - 1) * n_out);
    r.mae /= n;
    r.mse /= n;
    r.mae_raw /= n;
    return r;
}

inline void write_predictions(std::ostream& out, const PredictionResult& r,
                              const std::string& series = "") {
    char buf[32];
    auto num = [&](double x) {
        std::snprintf(buf, sizeof buf, "%.10g", x);
        return std::string(buf);
    };
    for (const auto& row : r.rows) {
        if (!series.empty()) out << series << ',';
        out << row.t;
        for (std::size_t j = 0; j < row.actual.size(); ++j)
            out << ',' << num(row.actual[j]) << ',' << num(row.predicted[j]) << ','
                << num(std::abs(row.predicted[j] - row.actual[j]));
        out << '\n';
    }
}

inline std::string prediction_header(const std::vector<std::string>& outputs, bool with_series) {
    std::string h = with_series ? "series,t" : "t";
    if (outputs.size() == 1) return h + ",actual,predicted,abs_error";
    for (const auto& c : outputs) h += ",actual_" + c + ",predicted_" + c + ",abs_error_" + c;
    return h;
}

// ---------------------------------------------------------------------------
// Single run

struct ExperimentRecord {
    std::string label;
    std::size_t fold = 0;
    std::size_t repeat = 0;
    double best_fitness = 0.0;
    double mean_fitness = 0.0;  // over the final population of every island
};

struct ExperimentResult {
    ExperimentRecord record;
    RunReport report;
};

namespace detail {

inline void write_text(const std::filesystem::path& p, const std::string& s) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    out << s;
}

}  // namespace detail

/// Evolves on `data` and, when `out_dir` is non-empty, writes every artifact
/// there. `train_fn` replaces the default trainer (used for instrumentation).
inline ExperimentResult run_experiment(const RunConfig& c, const Dataset& data,
                                       const std::string& out_dir, std::size_t repeat = 0,
                                       const TrainFn& train_fn = {}) {
    c.check();
    const auto prepared = prepare(c, data);
    const auto kind = parse_experiment_label(c.experiment);
    Master master(prepared.inputs.size(), prepared.outputs.size(), c.engine_config(), c.seed,
                  make_binding(prepared));
    const TrainFn trainer = train_fn ? train_fn : make_trainer(prepared.train, prepared.test, c.training);

    ExperimentResult res;
    res.report = run(master, c.workers, trainer);
    const auto& rep = res.report;
    res.record.label = kind.label;
    res.record.fold = c.fold;
    res.record.repeat = repeat;
    res.record.best_fitness = rep.best.fitness;
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& isl : rep.islands)
        for (const auto& g : isl.population) {
            sum += g.fitness;
            ++n;
        }
    res.record.mean_fitness = n ? sum / static_cast<double>(n) : rep.best.fitness;
    if (out_dir.empty()) return res;

    namespace fs = std::filesystem;
    const fs::path dir(out_dir);
    fs::create_directories(dir / "islands");
    {
        std::ostringstream s;
        write_fitness_log(s, rep.fitness_log);
        detail::write_text(dir / "fitness_log.csv", s.str());
    }
    {
        std::ostringstream s;
        s << "genome_id,epoch,loss\n";
        for (const auto& [id, losses] : rep.training_log)
            for (std::size_t e = 0; e < losses.size(); ++e)
                s << id << ',' << e << ',' << format_double(losses[e]) << '\n';
        detail::write_text(dir / "training_log.csv", s.str());
    }
    save_genome(rep.best, (dir / "best_genome.exmg").string());
    detail::write_text(dir / "best_genome.dot", export_dot(rep.best));
    detail::write_text(dir / "best_genome.json", to_json(rep.best).dump(2) + "\n");
    for (const auto& g : rep.island_best)
        save_genome(g, (dir / "islands" / ("island_" + std::to_string(g.island) + ".exmg")).string());
    {
        std::ostringstream s;
        s << prediction_header(prepared.outputs, true) << '\n';
        for (const auto& ts : prepared.test_raw)
            write_predictions(s, predict(rep.best, ts), ts.name);
        detail::write_text(dir / "predictions.csv", s.str());
    }
    {
        nlohmann::json j;
        j["label"] = res.record.label;
        j["fold"] = res.record.fold;
        j["repeat"] = res.record.repeat;
        j["seed"] = c.seed;
        j["best_fitness"] = res.record.best_fitness;
        j["mean_fitness"] = res.record.mean_fitness;
        j["metric"] = to_string(c.training.metric);
        j["seeds"] = rep.seeds;
        j["generated"] = rep.generated;
        j["failures"] = rep.failures;
        j["discarded"] = rep.discarded;
        for (const auto& [cls, count] : rep.class_counts) j["operator_classes"][std::string(to_string(cls))] = count;
        for (const auto& g : rep.island_best)
            j["island_best"].push_back({{"island", g.island}, {"genome_id", g.generation_id}, {"fitness", g.fitness}});
        j["best"] = {{"genome_id", rep.best.generation_id},
                     {"island", rep.best.island},
                     {"nodes", rep.best.enabled_node_count()},
                     {"edges", rep.best.enabled_edge_count()},
                     {"rec_edges", rep.best.enabled_rec_edge_count()}};
        detail::write_text(dir / "report.json", j.dump(2) + "\n");
    }
    detail::write_text(dir / "config.json", to_json(c).dump(2) + "\n");
    return res;
}

// ---------------------------------------------------------------------------
// Ranking

enum class RankCase { average, best };

struct RankRow {
    std::string label;
    double deviations = 0.0;
};

/// Per fold, the mean and (population) standard deviation of every run's
/// best fitness across all experiments and repeats. Each experiment's
/// statistic for the fold is the mean (average case) or minimum (best case)
/// over its repeats, expressed in standard deviations from that mean and
/// averaged over folds. Sorted ascending; lower is better.
inline std::vector<RankRow> rank_experiments(const std::vector<ExperimentRecord>& records, RankCase which) {
    std::map<std::size_t, std::map<std::string, std::vector<double>>> by_fold;
    for (const auto& r : records) by_fold[r.fold][r.label].push_back(r.best_fitness);

    std::map<std::string, std::pair<double, std::size_t>> acc;
    for (const auto& [fold, experiments] : by_fold) {
        if (experiments.size() < 2)
            throw ConfigError("fold " + std::to_string(fold) + " has fewer than 2 experiments");
        double sum = 0.0;
        std::size_t n = 0;
        for (const auto& [label, vals] : experiments)
            for (double v : vals) {
                sum += v;
                ++n;
            }
        const double mean = sum / static_cast<double>(n);
        double var = 0.0;
        for (const auto& [label, vals] : experiments)
            for (double v : vals) var += (v - mean) * (v - mean);
        const double sd = std::sqrt(var / static_cast<double>(n));
        for (const auto& [label, vals] : experiments) {
            double stat = 0.0;
            if (which == RankCase::best) {
                stat = *std::min_element(vals.begin(), vals.end());
            } else {
                for (double v : vals) stat += v;
                stat /= static_cast<double>(vals.size());
            }
            auto& a = acc[label];
            a.first += sd > 0.0 ? (stat - mean) / sd : 0.0;
            a.second += 1;
        }
    }
    std::vector<RankRow> out;
    for (const auto& [label, a] : acc) out.push_back({label, a.first / static_cast<double>(a.second)});
    std::stable_sort(out.begin(), out.end(),
                     [](const RankRow& x, const RankRow& y) { return x.deviations < y.deviations; });
    return out;
}

inline void write_records(std::ostream& out, const std::vector<ExperimentRecord>& records) {
    out << "label,fold,repeat,best_fitness,mean_fitness\n";
    for (const auto& r : records)
        out << r.label << ',' << r.fold << ',' << r.repeat << ',' << format_double(r.best_fitness) << ','
            << format_double(r.mean_fitness) << '\n';
}

inline std::vector<ExperimentRecord> read_records(std::istream& in, const std::string& name) {
    const auto lines = [&] {
        std::vector<std::string> lines;
        std::string line;
        while (std::getline(in, line)) {
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (!line.empty()) lines.push_back(line);
        }
        return lines;
    }();
    if (lines.empty()) throw DataError(name + ": empty records file");
    const auto header = detail::split_csv_line(lines[0]);
    auto col = [&](const char* c) {
        auto it = std::find(header.begin(), header.end(), c);
        if (it == header.end()) throw DataError(name + ": missing column '" + c + "'");
        return static_cast<std::size_t>(it - header.begin());
    };
    const auto c_label = col("label"), c_fold = col("fold"), c_best = col("best_fitness");
    const auto c_rep = std::find(header.begin(), header.end(), "repeat") - header.begin();
    const auto c_mean = std::find(header.begin(), header.end(), "mean_fitness") - header.begin();
    std::vector<ExperimentRecord> out;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto cells = detail::split_csv_line(lines[i]);
        if (cells.size() != header.size())
            throw DataError(name + ": row " + std::to_string(i + 1) + " has " + std::to_string(cells.size()) +
                            " values, header has " + std::to_string(header.size()));
        ExperimentRecord r;
        r.label = cells[c_label];
        double v = 0.0;
        auto num = [&](std::size_t c) {
            if (!detail::parse_double(cells[c], v)) throw CsvParseError(name, i + 1, c + 1, cells[c]);
            return v;
        };
        r.fold = static_cast<std::size_t>(num(c_fold));
        r.best_fitness = num(c_best);
        if (c_rep < static_cast<std::ptrdiff_t>(header.size())) r.repeat = static_cast<std::size_t>(num(static_cast<std::size_t>(c_rep)));
        if (c_mean < static_cast<std::ptrdiff_t>(header.size())) r.mean_fitness = num(static_cast<std::size_t>(c_mean));
        out.push_back(r);
    }
    return out;
}

inline void write_ranking(std::ostream& out, const std::vector<RankRow>& rows) {
    out << "rank,label,deviations\n";
    for (std::size_t i = 0; i < rows.size(); ++i)
        out << i + 1 << ',' << rows[i].label << ',' << format_double(rows[i].deviations) << '\n';
}

// ---------------------------------------------------------------------------
// Matrix: every experiment over every fold and repeat, run one after another.

inline std::uint64_t matrix_seed(std::uint64_t base, std::size_t fold, std::size_t repeat) {
    // splitmix64 over the (fold, repeat) pair; every label shares the stream.
    std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (1 + fold * 1000003ULL + repeat);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

inline std::vector<ExperimentRecord> run_matrix(const RunConfig& base, const std::vector<TimeSeries>& all,
                                                const std::string& out_dir) {
    const auto labels = base.experiments.empty() ? std::vector<std::string>{base.experiment} : base.experiments;
    const auto folds = make_folds(all.size(), base.fold_size);
    std::vector<ExperimentRecord> records;
    for (std::size_t f = 0; f < folds.size(); ++f) {
        const Dataset d = split_fold(all, base.fold_size, f);
        for (std::size_t r = 0; r < base.repeats; ++r) {
            for (const auto& label : labels) {
                RunConfig c = base;
                c.experiment = label;
                c.fold = f;
                c.seed = matrix_seed(base.seed, f, r);
                c.experiments.clear();
                c.repeats = 1;
                const auto canon = parse_experiment_label(label).label;
                std::string dir;
                if (!out_dir.empty())
                    dir = (std::filesystem::path(out_dir) / canon / ("fold_" + std::to_string(f)) /
                           ("repeat_" + std::to_string(r)))
                              .string();
                c.out = dir;
                records.push_back(run_experiment(c, d, dir, r).record);
            }
        }
    }
    if (!out_dir.empty()) {
        std::ostringstream s;
        write_records(s, records);
        detail::write_text(std::filesystem::path(out_dir) / "records.csv", s.str());
        if (labels.size() >= 2) {
            std::ostringstream a, b;
            write_ranking(a, rank_experiments(records, RankCase::average));
            write_ranking(b, rank_experiments(records, RankCase::best));
            detail::write_text(std::filesystem::path(out_dir) / "ranking_average.csv", a.str());
            detail::write_text(std::filesystem::path(out_dir) / "ranking_best.csv", b.str());
        }
        detail::write_text(std::filesystem::path(out_dir) / "config.json", to_json(base).dump(2) + "\n");
    }
    return records;
}

}  // namespace examm
