// Command-line front end: evolve, predict, rank, synth, inspect.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "examm/examm.hpp"

namespace fs = std::filesystem;
using namespace examm;

namespace {

struct EvolveArgs {
    std::string config;
    std::vector<std::string> data, train, test, inputs, outputs, experiments;
    std::size_t fold = 0, fold_size = 2, islands = 0, population = 0, budget = 0, workers = 0, window = 0,
                repeats = 0;
    std::string normalize, experiment, metric, out;
    int max_time_skip = 0, epochs = 0;
    double mutation_rate = 0, intra_rate = 0, inter_rate = 0, learning_rate = 0, momentum = 0;
    std::uint64_t seed = 0;
    bool no_recurrent = false, async = false, matrix = false, wallclock = false;
};

void add_evolve_flags(CLI::App* cmd, EvolveArgs& a) {
    cmd->add_option("--config", a.config, "JSON run configuration")->check(CLI::ExistingFile);
    cmd->add_option("--data", a.data, "series CSV files, split into folds");
    cmd->add_option("--train", a.train, "training series CSV files");
    cmd->add_option("--test", a.test, "test series CSV files");
    cmd->add_option("--fold", a.fold, "fold used as the test split");
    cmd->add_option("--fold-size", a.fold_size, "series per fold");
    cmd->add_option("--inputs", a.inputs, "input columns (default: all)");
    cmd->add_option("--outputs", a.outputs, "output columns");
    cmd->add_option("--normalize", a.normalize, "train | global | none");
    cmd->add_option("--experiment", a.experiment, "label such as simple+rec or lstm+simple");
    cmd->add_option("--max-time-skip", a.max_time_skip, "largest recurrent time skip");
    cmd->add_flag("--no-recurrent-edges", a.no_recurrent, "never add recurrent edges");
    cmd->add_option("--islands", a.islands);
    cmd->add_option("--population", a.population, "genomes per island");
    cmd->add_option("--budget", a.budget, "genomes generated after warm-up");
    cmd->add_option("--mutation-rate", a.mutation_rate);
    cmd->add_option("--intra-rate", a.intra_rate);
    cmd->add_option("--inter-rate", a.inter_rate);
    cmd->add_option("--epochs", a.epochs);
    cmd->add_option("--learning-rate", a.learning_rate);
    cmd->add_option("--momentum", a.momentum);
    cmd->add_option("--metric", a.metric, "mae | mse");
    cmd->add_option("--seed", a.seed);
    cmd->add_option("--workers", a.workers);
    cmd->add_option("--window", a.window, "in-flight candidates (ordered scheduling)");
    cmd->add_flag("--async", a.async, "commit results in completion order");
    cmd->add_flag("--record-wallclock", a.wallclock, "fill the wallclock_ms log column");
    cmd->add_option("--out", a.out, "output directory");
    cmd->add_flag("--matrix", a.matrix, "run every experiment over every fold and repeat");
    cmd->add_option("--experiments", a.experiments, "labels for --matrix (or 'standard')");
    cmd->add_option("--repeats", a.repeats, "repeats per fold for --matrix");
}

RunConfig build_config(const CLI::App* cmd, const EvolveArgs& a) {
    RunConfig c = a.config.empty() ? RunConfig{} : load_run_config(a.config);
    auto given = [&](const char* flag) { return cmd->count(flag) > 0; };
    if (given("--data")) c.data = a.data;
    if (given("--train")) c.train = a.train;
    if (given("--test")) c.test = a.test;
    if (given("--fold")) c.fold = a.fold;
    if (given("--fold-size")) c.fold_size = a.fold_size;
    if (given("--inputs")) c.inputs = a.inputs;
    if (given("--outputs")) c.outputs = a.outputs;
    if (given("--normalize")) c.normalize = parse_normalize_mode(a.normalize);
    if (given("--experiment")) c.experiment = a.experiment;
    if (given("--max-time-skip")) c.max_time_skip = a.max_time_skip;
    if (a.no_recurrent) c.recurrent_edges = false;
    if (given("--islands")) c.islands = a.islands;
    if (given("--population")) c.population = a.population;
    if (given("--budget")) c.budget = a.budget;
    if (given("--mutation-rate")) c.mutation_rate = a.mutation_rate;
    if (given("--intra-rate")) c.intra_rate = a.intra_rate;
    if (given("--inter-rate")) c.inter_rate = a.inter_rate;
    if (given("--epochs")) c.training.epochs = a.epochs;
    if (given("--learning-rate")) c.training.learning_rate = a.learning_rate;
    if (given("--momentum")) c.training.momentum = a.momentum;
    if (given("--metric")) c.training.metric = parse_metric(a.metric);
    if (given("--seed")) c.seed = a.seed;
    if (given("--workers")) c.workers = a.workers;
    if (given("--window")) c.window = a.window;
    if (a.async) c.scheduling = Scheduling::async;
    if (a.wallclock) c.record_wallclock = true;
    if (given("--out")) c.out = a.out;
    if (given("--experiments")) {
        c.experiments.clear();
        for (const auto& e : a.experiments) {
            if (e == "standard") {
                const auto all = standard_experiment_labels();
                c.experiments.insert(c.experiments.end(), all.begin(), all.end());
            } else {
                c.experiments.push_back(e);
            }
        }
    }
    if (given("--repeats")) c.repeats = a.repeats;
    apply_seed_env(c);
    return c;
}

int cmd_evolve(const CLI::App* cmd, const EvolveArgs& a) {
    RunConfig c = build_config(cmd, a);
    c.check();
    if (a.matrix) {
        if (c.data.empty()) throw ConfigError("--matrix needs --data");
        std::vector<TimeSeries> all;
        for (const auto& p : c.data) all.push_back(load_csv(p));
        const auto records = run_matrix(c, all, c.out);
        std::cout << "runs: " << records.size() << "\nrecords: " << (fs::path(c.out) / "records.csv").string()
                  << '\n';
        return 0;
    }
    const Dataset d = load_dataset(c);
    const auto res = run_experiment(c, d, c.out);
    std::cout << "experiment: " << res.record.label << "\nbest fitness (" << to_string(c.training.metric)
              << "): " << format_double(res.record.best_fitness) << "\ngenerated: " << res.report.generated
              << " (+" << res.report.seeds << " seeds)\noutput: " << c.out << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Evolve recurrent networks for time-series prediction"};
    app.require_subcommand(1);

    EvolveArgs ev;
    auto* evolve = app.add_subcommand("evolve", "run island evolution and write results under --out");
    add_evolve_flags(evolve, ev);

    std::string genome_path, series_path, out_path;
    auto* predict_cmd = app.add_subcommand("predict", "apply a saved genome to a series");
    predict_cmd->add_option("genome", genome_path, "genome file (.exmg)")->required()->check(CLI::ExistingFile);
    predict_cmd->add_option("series", series_path, "series CSV")->required()->check(CLI::ExistingFile);
    predict_cmd->add_option("-o,--out", out_path, "prediction CSV (default: stdout)");

    std::vector<std::string> record_paths;
    std::string rank_case = "average";
    auto* rank = app.add_subcommand("rank", "deviations-from-mean table from run records");
    rank->add_option("records", record_paths, "records CSV (label,fold,repeat,best_fitness,...)")
        ->required()
        ->check(CLI::ExistingFile);
    rank->add_option("--case", rank_case, "average | best")->check(CLI::IsMember({"average", "best"}));
    rank->add_option("-o,--out", out_path, "ranking CSV (default: stdout)");

    std::string synth_kind = "sine_mix";
    SynthOptions so;
    std::size_t synth_count = 1;
    auto* synth = app.add_subcommand("synth", "write synthetic benchmark series");
    synth->add_option("--kind", synth_kind, "sine_mix | lagged_echo | spike_process")
        ->check(CLI::IsMember({"sine_mix", "lagged_echo", "spike_process"}));
    synth->add_option("--length", so.length);
    synth->add_option("--noise", so.noise, "Gaussian noise standard deviation");
    synth->add_option("--seed", so.seed);
    synth->add_option("--lag", so.lag, "lagged_echo delay");
    synth->add_option("--count", synth_count, "number of series (seeds seed, seed+1, ...)");
    synth->add_option("-o,--out", out_path, "output directory")->required();

    std::string format = "summary";
    auto* inspect = app.add_subcommand("inspect", "print a genome as a summary, DOT or JSON");
    inspect->add_option("genome", genome_path)->required()->check(CLI::ExistingFile);
    inspect->add_option("--format", format, "summary | dot | json")->check(CLI::IsMember({"summary", "dot", "json"}));
    inspect->add_option("-o,--out", out_path, "output file (default: stdout)");

    CLI11_PARSE(app, argc, argv);

    auto emit = [&](const std::string& text) {
        if (out_path.empty()) {
            std::cout << text;
            return;
        }
        std::ofstream f(out_path, std::ios::binary);
        if (!f) throw std::runtime_error("cannot write " + out_path);
        f << text;
    };

    try {
        if (*evolve) return cmd_evolve(evolve, ev);

        if (*predict_cmd) {
            const Genome g = load_genome(genome_path);
            const auto r = predict(g, load_csv(series_path));
            std::ostringstream s;
            s << prediction_header(g.binding.outputs, false) << '\n';
            write_predictions(s, r);
            emit(s.str());
            std::cerr << "mae " << format_double(r.mae) << "\nmse " << format_double(r.mse) << "\nmae_raw "
                      << format_double(r.mae_raw) << '\n';
            return 0;
        }

        if (*rank) {
            std::vector<ExperimentRecord> records;
            for (const auto& p : record_paths) {
                std::ifstream in(p);
                const auto part = read_records(in, p);
                records.insert(records.end(), part.begin(), part.end());
            }
            std::ostringstream s;
            write_ranking(s, rank_experiments(records, rank_case == "best" ? RankCase::best : RankCase::average));
            emit(s.str());
            return 0;
        }

        if (*synth) {
            so.kind = parse_synth_kind(synth_kind);
            fs::create_directories(out_path);
            for (std::size_t i = 0; i < synth_count; ++i) {
                SynthOptions o = so;
                o.seed = so.seed + i;
                const auto ts = synth_series(o);
                const auto path = fs::path(out_path) / (ts.name + ".csv");
                std::ofstream f(path, std::ios::binary);
                write_csv(ts, f);
                std::cout << path.string() << '\n';
            }
            return 0;
        }

        if (*inspect) {
            const Genome g = load_genome(genome_path);
            if (format == "dot") {
                emit(export_dot(g));
            } else if (format == "json") {
                emit(to_json(g).dump(2) + "\n");
            } else {
                std::ostringstream s;
                s << "genome " << g.generation_id << " (island " << g.island << ", " << g.lineage.op << ")\n"
                  << "fitness " << format_double(g.fitness) << "\nnodes " << g.enabled_node_count() << '/'
                  << g.nodes.size() << "\nedges " << g.enabled_edge_count() << '/' << g.edges.size()
                  << "\nrecurrent edges " << g.enabled_rec_edge_count() << '/' << g.rec_edges.size() << '\n';
                std::map<std::string, int> cells;
                for (const auto& n : g.nodes)
                    if (n.role == NodeRole::hidden && n.enabled) ++cells[std::string(to_string(n.cell))];
                for (const auto& [k, v] : cells) s << "  " << k << ' ' << v << '\n';
                const auto problems = validate(g);
                s << (problems.empty() ? "valid\n" : "INVALID:\n");
                for (const auto& p : problems) s << "  " << p << '\n';
                emit(s.str());
            }
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
