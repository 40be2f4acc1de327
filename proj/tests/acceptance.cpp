// Acceptance run: one PASS/FAIL line per criterion. Optional arguments pick
// criteria by number, e.g. `acceptance 3 9`.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "examm/examm.hpp"
#include "test_support.hpp"

using namespace examm;
using examm::testing::crossover_oracle;
using examm::testing::max_relative_error;
using examm::testing::numeric_gradient;
using examm::testing::random_genome;
using examm::testing::random_sequence;
using examm::testing::RandomGenomeSpec;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, x);
    return buf;
}

// ---------------------------------------------------------------------------
// 1. BPTT gradients against central differences

Genome single_cell_genome(CellKind kind, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> w(-1.0, 1.0);
    Genome g;
    g.add_node({0, NodeRole::input, CellKind::simple, 0.0, true, 0, {}});
    g.add_node({1, NodeRole::input, CellKind::simple, 0.0, true, 1, {}});
    g.add_node({2, NodeRole::output, CellKind::simple, 1.0, true, 0, {w(rng)}});
    Node h{3, NodeRole::hidden, kind, 0.5, true, -1, std::vector<double>(param_count(kind))};
    for (auto& p : h.params) p = w(rng);
    g.add_node(h);
    g.add_edge({0, 0, 3, w(rng), true});
    g.add_edge({1, 1, 3, w(rng), true});
    g.add_edge({2, 3, 2, w(rng), true});
    g.add_rec_edge({0, 3, 3, 1, w(rng), true});
    g.add_rec_edge({1, 2, 3, 5, w(rng), true});
    return g;
}

double gradient_error(const Genome& g, const SequenceData& d) {
    Network net(g);
    const auto w = flatten_weights(g);
    std::vector<double> grad(w.size());
    net.gradient(w, d, grad);
    return max_relative_error(grad, numeric_gradient(net, w, d, 1e-6));
}

Outcome gradients() {
    std::mt19937_64 rng(101);
    double worst = 0.0;
    for (auto kind : kAllCellKinds) {
        const auto g = single_cell_genome(kind, rng);
        worst = std::max(worst, gradient_error(g, random_sequence(30, 2, 1, rng)));
    }
    RandomGenomeSpec spec;
    spec.max_hidden = 5;  // 2 inputs + 1 output + <=5 hidden
    spec.skips = {1, 5, 10};
    std::set<int> skips_seen;
    for (int trial = 0; trial < 20; ++trial) {
        InnovationRegistry reg(2, 1);
        const auto g = random_genome(reg, spec, rng);
        for (const auto& e : g.rec_edges) skips_seen.insert(e.time_skip);
        worst = std::max(worst, gradient_error(g, random_sequence(30, 2, 1, rng)));
    }
    return {worst < 1e-4 && skips_seen.size() == 3,
            "6 cell kinds + 20 genomes, max relative error " + fmt("%.3g", worst) + " (< 1e-4)"};
}

// ---------------------------------------------------------------------------
// 2. Gradient re-scaling

Outcome rescaling() {
    std::mt19937_64 rng(202);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> log_norm(-4.0, 2.0);
    std::uniform_int_distribution<int> dim(1, 50);
    double worst = 0.0;
    int clipped = 0, boosted = 0, kept = 0, bad = 0;
    for (int i = 0; i < 1000; ++i) {
        std::vector<double> v(static_cast<std::size_t>(dim(rng)));
        for (auto& x : v) x = gauss(rng);
        const double scale = std::pow(10.0, log_norm(rng)) / l2_norm(v);
        for (auto& x : v) x *= scale;
        const double before = l2_norm(v);
        const auto original = v;
        rescale_gradient(v, 1.0, 0.05);
        const double after = l2_norm(v);
        if (before > 1.0) {
            ++clipped;
            worst = std::max(worst, std::abs(after - 1.0));
        } else if (before < 0.05) {
            ++boosted;
            worst = std::max(worst, std::abs(after - 0.05));
        } else {
            ++kept;
            if (v != original) ++bad;
        }
        // direction is preserved
        for (std::size_t k = 0; k < v.size(); ++k)
            if (std::abs(v[k] * before - original[k] * after) > 1e-12 * std::max(1.0, before)) ++bad;
    }
    return {worst <= 1e-9 && bad == 0 && clipped > 0 && boosted > 0 && kept > 0,
            std::to_string(clipped) + " clipped, " + std::to_string(boosted) + " boosted, " +
                std::to_string(kept) + " kept; worst norm error " + fmt("%.2g", worst)};
}

// ---------------------------------------------------------------------------
// 3. Crossover against the brute-force oracle

Outcome crossover_oracle_check() {
    std::mt19937_64 rng(303);
    std::uniform_real_distribution<double> r_dist(-0.5, 1.5), jitter(-0.3, 0.3);
    MutationConfig mc;
    mc.allowed_cells = {kAllCellKinds.begin(), kAllCellKinds.end()};
    RandomGenomeSpec spec;
    spec.max_hidden = 5;
    spec.disable_prob = 0.15;
    int mismatches = 0, shared = 0;
    for (int pair = 0; pair < 500; ++pair) {
        InnovationRegistry reg(2, 1);
        const Genome a = random_genome(reg, spec, rng);
        Genome b;
        if (pair % 4 == 0) {
            b = random_genome(reg, spec, rng);
        } else {
            // a relative of `a`, so most innovations line up
            b = a;
            for (int m = 0; m < 2; ++m) {
                auto out = mutate(b, reg, mc, rng);
                if (out.status == MutationStatus::ok && out.child.nodes.size() <= 10) b = out.child;
            }
            for (auto& e : b.edges) e.weight += jitter(rng);
            for (auto& e : b.rec_edges) e.weight += jitter(rng);
            for (auto& n : b.nodes)
                for (auto& p : n.params) p += jitter(rng);
        }
        const double r = r_dist(rng);
        const Genome fast = crossover_with(a, b, [&] { return r; });
        if (!(fast == crossover_oracle(a, b, r)) || !outputs_reachable(fast)) ++mismatches;
        for (const auto& e : fast.edges)
            if (b.has_edge(e.from, e.to) && a.has_edge(e.from, e.to)) ++shared;
    }
    return {mismatches == 0,
            "500 pairs, " + std::to_string(mismatches) + " mismatches, " + std::to_string(shared) +
                " recombined edges"};
}

// ---------------------------------------------------------------------------
// 4. Mutation validity and count deltas

struct Counts {
    std::size_t nodes, en_nodes, en_hidden, edges, en_edges, rec, en_rec;
};

Counts counts(const Genome& g) {
    Counts c{g.nodes.size(), g.enabled_node_count(), 0, g.edges.size(), g.enabled_edge_count(),
             g.rec_edges.size(), g.enabled_rec_edge_count()};
    for (const auto& n : g.nodes) c.en_hidden += n.enabled && n.role == NodeRole::hidden;
    return c;
}

std::size_t enabled_ff_degree(const Genome& g, Innovation node, bool incoming) {
    std::size_t d = 0;
    for (const auto& e : g.edges)
        if (e.enabled && (incoming ? e.to : e.from) == node) ++d;
    return d;
}

bool incident_all(const Genome& g, Innovation node, bool enabled) {
    for (const auto& e : g.edges)
        if ((e.from == node || e.to == node) && e.enabled != enabled) return false;
    for (const auto& e : g.rec_edges)
        if ((e.from == node || e.to == node) && e.enabled != enabled) return false;
    return true;
}

const RecurrentEdge* find_rec(const Genome& g, Innovation id) {
    for (const auto& e : g.rec_edges)
        if (e.innovation == id) return &e;
    return nullptr;
}

// Every element of the parent survives with its weights; only enabled flags may change.
bool parent_preserved(const Genome& p, const Genome& c) {
    for (const auto& n : p.nodes) {
        const Node* m = c.find_node(n.innovation);
        if (!m || m->params != n.params || m->depth != n.depth || m->cell != n.cell) return false;
    }
    for (const auto& e : p.edges) {
        auto it = std::find_if(c.edges.begin(), c.edges.end(), [&](const Edge& x) { return x.innovation == e.innovation; });
        if (it == c.edges.end() || it->weight != e.weight || it->from != e.from || it->to != e.to) return false;
    }
    for (const auto& e : p.rec_edges) {
        const RecurrentEdge* m = find_rec(c, e.innovation);
        if (!m || m->weight != e.weight || m->time_skip != e.time_skip) return false;
    }
    return true;
}

std::vector<const Node*> new_nodes(const Genome& p, const Genome& c) {
    std::vector<const Node*> out;
    for (const auto& n : c.nodes)
        if (!p.find_node(n.innovation)) out.push_back(&n);
    return out;
}

std::vector<Innovation> newly_disabled_nodes(const Genome& p, const Genome& c) {
    std::vector<Innovation> out;
    for (const auto& n : p.nodes)
        if (n.enabled && !c.find_node(n.innovation)->enabled) out.push_back(n.innovation);
    return out;
}

std::string delta_violation(OperatorKind op, const Genome& p, const Genome& c) {
    const Counts a = counts(p), b = counts(c);
    auto same_totals = [&] { return a.nodes == b.nodes && a.edges == b.edges && a.rec == b.rec; };
    if (!parent_preserved(p, c)) return "parent elements changed";
    switch (op) {
        case OperatorKind::disable_edge:
            if (!same_totals() || b.en_nodes != a.en_nodes || b.en_edges + b.en_rec + 1 != a.en_edges + a.en_rec)
                return "disable_edge counts";
            break;
        case OperatorKind::enable_edge:
            if (!same_totals() || b.en_nodes != a.en_nodes || b.en_edges + b.en_rec != a.en_edges + a.en_rec + 1)
                return "enable_edge counts";
            break;
        case OperatorKind::split_edge: {
            const bool ff = b.edges == a.edges + 2 && b.en_edges == a.en_edges + 1 && b.rec == a.rec &&
                            b.en_rec == a.en_rec;
            const bool rec = b.rec == a.rec + 2 && b.en_rec == a.en_rec + 1 && b.edges == a.edges &&
                             b.en_edges == a.en_edges;
            if (b.nodes != a.nodes + 1 || b.en_nodes != a.en_nodes + 1 || !(ff || rec)) return "split_edge counts";
            if (rec) {
                // the new pair carries the time skip of the edge that was split
                const Innovation id = new_nodes(p, c)[0]->innovation;
                std::set<int> split, added;
                for (const auto& e : p.rec_edges)
                    if (e.enabled && !find_rec(c, e.innovation)->enabled) split.insert(e.time_skip);
                for (const auto& e : c.rec_edges)
                    if (e.from == id || e.to == id) added.insert(e.time_skip);
                if (split.size() != 1 || added != split) return "split_edge time skip not kept";
            }
            break;
        }
        case OperatorKind::add_edge:
            if (b.edges != a.edges + 1 || b.en_edges != a.en_edges + 1 || b.rec != a.rec || b.nodes != a.nodes)
                return "add_edge counts";
            break;
        case OperatorKind::add_recurrent_edge:
            if (b.rec != a.rec + 1 || b.en_rec != a.en_rec + 1 || b.edges != a.edges || b.nodes != a.nodes)
                return "add_recurrent_edge counts";
            break;
        case OperatorKind::disable_node: {
            const auto off = newly_disabled_nodes(p, c);
            if (!same_totals() || off.size() != 1 || b.en_nodes + 1 != a.en_nodes) return "disable_node counts";
            if (p.find_node(off[0])->role == NodeRole::output || !incident_all(c, off[0], false))
                return "disable_node incident edges";
            break;
        }
        case OperatorKind::enable_node: {
            if (!same_totals() || b.en_nodes != a.en_nodes + 1) return "enable_node counts";
            for (const auto& n : c.nodes)
                if (n.enabled && !p.find_node(n.innovation)->enabled && !incident_all(c, n.innovation, true))
                    return "enable_node incident edges";
            break;
        }
        case OperatorKind::add_node: {
            const auto fresh = new_nodes(p, c);
            if (b.nodes != a.nodes + 1 || fresh.size() != 1 || b.en_hidden != a.en_hidden + 1) return "add_node counts";
            const auto id = fresh[0]->innovation;
            if (b.edges < a.edges + 2 || enabled_ff_degree(c, id, true) < 1 || enabled_ff_degree(c, id, false) < 1)
                return "add_node edges";
            for (const auto& e : c.edges)
                if (!p.has_edge(e.from, e.to) && e.from != id && e.to != id) return "add_node stray edge";
            break;
        }
        case OperatorKind::split_node: {
            const auto off = newly_disabled_nodes(p, c);
            const auto fresh = new_nodes(p, c);
            if (b.nodes != a.nodes + 2 || fresh.size() != 2 || off.size() != 1 || b.en_hidden != a.en_hidden + 1)
                return "split_node counts";
            for (int side = 0; side < 2; ++side) {
                const bool incoming = side == 0;
                const std::size_t parent_deg = enabled_ff_degree(p, off[0], incoming);
                const std::size_t d0 = enabled_ff_degree(c, fresh[0]->innovation, incoming);
                const std::size_t d1 = enabled_ff_degree(c, fresh[1]->innovation, incoming);
                const std::size_t want = parent_deg == 1 ? 2 : parent_deg;
                if (d0 + d1 != want || (parent_deg > 0 && (d0 == 0 || d1 == 0))) return "split_node partition";
            }
            if (fresh[0]->depth != p.find_node(off[0])->depth || fresh[1]->depth != fresh[0]->depth)
                return "split_node depth";
            break;
        }
        case OperatorKind::merge_node: {
            const auto off = newly_disabled_nodes(p, c);
            const auto fresh = new_nodes(p, c);
            if (b.nodes != a.nodes + 1 || fresh.size() != 1 || off.size() != 2 || b.en_hidden + 1 != a.en_hidden)
                return "merge_node counts";
            const double mean = 0.5 * (p.find_node(off[0])->depth + p.find_node(off[1])->depth);
            if (fresh[0]->depth != mean) return "merge_node depth";
            break;
        }
        case OperatorKind::clone:
            if (c.nodes != p.nodes || c.edges != p.edges || c.rec_edges != p.rec_edges) return "clone differs";
            break;
        default: return "unexpected operator";
    }
    return {};
}

Outcome mutation_validity() {
    std::mt19937_64 rng(404);
    MutationConfig mc;
    mc.allowed_cells = {kAllCellKinds.begin(), kAllCellKinds.end()};
    std::uniform_int_distribution<std::size_t> pick_op(0, kMutationOperators.size() - 1);
    std::bernoulli_distribution adopt(0.6);
    std::size_t applied = 0, ok = 0, discarded = 0, invalid = 0, delta_bad = 0;
    std::map<std::string, std::size_t> per_op;
    std::string first_problem;
    const int lineages = 50, steps = 200;
    for (int l = 0; l < lineages; ++l) {
        InnovationRegistry reg(3, 2);
        Genome g = make_minimal_genome(reg, 3, 2, rng);
        for (int s = 0; s < steps; ++s) {
            const OperatorKind op = kMutationOperators[pick_op(rng)];
            ++applied;
            const auto out = apply_operator(g, op, reg, mc, rng);
            if (out.status == MutationStatus::inapplicable) continue;
            ++per_op[std::string(to_string(op))];
            if (const auto why = delta_violation(op, g, out.child); !why.empty()) {
                ++delta_bad;
                if (first_problem.empty()) first_problem = why;
            }
            if (out.status == MutationStatus::discarded) {
                ++discarded;
                continue;
            }
            ++ok;
            if (const auto v = validate(out.child); !v.empty()) {
                ++invalid;
                if (first_problem.empty()) first_problem = v.front();
            }
            // bounded growth keeps the run fast; small genomes still exercise every operator
            if (adopt(rng) && out.child.nodes.size() < 40) g = out.child;
        }
    }
    std::string detail = std::to_string(applied) + " applications (" + std::to_string(ok) + " ok, " +
                         std::to_string(discarded) + " discarded, " +
                         std::to_string(applied - ok - discarded) + " inapplicable); " +
                         std::to_string(invalid) + " invalid, " + std::to_string(delta_bad) + " count mismatches";
    if (!first_problem.empty()) detail += "; first: " + first_problem;
    return {applied == 10000 && invalid == 0 && delta_bad == 0 && per_op.size() == kMutationOperators.size(), detail};
}

// ---------------------------------------------------------------------------
// 5/6. Island engine with real training on small sine_mix data

std::vector<TimeSeries> synth_set(SynthKind kind, std::size_t n, std::size_t length, double noise,
                                  std::uint64_t seed0) {
    std::vector<TimeSeries> out;
    for (std::size_t i = 0; i < n; ++i) {
        SynthOptions o;
        o.kind = kind;
        o.length = length;
        o.noise = noise;
        o.seed = seed0 + i;
        out.push_back(synth_series(o));
    }
    return out;
}

struct SmallProblem {
    PreparedData data;
    RunConfig config;
};

SmallProblem small_problem(std::size_t budget) {
    SmallProblem p;
    p.config.outputs = {"target"};
    p.config.experiment = "all+rec";
    p.config.budget = budget;
    const auto all = synth_set(SynthKind::sine_mix, 4, 150, 0.02, 500);
    p.data = prepare(p.config, split_fold(all, 2, 1));
    return p;
}

Outcome steady_state() {
    auto p = small_problem(500);
    Master m(p.data.inputs.size(), p.data.outputs.size(), p.config.engine_config(), 5,
             make_binding(p.data));
    const auto r = run(m, 1, make_trainer(p.data.train, p.data.test, p.config.training));
    std::size_t max_size = 0, worst_increases = 0;
    std::map<std::int32_t, double> worst;
    for (const auto& ev : r.inserts) {
        max_size = std::max(max_size, ev.size_after);
        if (ev.size_after < 5) continue;
        if (worst.count(ev.island) && ev.worst_after > worst[ev.island]) ++worst_increases;
        worst[ev.island] = ev.worst_after;
    }
    const double n = static_cast<double>(r.generated);
    const double fm = r.class_counts.at(OperatorClass::mutation) / n;
    const double fa = r.class_counts.at(OperatorClass::crossover_intra) / n;
    const double fe = r.class_counts.at(OperatorClass::crossover_inter) / n;
    const bool freq = std::abs(fm - 0.7) <= 0.03 && std::abs(fa - 0.2) <= 0.03 && std::abs(fe - 0.1) <= 0.03;
    return {max_size <= 5 && worst_increases == 0 && freq && r.generated == 500,
            "max island size " + std::to_string(max_size) + ", worst-fitness increases " +
                std::to_string(worst_increases) + ", class frequencies " + fmt("%.3f", fm) + "/" +
                fmt("%.3f", fa) + "/" + fmt("%.3f", fe)};
}

std::string fitness_log_text(const RunReport& r) {
    std::ostringstream s;
    write_fitness_log(s, r.fitness_log);
    return s.str();
}

Outcome determinism() {
    auto p = small_problem(120);
    auto once = [&](std::size_t workers) {
        Master m(p.data.inputs.size(), p.data.outputs.size(), p.config.engine_config(), 6,
                 make_binding(p.data));
        return run(m, workers, make_trainer(p.data.train, p.data.test, p.config.training));
    };
    const auto a = once(1), b = once(1), c = once(4);
    auto lineages = [](const RunReport& r) {
        std::multiset<std::string> out;
        for (const auto& row : r.fitness_log) {
            std::string s = std::to_string(row.genome_id) + "|" + std::to_string(row.island) + "|" + row.op + "|";
            for (auto id : row.parents) s += std::to_string(id) + ";";
            out.insert(s + "|" + format_double(row.fitness));
        }
        return out;
    };
    const bool bytes = fitness_log_text(a) == fitness_log_text(b);
    const bool multiset = lineages(a) == lineages(c);
    return {bytes && multiset, std::string("1-worker logs ") + (bytes ? "identical" : "DIFFER") +
                                   ", 4-worker lineages " + (multiset ? "identical" : "DIFFER") + " (" +
                                   std::to_string(a.fitness_log.size()) + " genomes)"};
}

// ---------------------------------------------------------------------------
// 7. Deep recurrence on lagged_echo

// Every repeat covers all four folds; a repeat counts as a win when the mean
// best test MAE over the folds is under half that of the K_max=1 baseline.
Outcome deep_recurrence() {
    const auto all = synth_set(SynthKind::lagged_echo, 8, 1000, 0.05, 700);
    RunConfig base;
    base.outputs = {"echo"};
    base.budget = 500;
    base.training.epochs = 10;
    int wins = 0;
    std::string detail;
    for (std::size_t repeat = 0; repeat < 5; ++repeat) {
        double with_rec = 0.0, without = 0.0;
        for (std::size_t fold = 0; fold < 4; ++fold) {
            const Dataset d = split_fold(all, 2, fold);
            RunConfig deep = base, flat = base;
            deep.experiment = "simple+rec";
            flat.experiment = "simple";
            deep.fold = flat.fold = fold;
            deep.seed = flat.seed = matrix_seed(9000, fold, repeat);
            const double r = run_experiment(deep, d, "").record.best_fitness;
            const double f = run_experiment(flat, d, "").record.best_fitness;
            std::fprintf(stderr, "  criterion 7 repeat %zu fold %zu: simple+rec %.4f, simple %.4f\n", repeat, fold, r, f);
            with_rec += r / 4.0;
            without += f / 4.0;
        }
        if (with_rec < 0.5 * without) ++wins;
        detail += (repeat ? ", " : "") + fmt("%.4f", with_rec) + " vs " + fmt("%.4f", without);
    }
    return {wins >= 4, std::to_string(wins) + "/5 repeats under half, mean over 4 folds (" + detail + ")"};
}

// ---------------------------------------------------------------------------
// 8. Inherited weights versus a fresh start

Outcome lamarckian() {
    std::vector<double> inherited, fresh;
    for (std::uint64_t trial = 0; trial < 20; ++trial) {
        RunConfig c;
        c.outputs = {"target"};
        c.experiment = "all+rec";
        c.islands = 4;
        c.population = 5;
        c.budget = 60;  // the mid-point of a 120-genome run
        c.seed = 8000 + trial;
        const auto all = synth_set(SynthKind::sine_mix, 4, 200, 0.02, 800 + 4 * trial);
        const Dataset d = split_fold(all, 2, trial % 2);
        const auto data = prepare(c, d);
        const Genome best = run_experiment(c, d, "").report.best;

        std::mt19937_64 rng(trial);
        const auto a = train(clone(best), data.train, c.training, rng);
        inherited.push_back(evaluate(a.genome, data.test, c.training.metric));

        Genome restart = clone(best);
        auto w = flatten_weights(restart);
        for (auto& x : w) x = uniform_init_weight(rng);
        assign_weights(restart, w);
        const auto b = train(restart, data.train, c.training, rng);
        fresh.push_back(evaluate(b.genome, data.test, c.training.metric));
    }
    auto median = [](std::vector<double> v) {
        std::sort(v.begin(), v.end());
        return 0.5 * (v[v.size() / 2 - 1] + v[v.size() / 2]);
    };
    const double mi = median(inherited), mf = median(fresh);
    return {mi <= mf, "median MAE inherited " + fmt("%.4f", mi) + " vs fresh " + fmt("%.4f", mf) + " over 20 trials"};
}

// ---------------------------------------------------------------------------
// 9. Ranking table

Outcome ranking() {
    // fold 0: a=1 b=2 c=3 -> mean 2, sd sqrt(2/3)
    // fold 1: a=2 b=2 c=5 -> mean 3, sd sqrt(2)
    // a: (-sqrt(3/2) - sqrt(1/2)) / 2, b: -sqrt(1/2) / 2, c: (sqrt(3/2) + sqrt(2)) / 2
    const std::vector<ExperimentRecord> records{
        {"a", 0, 0, 1, 1}, {"b", 0, 0, 2, 2}, {"c", 0, 0, 3, 3},
        {"a", 1, 0, 2, 2}, {"b", 1, 0, 2, 2}, {"c", 1, 0, 5, 5}};
    const std::map<std::string, double> expect{
        {"a", -0.96592582628906829}, {"b", -0.35355339059327376}, {"c", 1.3194792168823421}};
    const auto rows = rank_experiments(records, RankCase::average);
    double worst = 0.0;
    bool order = rows.size() == 3 && rows[0].label == "a" && rows[1].label == "b" && rows[2].label == "c";
    for (const auto& r : rows) worst = std::max(worst, std::abs(r.deviations - expect.at(r.label)));
    return {order && worst <= 1e-12, "3 experiments x 2 folds, max deviation error " + fmt("%.2g", worst)};
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"gradient correctness", gradients},
        {"gradient re-scaling", rescaling},
        {"crossover oracle", crossover_oracle_check},
        {"operator validity", mutation_validity},
        {"steady-state invariants", steady_state},
        {"determinism", determinism},
        {"deep recurrence on lagged_echo", deep_recurrence},
        {"Lamarckian benefit", lamarckian},
        {"ranking statistic", ranking},
    };
    std::set<int> only;
    for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int id = static_cast<int>(i) + 1;
        if (!only.empty() && !only.count(id)) continue;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("[%s] %d %s: %s (%.1fs)\n", o.pass ? "PASS" : "FAIL", id, criteria[i].first, o.detail.c_str(),
                    secs);
        std::fflush(stdout);
        failed += !o.pass;
    }
    return failed ? 1 : 0;
}
