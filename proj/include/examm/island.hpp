#pragma once

// Steady-state island evolution. A master generates candidates round-robin
// over the islands, workers train them, and trained results are inserted back
// into their island when they beat its worst member.

#include <algorithm>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <cstdio>
#include <deque>
#include <exception>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "examm/genome.hpp"
#include "examm/operators.hpp"
#include "examm/trainer.hpp"

namespace examm {

struct Island {
    std::int32_t id = 0;
    std::size_t capacity = 5;
    std::vector<Genome> population;  // kept sorted, best first

    bool full() const { return population.size() >= capacity; }
    bool empty() const { return population.empty(); }
    const Genome* best() const { return population.empty() ? nullptr : &population.front(); }
    const Genome* worst() const { return population.empty() ? nullptr : &population.back(); }

    /// Inserts when below capacity, or when strictly better than the worst
    /// member (which is then evicted). Equal fitness is rejected.
    bool insert(const Genome& g) {
        if (!std::isfinite(g.fitness)) return false;
        if (full()) {
            if (!(g.fitness < population.back().fitness)) return false;
            population.pop_back();
        }
        auto it = std::upper_bound(population.begin(), population.end(), g.fitness,
                                   [](double f, const Genome& m) { return f < m.fitness; });
        population.insert(it, g);
        return true;
    }
};

enum class OperatorClass { seed, mutation, crossover_intra, crossover_inter };

inline std::string_view to_string(OperatorClass c) {
    switch (c) {
        case OperatorClass::seed: return "seed";
        case OperatorClass::mutation: return "mutation";
        case OperatorClass::crossover_intra: return "crossover_intra";
        case OperatorClass::crossover_inter: return "crossover_inter";
    }
    return "unknown";
}

enum class Scheduling {
    // Candidate n is generated right after result n - window is committed and
    // results are committed in generation order, so the run does not depend on
    // how many workers there are or how fast they are.
    ordered,
    // Candidates are generated on request and results committed as they arrive.
    async,
};

struct EngineConfig {
    std::size_t islands = 10;
    std::size_t capacity = 5;
    std::size_t budget = 2000;
    double mutation_rate = 0.70;
    double intra_rate = 0.20;
    double inter_rate = 0.10;
    MutationConfig mutation;
    Scheduling scheduling = Scheduling::ordered;
    std::size_t window = 4;  // in-flight candidates under ordered scheduling
    int max_regenerations = 100;
    bool record_wallclock = false;

    void check() const {
        if (islands < 1) throw ConfigError("need at least one island");
        if (capacity < 1) throw ConfigError("island capacity must be >= 1");
        for (double r : {mutation_rate, intra_rate, inter_rate})
            if (!(r >= 0.0 && r <= 1.0)) throw ConfigError("operator rates must be in [0,1]");
        if (std::abs(mutation_rate + intra_rate + inter_rate - 1.0) > 1e-9)
            throw ConfigError("operator rates must sum to 1");
        if (window < 1) throw ConfigError("window must be >= 1");
        if (mutation.max_time_skip < 1) throw ConfigError("max time skip must be >= 1");
        if (mutation.allowed_cells.empty()) throw ConfigError("no cell kinds allowed");
    }
};

struct WorkItem {
    GenomeId id = 0;
    std::int32_t island = 0;
    OperatorClass op_class = OperatorClass::seed;
    std::string op;  // operator label written to the fitness log
    std::vector<GenomeId> parents;
    Genome genome;
    std::uint64_t train_seed = 0;
};

struct WorkResult {
    GenomeId id = 0;
    std::int32_t island = 0;
    Genome genome;  // trained, fitness set
    std::vector<double> epoch_loss;
    double wallclock_ms = 0.0;
    bool failed = false;
    std::string error;
};

struct FitnessLogRow {
    GenomeId genome_id = 0;
    std::int32_t island = 0;
    std::string op;
    std::vector<GenomeId> parents;
    double fitness = 0.0;
    std::size_t nodes = 0, edges = 0, rec_edges = 0;
    std::optional<double> wallclock_ms;
};

struct InsertEvent {
    GenomeId genome_id = 0;
    std::int32_t island = 0;
    bool inserted = false;
    std::size_t size_after = 0;
    double worst_after = 0.0;
    double best_after = 0.0;   // island best
    double global_best = 0.0;  // over all islands
};

struct RunReport {
    Genome best;
    std::vector<Genome> island_best;  // one per nonempty island
    std::vector<Island> islands;
    std::vector<FitnessLogRow> fitness_log;
    std::vector<InsertEvent> inserts;
    std::vector<std::pair<GenomeId, std::vector<double>>> training_log;
    std::map<OperatorClass, std::size_t> class_counts;  // generated candidates per class
    std::size_t seeds = 0;
    std::size_t generated = 0;  // non-seed candidates trained
    std::size_t failures = 0;
    std::size_t discarded = 0;  // children regenerated for unreachable outputs
};

inline std::string format_double(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline void write_fitness_log(std::ostream& out, const std::vector<FitnessLogRow>& rows) {
    out << "genome_id,island,operator,parent_ids,fitness,nodes,edges,rec_edges,wallclock_ms\n";
    for (const auto& r : rows) {
        out << r.genome_id << ',' << r.island << ',' << r.op << ',';
        for (std::size_t i = 0; i < r.parents.size(); ++i) out << (i ? ";" : "") << r.parents[i];
        out << ',' << format_double(r.fitness) << ',' << r.nodes << ',' << r.edges << ','
            << r.rec_edges << ',';
        if (r.wallclock_ms) out << format_double(*r.wallclock_ms);
        out << '\n';
    }
}

/// Trains a candidate and scores it. Exceptions count as worker failures.
using TrainFn = std::function<WorkResult(const WorkItem&, std::size_t worker)>;

/// Default worker body: train on `train`, fitness on `test`.
inline TrainFn make_trainer(std::vector<SequenceData> train, std::vector<SequenceData> test,
                            TrainConfig config) {
    return [train = std::move(train), test = std::move(test), config](const WorkItem& item,
                                                                      std::size_t) {
        std::mt19937_64 rng(item.train_seed);
        auto trained = examm::train(item.genome, train, config, rng);
        WorkResult r;
        r.id = item.id;
        r.island = item.island;
        r.genome = std::move(trained.genome);
        r.genome.fitness = evaluate(r.genome, test, config.metric);
        r.epoch_loss = std::move(trained.epoch_loss);
        return r;
    };
}

class Master {
  public:
    Master(std::size_t n_inputs, std::size_t n_outputs, EngineConfig config, std::uint64_t seed,
           DataBinding binding = {})
        : config_(std::move(config)),
          registry_(n_inputs, n_outputs),
          n_inputs_(n_inputs),
          n_outputs_(n_outputs),
          binding_(std::move(binding)),
          rng_(seed) {
        config_.check();
        if (n_inputs < 1 || n_outputs < 1) throw ConfigError("need at least one input and one output");
        for (std::size_t i = 0; i < config_.islands; ++i) {
            Island isl;
            isl.id = static_cast<std::int32_t>(i);
            isl.capacity = config_.capacity;
            islands_.push_back(std::move(isl));
        }
        pending_seeds_.assign(config_.islands, 0);
    }

    const EngineConfig& config() const { return config_; }
    const std::vector<Island>& islands() const { return islands_; }
    InnovationRegistry& registry() { return registry_; }
    std::size_t cursor() const { return cursor_; }
    std::size_t generated() const { return budget_used_; }

    /// Minimal genome for `island`, weights Uniform(-0.5, 0.5).
    Genome seed_genome() {
        Genome g = make_minimal_genome(registry_, n_inputs_, n_outputs_, rng_);
        g.binding = binding_;
        return g;
    }

    bool warming_up() const {
        for (std::size_t i = 0; i < islands_.size(); ++i)
            if (islands_[i].population.size() + pending_seeds_[i] < islands_[i].capacity) return true;
        return false;
    }

    /// True while there is anything left to generate.
    bool wants_more() const { return warming_up() || budget_used_ < config_.budget; }

    /// Next candidate for the island under the cursor; advances the cursor.
    WorkItem generate_candidate() {
        const std::size_t target = cursor_;
        cursor_ = (cursor_ + 1) % islands_.size();
        Island& isl = islands_[target];

        WorkItem item;
        item.id = next_id_++;
        item.island = static_cast<std::int32_t>(target);
        const bool need_seed = isl.population.size() + pending_seeds_[target] < isl.capacity;
        if (need_seed || isl.empty()) {
            item.op_class = OperatorClass::seed;
            item.op = "seed";
            item.genome = seed_genome();
            ++pending_seeds_[target];
        } else {
            fill_offspring(isl, item);
            ++budget_used_;
        }
        item.genome.island = item.island;
        item.genome.generation_id = item.id;
        item.genome.lineage = {item.op, item.parents};
        item.train_seed = rng_();
        ++class_counts_[item.op_class];
        return item;
    }

    /// Commits a result; returns whether it joined its island.
    bool insert_result(const WorkResult& result, const WorkItem& item) {
        if (item.op_class == OperatorClass::seed) --pending_seeds_[static_cast<std::size_t>(item.island)];
        if (result.failed) {
            ++failures_;
            --class_counts_[item.op_class];
            if (item.op_class != OperatorClass::seed) --budget_used_;
            return false;
        }
        Genome g = result.genome;
        g.island = item.island;
        g.generation_id = item.id;
        g.lineage = {item.op, item.parents};
        if (item.op_class == OperatorClass::seed) ++seeds_; else ++trained_;

        Island& isl = islands_[static_cast<std::size_t>(item.island)];
        const bool inserted = outputs_reachable(g) && isl.insert(g);

        FitnessLogRow row;
        row.genome_id = item.id;
        row.island = item.island;
        row.op = item.op;
        row.parents = item.parents;
        row.fitness = g.fitness;
        row.nodes = g.enabled_node_count();
        row.edges = g.enabled_edge_count();
        row.rec_edges = g.enabled_rec_edge_count();
        if (config_.record_wallclock) row.wallclock_ms = result.wallclock_ms;
        log_.push_back(std::move(row));
        training_log_.emplace_back(item.id, result.epoch_loss);

        InsertEvent ev;
        ev.genome_id = item.id;
        ev.island = item.island;
        ev.inserted = inserted;
        ev.size_after = isl.population.size();
        ev.worst_after = isl.worst() ? isl.worst()->fitness : std::numeric_limits<double>::infinity();
        ev.best_after = isl.best() ? isl.best()->fitness : std::numeric_limits<double>::infinity();
        ev.global_best = global_best() ? global_best()->fitness : std::numeric_limits<double>::infinity();
        inserts_.push_back(ev);
        return inserted;
    }

    const Genome* global_best() const {
        const Genome* best = nullptr;
        for (const auto& isl : islands_)
            if (isl.best() && (!best || isl.best()->fitness < best->fitness)) best = isl.best();
        return best;
    }

    RunReport report() const {
        RunReport r;
        if (const Genome* b = global_best()) r.best = *b;
        for (const auto& isl : islands_)
            if (isl.best()) r.island_best.push_back(*isl.best());
        r.islands = islands_;
        r.fitness_log = log_;
        r.inserts = inserts_;
        r.training_log = training_log_;
        r.class_counts = class_counts_;
        r.class_counts.erase(OperatorClass::seed);
        r.seeds = seeds_;
        r.generated = trained_;
        r.failures = failures_;
        r.discarded = discarded_;
        return r;
    }

  private:
    OperatorClass draw_class(const Island& isl) {
        const bool intra_ok = isl.population.size() >= 2;
        bool inter_ok = false;
        for (const auto& other : islands_)
            if (other.id != isl.id && !other.empty()) inter_ok = true;
        const double w_intra = intra_ok ? config_.intra_rate : 0.0;
        const double w_inter = inter_ok ? config_.inter_rate : 0.0;
        if (config_.mutation_rate + w_intra + w_inter <= 0.0) return OperatorClass::mutation;
        // Drawing from the full rates and redrawing on an impossible class.
        std::discrete_distribution<int> dist(
            {config_.mutation_rate, config_.intra_rate, config_.inter_rate});
        while (true) {
            const int c = dist(rng_);
            if (c == 0) return OperatorClass::mutation;
            if (c == 1 && intra_ok) return OperatorClass::crossover_intra;
            if (c == 2 && inter_ok) return OperatorClass::crossover_inter;
        }
    }

    void fill_offspring(const Island& isl, WorkItem& item) {
        item.op_class = draw_class(isl);
        for (int attempt = 0;; ++attempt) {
            if (make_offspring(isl, item)) return;
            ++discarded_;
            if (attempt + 1 >= config_.max_regenerations) {
                // Give up on this class: a clone of a member is always valid.
                const Genome& p = isl.population[detail::pick(isl.population.size(), rng_)];
                item.op_class = OperatorClass::mutation;
                item.op = "clone";
                item.parents = {p.generation_id};
                item.genome = clone(p);
                return;
            }
        }
    }

    bool make_offspring(const Island& isl, WorkItem& item) {
        const auto& pop = isl.population;
        switch (item.op_class) {
            case OperatorClass::mutation: {
                const Genome& p = pop[detail::pick(pop.size(), rng_)];
                auto out = mutate(p, registry_, config_.mutation, rng_);
                if (out.status != MutationStatus::ok) return false;
                item.op.clear();
                for (std::size_t i = 0; i < out.applied.size(); ++i)
                    item.op += std::string(i ? "+" : "") + std::string(to_string(out.applied[i]));
                item.parents = {p.generation_id};
                item.genome = std::move(out.child);
                return true;
            }
            case OperatorClass::crossover_intra: {
                const std::size_t a = detail::pick(pop.size(), rng_);
                std::size_t b = detail::pick(pop.size() - 1, rng_);
                if (b >= a) ++b;
                const Genome& g1 = pop[std::min(a, b)];  // population is sorted, best first
                const Genome& g2 = pop[std::max(a, b)];
                return finish_crossover(g1, g2, "crossover_intra", item);
            }
            case OperatorClass::crossover_inter: {
                const Genome& local = pop[detail::pick(pop.size(), rng_)];
                const Genome* other = nullptr;
                for (const auto& o : islands_)
                    if (o.id != isl.id && o.best() && (!other || o.best()->fitness < other->fitness))
                        other = o.best();
                const bool local_first = local.fitness <= other->fitness;
                return finish_crossover(local_first ? local : *other, local_first ? *other : local,
                                        "crossover_inter", item);
            }
            case OperatorClass::seed: break;
        }
        return false;
    }

    bool finish_crossover(const Genome& better, const Genome& worse, const char* label,
                          WorkItem& item) {
        Genome child = crossover(better, worse, rng_);
        if (!outputs_reachable(child)) return false;
        item.op = label;
        item.parents = {better.generation_id, worse.generation_id};
        item.genome = std::move(child);
        return true;
    }

    EngineConfig config_;
    InnovationRegistry registry_;
    std::size_t n_inputs_, n_outputs_;
    DataBinding binding_;
    std::mt19937_64 rng_;
    std::vector<Island> islands_;
    std::vector<std::size_t> pending_seeds_;
    std::size_t cursor_ = 0;
    GenomeId next_id_ = 0;
    std::size_t budget_used_ = 0;
    std::size_t trained_ = 0, seeds_ = 0, failures_ = 0, discarded_ = 0;
    std::map<OperatorClass, std::size_t> class_counts_;
    std::vector<FitnessLogRow> log_;
    std::vector<InsertEvent> inserts_;
    std::vector<std::pair<GenomeId, std::vector<double>>> training_log_;
};

namespace detail {

inline WorkResult run_item(const TrainFn& train, const WorkItem& item, std::size_t worker) {
    const auto t0 = std::chrono::steady_clock::now();
    WorkResult r;
    try {
        r = train(item, worker);
        r.id = item.id;
        r.island = item.island;
    } catch (const std::exception& e) {
        r.id = item.id;
        r.island = item.island;
        r.failed = true;
        r.error = e.what();
    }
    r.wallclock_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

}  // namespace detail

/// Runs the master until the budget is spent and in-flight work has drained.
/// `workers` == 1 runs everything on the calling thread.
inline RunReport run(Master& master, std::size_t workers, const TrainFn& train) {
    if (workers < 1) throw ConfigError("need at least one worker");
    const bool ordered = master.config().scheduling == Scheduling::ordered;
    const std::size_t window = master.config().window;

    std::mutex mu;
    std::condition_variable cv;
    std::deque<WorkItem> queue;                  // generated, not yet taken
    std::map<GenomeId, WorkItem> in_flight;      // generated, not yet committed
    std::map<GenomeId, WorkResult> finished;     // ordered mode: waiting to commit
    GenomeId committed = 0;                      // ordered mode: next id to commit
    GenomeId issued = 0;
    std::exception_ptr fatal;

    auto commit = [&](const WorkResult& r) {
        auto it = in_flight.find(r.id);
        master.insert_result(r, it->second);
        in_flight.erase(it);
    };
    auto generate = [&] {
        WorkItem item = master.generate_candidate();
        in_flight.emplace(item.id, item);
        ++issued;
        return item;
    };
    // Ordered mode: top the window up after every single commit, so candidate
    // n always sees exactly the results before n - window.
    auto advance_ordered = [&] {
        auto top_up = [&] {
            while (issued < committed + static_cast<GenomeId>(window) && master.wants_more())
                queue.push_back(generate());
        };
        top_up();
        for (auto it = finished.find(committed); it != finished.end(); it = finished.find(committed)) {
            commit(it->second);
            finished.erase(it);
            ++committed;
            top_up();
        }
    };

    auto worker_loop = [&](std::size_t worker) {
        std::unique_lock lock(mu);
        while (true) {
            if (fatal) return;
            if (ordered) {
                try {
                    advance_ordered();
                } catch (...) {
                    fatal = std::current_exception();
                    cv.notify_all();
                    return;
                }
            }
            std::optional<WorkItem> item;
            if (!queue.empty()) {
                item = std::move(queue.front());
                queue.pop_front();
            } else if (!ordered && master.wants_more()) {
                try {
                    item = generate();
                } catch (...) {
                    fatal = std::current_exception();
                    cv.notify_all();
                    return;
                }
            }
            if (item) {
                lock.unlock();
                WorkResult r = detail::run_item(train, *item, worker);
                lock.lock();
                try {
                    if (ordered)
                        finished.emplace(r.id, std::move(r));
                    else
                        commit(r);
                } catch (...) {
                    fatal = std::current_exception();
                }
                cv.notify_all();
                continue;
            }
            if (in_flight.empty() && !master.wants_more()) {
                cv.notify_all();
                return;
            }
            cv.wait(lock);
        }
    };

    if (workers == 1) {
        worker_loop(0);
    } else {
        std::vector<std::thread> threads;
        for (std::size_t w = 0; w < workers; ++w) threads.emplace_back(worker_loop, w);
        for (auto& t : threads) t.join();
    }
    if (fatal) std::rethrow_exception(fatal);
    return master.report();
}

}  // namespace examm
