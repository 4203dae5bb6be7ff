#include "brns/evolution.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <stdexcept>

namespace brns {

std::string estimator_name(EstimatorKind kind) {
    return kind == EstimatorKind::Brns ? "brns" : "archive";
}

EstimatorKind estimator_from_name(const std::string& name) {
    if (name == "brns") return EstimatorKind::Brns;
    if (name == "archive") return EstimatorKind::Archive;
    throw std::invalid_argument("unknown estimator: " + name);
}

EncoderPairConfig BrnsParams::encoder_config(std::size_t behavior_dim) const {
    EncoderPairConfig c;
    c.behavior_dim = behavior_dim;
    c.embed_factor = embed_factor;
    c.learning_rate = learning_rate;
    c.init_scale = init_scale;
    c.frozen_depth = frozen_depth;
    c.trainable_depth = trainable_depth;
    return c;
}

Vec polynomial_mutation(const Vec& genotype, double eta_m, double p_m,
                        const Interval& bounds, RngStream& rng) {
    Vec out = genotype;
    const double yl = bounds.lo;
    const double yu = bounds.hi;
    const double range = yu - yl;
    const double mut_pow = 1.0 / (eta_m + 1.0);
    for (double& y : out) {
        if (!rng.bernoulli(p_m)) continue;
        const double u = rng.next_double();
        const double delta1 = (y - yl) / range;
        const double delta2 = (yu - y) / range;
        double deltaq;
        if (u <= 0.5) {
            const double xy = 1.0 - delta1;
            const double val = 2.0 * u + (1.0 - 2.0 * u) * std::pow(xy, eta_m + 1.0);
            deltaq = std::pow(val, mut_pow) - 1.0;
        } else {
            const double xy = 1.0 - delta2;
            const double val = 2.0 * (1.0 - u) + 2.0 * (u - 0.5) * std::pow(xy, eta_m + 1.0);
            deltaq = 1.0 - std::pow(val, mut_pow);
        }
        y = std::clamp(y + deltaq * range, yl, yu);
    }
    return out;
}

std::vector<Individual> generate_offspring(std::span<const Individual> population,
                                           std::size_t lambda, const MutationParams& mutation,
                                           std::uint64_t& next_id, RngStream& rng) {
    if (population.empty()) throw std::invalid_argument("cannot breed an empty population");
    std::vector<Individual> offspring;
    offspring.reserve(lambda);
    for (std::size_t i = 0; i < lambda; ++i) {
        const Individual& parent = population[rng.uniform_index(population.size())];
        Individual child;
        child.id = next_id++;
        child.parent_id = parent.id;
        child.age = 0;
        child.genotype =
            polynomial_mutation(parent.genotype, mutation.eta_m,
                                mutation.resolved_p_m(parent.genotype.size()),
                                mutation.gene_bounds, rng);
        offspring.push_back(std::move(child));
    }
    return offspring;
}

std::vector<Individual> select_most_novel(std::vector<Individual> candidates, std::size_t mu,
                                          std::size_t previous_population_size) {
    if (candidates.size() < mu)
        throw std::invalid_argument("fewer candidates than the population size");
    for (const Individual& ind : candidates)
        if (!ind.novelty) throw std::logic_error("candidate without a novelty score");

    // elitist truncation; ties broken deterministically toward the lower id
    std::vector<std::size_t> order(candidates.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (*candidates[a].novelty != *candidates[b].novelty)
            return *candidates[a].novelty > *candidates[b].novelty;
        return candidates[a].id < candidates[b].id;
    });

    std::vector<Individual> selected;
    selected.reserve(mu);
    for (std::size_t rank = 0; rank < mu; ++rank) {
        const std::size_t idx = order[rank];
        Individual ind = std::move(candidates[idx]);
        if (idx < previous_population_size) ind.age += 1;
        selected.push_back(std::move(ind));
    }
    return selected;
}

bool success_check(const Vec& behavior, const Vec& goal, double radius) {
    if (behavior.size() != goal.size())
        throw std::invalid_argument("behavior/goal dimension mismatch");
    return euclidean_distance(behavior, goal) <= radius;
}

namespace {

class BrnsEstimator final : public NoveltyEstimator {
public:
    BrnsEstimator(const EvolutionConfig& config, const Environment& env,
                  const RngStream& root)
        : params_(config.brns),
          bounds_(env.behavior_bounds()),
          train_rng_(root.split("brns_train")) {
        RngStream init_rng = root.split("brns_init");
        pair_ = EncoderPair::create(params_.encoder_config(env.behavior_dim()), init_rng);
        RngStream warmup_rng = root.split("brns_warmup");
        pair_.warmup(bounds_, params_.warmup_epochs, params_.warmup_batch_size,
                     params_.warmup_batches_per_epoch, warmup_rng);
    }

    std::string name() const override { return "brns"; }

    void observe(const Individual& individual) override {
        pair_.observe(*individual.behavior);
    }

    std::vector<double> score(std::span<const Individual> candidates) override {
        std::vector<double> out(candidates.size());
        for (std::size_t i = 0; i < candidates.size(); ++i)
            out[i] = pair_.novelty(*candidates[i].behavior);
        return out;
    }

    void update(GenerationRecord&) override {
        pair_.train_generation(params_.train_steps, params_.train_batch_size, train_rng_);
    }

    void snapshot(GenerationRecord& record, bool store) override {
        if (store) record.encoder_snapshot = pair_.trainable();
    }

    void describe(RunLog& log) const override {
        log.frozen_encoder = pair_.frozen();
        log.warmup_novelty_before = pair_.warmup_novelty_before();
        log.warmup_novelty_after = pair_.warmup_novelty_after();
    }

private:
    BrnsParams params_;
    std::vector<Interval> bounds_;
    EncoderPair pair_;
    RngStream train_rng_;
};

class ArchiveEstimator final : public NoveltyEstimator {
public:
    ArchiveEstimator(const EvolutionConfig& config, const RngStream& root)
        : k_(config.archive.k), maintain_rng_(root.split("archive_maintain")) {
        archive_.max_size = config.archive.max_size;
        archive_.growth_rate = config.archive.growth_rate;
        archive_.add_policy = config.archive.add_policy;
    }

    std::string name() const override { return "archive"; }

    void observe(const Individual& individual) override {
        pending_.push_back(*individual.behavior);
        pending_novelty_.push_back(individual.novelty.value_or(0.0));
    }

    std::vector<double> score(std::span<const Individual> candidates) override {
        last_scores_ = archive_novelty_all(candidates, archive_, k_);
        if (archive_.add_policy == ArchiveAddPolicy::MostNovel) {
            // pending entries are the tail of the candidate list
            const std::size_t offset = candidates.size() - pending_.size();
            for (std::size_t i = 0; i < pending_.size(); ++i)
                pending_novelty_[i] = last_scores_[offset + i];
        }
        return last_scores_;
    }

    void update(GenerationRecord& record) override {
        record.archive_delta =
            archive_maintain(archive_, pending_, maintain_rng_, pending_novelty_);
        pending_.clear();
        pending_novelty_.clear();
    }

    void snapshot(GenerationRecord&, bool) override {
        // archive states are reconstructed from the per-generation deltas
    }

private:
    std::size_t k_;
    Archive archive_;
    std::vector<Vec> pending_;
    std::vector<double> pending_novelty_;
    std::vector<double> last_scores_;
    RngStream maintain_rng_;
};

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

}  // namespace

std::unique_ptr<NoveltyEstimator> make_estimator(const EvolutionConfig& config,
                                                 const Environment& env,
                                                 const RngStream& root) {
    if (config.estimator == EstimatorKind::Brns)
        return std::make_unique<BrnsEstimator>(config, env, root);
    return std::make_unique<ArchiveEstimator>(config, root);
}

RunLog run_ns(const EvolutionConfig& config, const Environment& env, std::uint64_t seed,
              nlohmann::json config_echo, const std::function<void(const RunLog&)>& flush_partial) {
    if (config.mu < 1 || config.lambda < 1 || config.generations < 1)
        throw std::invalid_argument("mu, lambda and generations must all be >= 1");

    const Vec goal = config.goal_override ? *config.goal_override
                                          : env.goal().value_or(Vec(env.behavior_dim(), 0.0));
    const bool has_goal = config.goal_override.has_value() || env.goal().has_value();
    const double goal_radius = config.goal_radius_override.value_or(env.goal_radius());

    RunLog log;
    log.seed = seed;
    log.estimator = estimator_name(config.estimator);
    log.config_echo = std::move(config_echo);
    log.config_digest = [&] {
        char hex[19];
        std::snprintf(hex, sizeof(hex), "%016llx",
                      static_cast<unsigned long long>(fnv1a64(log.config_echo.dump())));
        return std::string(hex);
    }();

    const RngStream root(seed);
    RngStream init_rng = root.split("init");
    RngStream mutation_rng = root.split("mutation");

    auto estimator = make_estimator(config, env, root);
    estimator->describe(log);

    std::uint64_t next_id = 0;
    const Interval gene_bounds = config.mutation.gene_bounds;

    std::vector<Individual> population;
    population.reserve(config.mu);
    for (std::size_t i = 0; i < config.mu; ++i) {
        Individual ind;
        ind.id = next_id++;
        ind.genotype.resize(env.genotype_length());
        for (double& gene : ind.genotype) gene = init_rng.uniform(gene_bounds.lo, gene_bounds.hi);
        population.push_back(std::move(ind));
    }

    auto evaluate_all = [&](std::vector<Individual>& group) {
        try {
            for (Individual& ind : group) {
                EvalResult r = env.evaluate(ind.genotype);
                ind.behavior = std::move(r.behavior);
                ind.fitness = r.fitness;
            }
        } catch (...) {
            if (flush_partial) flush_partial(log);
            throw;
        }
    };

    auto collect_solutions = [&](std::span<const Individual> group, int generation,
                                 GenerationRecord& record) {
        if (!has_goal || goal_radius <= 0.0) return;
        for (const Individual& ind : group) {
            if (success_check(*ind.behavior, goal, goal_radius)) {
                log.solutions.push_back({ind.id, generation, *ind.behavior});
                record.new_solutions.push_back(ind.id);
            }
        }
    };

    auto offspring_records = [](std::span<const Individual> group) {
        std::vector<OffspringRecord> records;
        records.reserve(group.size());
        for (const Individual& ind : group)
            records.push_back({ind.id, ind.parent_id, *ind.behavior,
                               ind.novelty.value_or(0.0), ind.fitness.value_or(0.0)});
        return records;
    };

    auto population_entries = [](std::span<const Individual> group) {
        std::vector<PopulationEntry> entries;
        entries.reserve(group.size());
        for (const Individual& ind : group)
            entries.push_back({ind.id, ind.parent_id, ind.age, *ind.behavior,
                               ind.novelty.value_or(0.0)});
        return entries;
    };

    auto snapshot_due = [&](int g) {
        return config.snapshot_interval <= 1 || g % config.snapshot_interval == 0;
    };

    // generation 0: the initial population
    {
        GenerationRecord record;
        record.generation = 0;

        evaluate_all(population);
        for (const Individual& ind : population) estimator->observe(ind);
        collect_solutions(population, 0, record);

        const auto t0 = Clock::now();
        const std::vector<double> scores = estimator->score(population);
        for (std::size_t i = 0; i < population.size(); ++i) population[i].novelty = scores[i];
        estimator->snapshot(record, snapshot_due(0));
        double novelty_ms = ms_since(t0);

        record.offspring = offspring_records(population);

        const auto t1 = Clock::now();
        estimator->update(record);
        novelty_ms += ms_since(t1);

        record.population = population_entries(population);
        log.generations.push_back(std::move(record));
        log.novelty_time_ms.push_back(novelty_ms);
    }

    for (int g = 1; g <= config.generations; ++g) {
        GenerationRecord record;
        record.generation = g;

        std::vector<Individual> offspring =
            generate_offspring(population, config.lambda, config.mutation, next_id,
                               mutation_rng);
        evaluate_all(offspring);
        for (const Individual& ind : offspring) estimator->observe(ind);
        collect_solutions(offspring, g, record);

        std::vector<Individual> candidates;
        candidates.reserve(population.size() + offspring.size());
        for (Individual& ind : population) candidates.push_back(std::move(ind));
        for (Individual& ind : offspring) candidates.push_back(std::move(ind));

        const auto t0 = Clock::now();
        const std::vector<double> scores = estimator->score(candidates);
        const std::size_t pop_size = config.mu;
        for (std::size_t i = 0; i < candidates.size(); ++i) {
            if (config.rescore_parents || i >= pop_size || !candidates[i].novelty)
                candidates[i].novelty = scores[i];
        }
        estimator->snapshot(record, snapshot_due(g));
        double novelty_ms = ms_since(t0);

        record.offspring = offspring_records(
            std::span<const Individual>(candidates).subspan(pop_size));

        population = select_most_novel(std::move(candidates), config.mu, pop_size);

        const auto t1 = Clock::now();
        estimator->update(record);
        novelty_ms += ms_since(t1);

        record.population = population_entries(population);
        log.generations.push_back(std::move(record));
        log.novelty_time_ms.push_back(novelty_ms);
    }

    return log;
}

}  // namespace brns
