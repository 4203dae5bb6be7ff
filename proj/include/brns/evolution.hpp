#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

#include "brns/archive.hpp"
#include "brns/brns_estimator.hpp"
#include "brns/environment.hpp"
#include "brns/rng.hpp"
#include "brns/runlog.hpp"
#include "brns/types.hpp"

namespace brns {

enum class EstimatorKind { Brns, Archive };

std::string estimator_name(EstimatorKind kind);
EstimatorKind estimator_from_name(const std::string& name);

struct MutationParams {
    double eta_m = 15.0;
    /// Per-gene mutation probability; unset means 1 / genotype length.
    std::optional<double> p_m;
    Interval gene_bounds{-1.0, 1.0};

    double resolved_p_m(std::size_t genotype_length) const {
        return p_m ? *p_m : 1.0 / static_cast<double>(genotype_length);
    }
};

struct ArchiveParams {
    std::size_t max_size = 10000;
    std::size_t growth_rate = 6;
    std::size_t k = 15;
    ArchiveAddPolicy add_policy = ArchiveAddPolicy::Random;
};

struct BrnsParams {
    std::size_t embed_factor = 2;  // c in dim(E) = c * dim(B)
    double learning_rate = 1e-2;
    double init_scale = 1.0;
    std::size_t frozen_depth = 3;
    std::size_t trainable_depth = 5;
    std::size_t warmup_epochs = 15;
    std::size_t warmup_batch_size = 64;
    std::size_t warmup_batches_per_epoch = 20;
    std::size_t train_steps = 5;
    std::size_t train_batch_size = 64;

    EncoderPairConfig encoder_config(std::size_t behavior_dim) const;
};

struct EvolutionConfig {
    std::size_t mu = 100;
    std::size_t lambda = 100;
    int generations = 200;
    EstimatorKind estimator = EstimatorKind::Brns;
    MutationParams mutation;
    ArchiveParams archive;
    BrnsParams brns;
    /// When true (default) the whole candidate set is rescored with the
    /// current estimator before selection; when false parents keep the score
    /// from their own evaluation generation.
    bool rescore_parents = true;
    /// Trainable-encoder snapshots are stored every this many generations.
    int snapshot_interval = 1;
    /// Success region; unset falls back to the environment's goal.
    std::optional<Vec> goal_override;
    std::optional<double> goal_radius_override;
};

/// Deb's bounded polynomial mutation: each gene mutated independently with
/// probability p_m; results stay within bounds by construction.
Vec polynomial_mutation(const Vec& genotype, double eta_m, double p_m,
                        const Interval& bounds, RngStream& rng);

/// lambda offspring, each mutated from a uniformly chosen parent; age 0,
/// parent_id set, ids assigned from next_id upward.
std::vector<Individual> generate_offspring(std::span<const Individual> population,
                                           std::size_t lambda, const MutationParams& mutation,
                                           std::uint64_t& next_id, RngStream& rng);

/// The mu highest-novelty candidates (ties to the lower id). Survivors that
/// came from the previous population get their age incremented.
std::vector<Individual> select_most_novel(std::vector<Individual> candidates, std::size_t mu,
                                          std::size_t previous_population_size);

/// Closed-ball success predicate.
bool success_check(const Vec& behavior, const Vec& goal, double radius);

/// Novelty estimator plugged into the evolutionary loop. Implementations:
/// the encoder pair (archive-less) and the k-nn archive baseline.
class NoveltyEstimator {
public:
    virtual ~NoveltyEstimator() = default;
    virtual std::string name() const = 0;

    /// Called once for each newly evaluated individual.
    virtual void observe(const Individual& individual) = 0;

    /// Novelty of every candidate under the current estimator state.
    virtual std::vector<double> score(std::span<const Individual> candidates) = 0;

    /// Post-selection update (train the predictor / maintain the archive).
    /// Writes its delta into the generation record.
    virtual void update(GenerationRecord& record) = 0;

    /// Stores the state used for scoring this generation, when requested.
    virtual void snapshot(GenerationRecord& record, bool store) = 0;

    /// One-time global entries (frozen encoder, warmup stats).
    virtual void describe(RunLog& log) const {}
};

std::unique_ptr<NoveltyEstimator> make_estimator(const EvolutionConfig& config,
                                                 const Environment& env,
                                                 const RngStream& root);

/// Runs the full loop: initial population, per-generation variation,
/// evaluation, success collection, novelty scoring, elitist selection and
/// estimator update. config_echo is embedded in the log header verbatim.
///
/// flush_partial, when set, receives the partial log if an environment
/// evaluation throws (the exception is rethrown).
RunLog run_ns(const EvolutionConfig& config, const Environment& env, std::uint64_t seed,
              nlohmann::json config_echo = {},
              const std::function<void(const RunLog&)>& flush_partial = {});

}  // namespace brns
