#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "brns/mlp.hpp"
#include "brns/rng.hpp"
#include "brns/types.hpp"

namespace brns {

/// (behavior, frozen-encoder embedding) pairs accumulated during the current
/// generation; cleared after each training pass.
struct TrainingBuffer {
    std::vector<Vec> behaviors;
    std::vector<Vec> targets;

    std::size_t size() const { return behaviors.size(); }
    bool empty() const { return behaviors.empty(); }
    void clear();
};

struct EncoderPairConfig {
    std::size_t behavior_dim = 2;
    std::size_t embed_factor = 2;     // dim(embedding) = embed_factor * behavior_dim
    double learning_rate = 1e-2;
    double init_scale = 1.0;          // multiplies the He standard deviation
    std::size_t frozen_depth = 3;     // weight layers in the frozen encoder
    std::size_t trainable_depth = 5;  // weight layers in the trainable one
};

/// Archive-less novelty estimator: a frozen randomly initialized encoder and
/// a deeper trainable predictor, both mapping behavior descriptors to a
/// common embedding space. Novelty of b is the squared L2 error between the
/// two embeddings; training the predictor on visited behaviors drives their
/// error toward zero while unvisited regions keep a large error.
class EncoderPair {
public:
    EncoderPair() = default;

    /// Both encoders He-initialized with leaky-ReLU hidden layers, a linear
    /// final layer, and 3 * behavior_dim units per hidden layer.
    static EncoderPair create(const EncoderPairConfig& config, RngStream& rng);

    /// Squared L2 distance between the two embeddings of b. Pure.
    double novelty(const Vec& b) const;

    /// novelty(b) strictly greater than the threshold t.
    bool is_novel(const Vec& b, double t) const { return novelty(b) > t; }

    /// Appends (b, frozen embedding of b) to the training buffer.
    void observe(const Vec& b);

    /// Trains the predictor toward the frozen encoder on uniform samples from
    /// the bounded behavior space: `epochs` epochs of `batches_per_epoch`
    /// one-Adam-step batches. Records the mean novelty over fresh uniform
    /// samples before and after (see warmup_novelty_before/after).
    void warmup(std::span<const Interval> bounds, std::size_t epochs,
                std::size_t batch_size, std::size_t batches_per_epoch,
                RngStream& rng);

    /// `steps` Adam mini-batch steps on the mean per-sample error over the
    /// buffer, then clears the buffer and advances the generation counter.
    /// An empty buffer is a no-op (recorded in empty_train_calls).
    void train_generation(std::size_t steps, std::size_t batch_size, RngStream& rng);

    /// Mean novelty over n uniform samples from the given bounds.
    double mean_novelty_uniform(std::span<const Interval> bounds, std::size_t n,
                                RngStream& rng) const;

    const MlpNetwork& frozen() const { return frozen_; }
    const MlpNetwork& trainable() const { return trainable_; }
    MlpNetwork& trainable_mut() { return trainable_; }
    const TrainingBuffer& buffer() const { return buffer_; }
    const EncoderPairConfig& config() const { return config_; }
    std::size_t embed_dim() const { return frozen_.output_dim(); }
    int generation() const { return generation_; }

    double warmup_novelty_before() const { return warmup_before_; }
    double warmup_novelty_after() const { return warmup_after_; }
    int empty_train_calls() const { return empty_train_calls_; }

    /// Direct access for snapshot restore (diagnostics replay).
    void set_trainable_weights(std::span<const double> flat) { trainable_.unflatten(flat); }

private:
    void train_batch(std::span<const Vec> behaviors, std::span<const Vec> targets);

    EncoderPairConfig config_;
    MlpNetwork frozen_;
    MlpNetwork trainable_;
    AdamState adam_;
    TrainingBuffer buffer_;
    int generation_ = 0;
    double warmup_before_ = -1.0;
    double warmup_after_ = -1.0;
    int empty_train_calls_ = 0;
};

}  // namespace brns
