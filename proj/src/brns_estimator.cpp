#include "brns/brns_estimator.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace brns {

void TrainingBuffer::clear() {
    behaviors.clear();
    targets.clear();
}

EncoderPair EncoderPair::create(const EncoderPairConfig& config, RngStream& rng) {
    if (config.behavior_dim == 0) throw std::invalid_argument("behavior_dim must be >= 1");
    if (config.embed_factor == 0) throw std::invalid_argument("embed_factor must be >= 1");
    if (config.trainable_depth <= config.frozen_depth)
        throw std::invalid_argument("trainable encoder must be deeper than the frozen one");

    const std::size_t d_b = config.behavior_dim;
    const std::size_t hidden = 3 * d_b;
    const std::size_t embed = config.embed_factor * d_b;

    auto make_dims = [&](std::size_t depth) {
        std::vector<std::size_t> dims(depth + 1, hidden);
        dims.front() = d_b;
        dims.back() = embed;
        return dims;
    };
    auto make_acts = [&](std::size_t depth) {
        std::vector<Activation> acts(depth, Activation::LeakyRelu);
        acts.back() = Activation::Linear;
        return acts;
    };

    EncoderPair pair;
    pair.config_ = config;
    const auto frozen_dims = make_dims(config.frozen_depth);
    const auto frozen_acts = make_acts(config.frozen_depth);
    pair.frozen_ = MlpNetwork::he_init(frozen_dims, frozen_acts, rng, config.init_scale);
    const auto train_dims = make_dims(config.trainable_depth);
    const auto train_acts = make_acts(config.trainable_depth);
    pair.trainable_ = MlpNetwork::he_init(train_dims, train_acts, rng, config.init_scale);
    pair.adam_ = AdamState::for_network(pair.trainable_, AdamConfig{config.learning_rate});
    return pair;
}

double EncoderPair::novelty(const Vec& b) const {
    if (b.size() != config_.behavior_dim)
        throw std::invalid_argument("behavior dimension mismatch");
    const Vec target = frozen_.forward(b);
    const Vec predicted = trainable_.forward(b);
    return squared_distance(target, predicted);
}

void EncoderPair::observe(const Vec& b) {
    if (b.size() != config_.behavior_dim)
        throw std::invalid_argument("behavior dimension mismatch");
    buffer_.behaviors.push_back(b);
    buffer_.targets.push_back(frozen_.forward(b));
}

void EncoderPair::train_batch(std::span<const Vec> behaviors, std::span<const Vec> targets) {
    LayerGrads acc = trainable_.make_grads();
    LayerGrads sample = trainable_.make_grads();
    for (std::size_t i = 0; i < behaviors.size(); ++i) {
        trainable_.squared_error_grad(behaviors[i], targets[i], sample);
        for (std::size_t l = 0; l < acc.size(); ++l)
            for (std::size_t j = 0; j < acc[l].size(); ++j) acc[l][j] += sample[l][j];
    }
    const double inv = 1.0 / static_cast<double>(behaviors.size());
    for (auto& layer : acc)
        for (double& g : layer) g *= inv;
    adam_step(trainable_, adam_, acc);
}

void EncoderPair::warmup(std::span<const Interval> bounds, std::size_t epochs,
                         std::size_t batch_size, std::size_t batches_per_epoch,
                         RngStream& rng) {
    if (bounds.size() != config_.behavior_dim)
        throw std::invalid_argument("bounds dimension mismatch");
    for (const Interval& iv : bounds)
        if (!std::isfinite(iv.lo) || !std::isfinite(iv.hi) || iv.hi <= iv.lo)
            throw std::invalid_argument("warmup needs a bounded behavior space");
    if (batch_size == 0 || batches_per_epoch == 0)
        throw std::invalid_argument("warmup batch parameters must be >= 1");

    // measured on the same derived stream before and after, so the two means
    // are over an identical sample set
    RngStream eval_rng = rng.split("warmup_eval");
    warmup_before_ = mean_novelty_uniform(bounds, 1000, eval_rng);

    std::vector<Vec> batch(batch_size, Vec(config_.behavior_dim));
    std::vector<Vec> targets(batch_size);
    for (std::size_t e = 0; e < epochs; ++e) {
        for (std::size_t bi = 0; bi < batches_per_epoch; ++bi) {
            for (Vec& point : batch)
                for (std::size_t d = 0; d < point.size(); ++d)
                    point[d] = rng.uniform(bounds[d].lo, bounds[d].hi);
            for (std::size_t i = 0; i < batch_size; ++i)
                targets[i] = frozen_.forward(batch[i]);
            train_batch(batch, targets);
        }
    }

    eval_rng = rng.split("warmup_eval");
    warmup_after_ = mean_novelty_uniform(bounds, 1000, eval_rng);
}

void EncoderPair::train_generation(std::size_t steps, std::size_t batch_size,
                                   RngStream& rng) {
    if (buffer_.empty()) {
        ++empty_train_calls_;
        ++generation_;
        return;
    }
    if (batch_size == 0) throw std::invalid_argument("batch_size must be >= 1");

    const std::size_t n = buffer_.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::vector<Vec> batch, targets;
    for (std::size_t s = 0; s < steps; ++s) {
        const std::size_t take = std::min(batch_size, n);
        // uniform sample without replacement per step
        for (std::size_t i = 0; i < take; ++i)
            std::swap(order[i], order[i + rng.uniform_index(n - i)]);
        batch.clear();
        targets.clear();
        for (std::size_t i = 0; i < take; ++i) {
            batch.push_back(buffer_.behaviors[order[i]]);
            targets.push_back(buffer_.targets[order[i]]);
        }
        train_batch(batch, targets);
    }
    buffer_.clear();
    ++generation_;
}

double EncoderPair::mean_novelty_uniform(std::span<const Interval> bounds, std::size_t n,
                                         RngStream& rng) const {
    if (bounds.size() != config_.behavior_dim)
        throw std::invalid_argument("bounds dimension mismatch");
    Vec point(config_.behavior_dim);
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t d = 0; d < point.size(); ++d)
            point[d] = rng.uniform(bounds[d].lo, bounds[d].hi);
        sum += novelty(point);
    }
    return sum / static_cast<double>(n);
}

}  // namespace brns
