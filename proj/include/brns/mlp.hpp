#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "brns/rng.hpp"
#include "brns/types.hpp"

namespace brns {

enum class Activation { Tanh, LeakyRelu, Linear };

std::string activation_name(Activation a);
Activation activation_from_name(const std::string& name);

/// One dense layer: out_dim x in_dim weight matrix (row-major), no bias.
struct Layer {
    std::size_t in_dim = 0;
    std::size_t out_dim = 0;
    Activation activation = Activation::Linear;
    double leaky_alpha = 0.01;
    std::vector<double> weights;  // weights[r * in_dim + c]
};

/// Gradient buffers shaped like the weight matrices of a network.
using LayerGrads = std::vector<std::vector<double>>;

/// Plain fully connected feed-forward network, y^l = act(V^l y^{l-1}).
///
/// No biases. Value type: copying copies the weights.
class MlpNetwork {
public:
    MlpNetwork() = default;

    /// He initialization: weights of layer l ~ N(0, scale^2 * 2 / in_dim_l).
    /// dims.size() >= 2, activations.size() == dims.size() - 1.
    static MlpNetwork he_init(std::span<const std::size_t> dims,
                              std::span<const Activation> activations,
                              RngStream& rng, double scale = 1.0);

    /// Zero-weight network with the given shape.
    static MlpNetwork zeros(std::span<const std::size_t> dims,
                            std::span<const Activation> activations);

    Vec forward(std::span<const double> x) const;

    /// Squared L2 error ||f(x) - target||^2 and its gradient w.r.t. every
    /// weight, via backpropagation. grads is resized to match the layers.
    double squared_error_grad(std::span<const double> x,
                              std::span<const double> target,
                              LayerGrads& grads) const;

    LayerGrads make_grads() const;

    std::size_t input_dim() const { return layers_.empty() ? 0 : layers_.front().in_dim; }
    std::size_t output_dim() const { return layers_.empty() ? 0 : layers_.back().out_dim; }
    std::size_t depth() const { return layers_.size(); }
    std::size_t weight_count() const;

    const std::vector<Layer>& layers() const { return layers_; }
    std::vector<Layer>& layers() { return layers_; }

    /// All weights concatenated layer by layer, rows in order.
    Vec flatten() const;
    /// Inverse of flatten() for a network of this shape.
    void unflatten(std::span<const double> flat);

    bool same_shape(const MlpNetwork& other) const;

private:
    std::vector<Layer> layers_;
};

/// Adam optimizer state over the weights of one network.
struct AdamConfig {
    double lr = 1e-2;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

struct AdamState {
    AdamConfig config;
    long step_count = 0;
    LayerGrads m;  // first moments
    LayerGrads v;  // second moments

    static AdamState for_network(const MlpNetwork& net, AdamConfig config = {});
};

/// One Adam update with bias correction. grads must match the network shape.
void adam_step(MlpNetwork& net, AdamState& state, const LayerGrads& grads);

}  // namespace brns
