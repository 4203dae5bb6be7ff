#include "brns/mlp.hpp"

#include <cassert>
#include <cmath>
#include <stdexcept>

namespace brns {

std::string activation_name(Activation a) {
    switch (a) {
        case Activation::Tanh: return "tanh";
        case Activation::LeakyRelu: return "leaky_relu";
        case Activation::Linear: return "linear";
    }
    return "linear";
}

Activation activation_from_name(const std::string& name) {
    if (name == "tanh") return Activation::Tanh;
    if (name == "leaky_relu") return Activation::LeakyRelu;
    if (name == "linear") return Activation::Linear;
    throw std::invalid_argument("unknown activation: " + name);
}

namespace {

double apply_activation(Activation act, double alpha, double z) {
    switch (act) {
        case Activation::Tanh: return std::tanh(z);
        case Activation::LeakyRelu: return z >= 0.0 ? z : alpha * z;
        case Activation::Linear: return z;
    }
    return z;
}

/// Derivative expressed through pre-activation z and output y.
double activation_derivative(Activation act, double alpha, double z, double y) {
    switch (act) {
        case Activation::Tanh: return 1.0 - y * y;
        case Activation::LeakyRelu: return z >= 0.0 ? 1.0 : alpha;
        case Activation::Linear: return 1.0;
    }
    return 1.0;
}

void check_shape(std::span<const std::size_t> dims,
                 std::span<const Activation> activations) {
    if (dims.size() < 2) throw std::invalid_argument("network needs at least 2 dims");
    if (activations.size() != dims.size() - 1)
        throw std::invalid_argument("need one activation per layer");
    for (std::size_t d : dims)
        if (d == 0) throw std::invalid_argument("zero layer dimension");
}

}  // namespace

MlpNetwork MlpNetwork::he_init(std::span<const std::size_t> dims,
                               std::span<const Activation> activations,
                               RngStream& rng, double scale) {
    check_shape(dims, activations);
    MlpNetwork net;
    net.layers_.resize(dims.size() - 1);
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        Layer& layer = net.layers_[l];
        layer.in_dim = dims[l];
        layer.out_dim = dims[l + 1];
        layer.activation = activations[l];
        layer.weights.resize(layer.in_dim * layer.out_dim);
        const double stddev = scale * std::sqrt(2.0 / static_cast<double>(layer.in_dim));
        for (double& w : layer.weights) w = rng.normal(0.0, stddev);
    }
    return net;
}

MlpNetwork MlpNetwork::zeros(std::span<const std::size_t> dims,
                             std::span<const Activation> activations) {
    check_shape(dims, activations);
    MlpNetwork net;
    net.layers_.resize(dims.size() - 1);
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        Layer& layer = net.layers_[l];
        layer.in_dim = dims[l];
        layer.out_dim = dims[l + 1];
        layer.activation = activations[l];
        layer.weights.assign(layer.in_dim * layer.out_dim, 0.0);
    }
    return net;
}

Vec MlpNetwork::forward(std::span<const double> x) const {
    if (layers_.empty()) throw std::logic_error("forward on empty network");
    if (x.size() != input_dim()) throw std::invalid_argument("input dimension mismatch");

    Vec current(x.begin(), x.end());
    Vec next;
    for (const Layer& layer : layers_) {
        next.assign(layer.out_dim, 0.0);
        for (std::size_t r = 0; r < layer.out_dim; ++r) {
            const double* row = layer.weights.data() + r * layer.in_dim;
            double z = 0.0;
            for (std::size_t c = 0; c < layer.in_dim; ++c) z += row[c] * current[c];
            next[r] = apply_activation(layer.activation, layer.leaky_alpha, z);
        }
        current.swap(next);
    }
    return current;
}

double MlpNetwork::squared_error_grad(std::span<const double> x,
                                      std::span<const double> target,
                                      LayerGrads& grads) const {
    if (x.size() != input_dim()) throw std::invalid_argument("input dimension mismatch");
    if (target.size() != output_dim()) throw std::invalid_argument("target dimension mismatch");

    const std::size_t depth = layers_.size();
    // forward pass keeping pre-activations and outputs per layer
    std::vector<Vec> zs(depth), ys(depth + 1);
    ys[0].assign(x.begin(), x.end());
    for (std::size_t l = 0; l < depth; ++l) {
        const Layer& layer = layers_[l];
        zs[l].assign(layer.out_dim, 0.0);
        ys[l + 1].assign(layer.out_dim, 0.0);
        for (std::size_t r = 0; r < layer.out_dim; ++r) {
            const double* row = layer.weights.data() + r * layer.in_dim;
            double z = 0.0;
            for (std::size_t c = 0; c < layer.in_dim; ++c) z += row[c] * ys[l][c];
            zs[l][r] = z;
            ys[l + 1][r] = apply_activation(layer.activation, layer.leaky_alpha, z);
        }
    }

    double loss = 0.0;
    Vec delta(output_dim());
    for (std::size_t r = 0; r < output_dim(); ++r) {
        const double err = ys[depth][r] - target[r];
        loss += err * err;
        delta[r] = 2.0 * err;
    }

    if (grads.size() != depth) grads = make_grads();
    Vec prev_delta;
    for (std::size_t li = depth; li-- > 0;) {
        const Layer& layer = layers_[li];
        // fold the activation derivative into delta
        for (std::size_t r = 0; r < layer.out_dim; ++r)
            delta[r] *= activation_derivative(layer.activation, layer.leaky_alpha,
                                              zs[li][r], ys[li + 1][r]);
        auto& g = grads[li];
        g.assign(layer.weights.size(), 0.0);
        for (std::size_t r = 0; r < layer.out_dim; ++r) {
            double* grow = g.data() + r * layer.in_dim;
            const double d = delta[r];
            for (std::size_t c = 0; c < layer.in_dim; ++c) grow[c] = d * ys[li][c];
        }
        if (li > 0) {
            prev_delta.assign(layer.in_dim, 0.0);
            for (std::size_t r = 0; r < layer.out_dim; ++r) {
                const double* row = layer.weights.data() + r * layer.in_dim;
                const double d = delta[r];
                for (std::size_t c = 0; c < layer.in_dim; ++c) prev_delta[c] += row[c] * d;
            }
            delta.swap(prev_delta);
        }
    }
    return loss;
}

LayerGrads MlpNetwork::make_grads() const {
    LayerGrads grads(layers_.size());
    for (std::size_t l = 0; l < layers_.size(); ++l)
        grads[l].assign(layers_[l].weights.size(), 0.0);
    return grads;
}

std::size_t MlpNetwork::weight_count() const {
    std::size_t n = 0;
    for (const Layer& layer : layers_) n += layer.weights.size();
    return n;
}

Vec MlpNetwork::flatten() const {
    Vec flat;
    flat.reserve(weight_count());
    for (const Layer& layer : layers_)
        flat.insert(flat.end(), layer.weights.begin(), layer.weights.end());
    return flat;
}

void MlpNetwork::unflatten(std::span<const double> flat) {
    if (flat.size() != weight_count())
        throw std::invalid_argument("flat weight vector has wrong length");
    std::size_t offset = 0;
    for (Layer& layer : layers_) {
        std::copy(flat.begin() + offset, flat.begin() + offset + layer.weights.size(),
                  layer.weights.begin());
        offset += layer.weights.size();
    }
}

bool MlpNetwork::same_shape(const MlpNetwork& other) const {
    if (layers_.size() != other.layers_.size()) return false;
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        if (layers_[l].in_dim != other.layers_[l].in_dim) return false;
        if (layers_[l].out_dim != other.layers_[l].out_dim) return false;
    }
    return true;
}

AdamState AdamState::for_network(const MlpNetwork& net, AdamConfig config) {
    AdamState state;
    state.config = config;
    state.m = net.make_grads();
    state.v = net.make_grads();
    return state;
}

void adam_step(MlpNetwork& net, AdamState& state, const LayerGrads& grads) {
    auto& layers = net.layers();
    if (grads.size() != layers.size() || state.m.size() != layers.size())
        throw std::invalid_argument("gradient/state shape mismatch");

    state.step_count += 1;
    const AdamConfig& c = state.config;
    const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(state.step_count));
    const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(state.step_count));

    for (std::size_t l = 0; l < layers.size(); ++l) {
        auto& w = layers[l].weights;
        const auto& g = grads[l];
        auto& m = state.m[l];
        auto& v = state.v[l];
        if (g.size() != w.size())
            throw std::invalid_argument("gradient/state shape mismatch");
        for (std::size_t i = 0; i < w.size(); ++i) {
            m[i] = c.beta1 * m[i] + (1.0 - c.beta1) * g[i];
            v[i] = c.beta2 * v[i] + (1.0 - c.beta2) * g[i] * g[i];
            const double m_hat = m[i] / bc1;
            const double v_hat = v[i] / bc2;
            w[i] -= c.lr * m_hat / (std::sqrt(v_hat) + c.eps);
        }
    }
}

}  // namespace brns
