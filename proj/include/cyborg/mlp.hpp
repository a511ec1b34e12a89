#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "cyborg/errors.hpp"
#include "cyborg/random.hpp"

namespace cyborg {

// Fully connected network: rectifier on hidden layers, identity on the output layer.
// Weights of a layer are stored row-major with shape [in][out], so a forward pass is a
// sequence of axpy updates that skip zero inputs (sparse binary observations, inactive units).
class Mlp {
public:
    struct Layer {
        int in = 0;
        int out = 0;
        std::vector<double> weights;  // [in][out]
        std::vector<double> bias;     // [out]

        bool operator==(const Layer&) const = default;
    };

    Mlp() = default;

    Mlp(std::vector<int> sizes, Rng& rng) : sizes_(std::move(sizes)) {
        if (sizes_.size() < 2) throw ShapeMismatch("an MLP needs at least input and output sizes");
        for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
            Layer layer{sizes_[l], sizes_[l + 1], {}, {}};
            layer.weights.resize(static_cast<std::size_t>(layer.in) * layer.out);
            layer.bias.assign(static_cast<std::size_t>(layer.out), 0.0);
            const bool last = l + 2 == sizes_.size();
            // He-uniform for rectifier layers, Glorot-uniform for the linear head.
            const double limit = last ? std::sqrt(6.0 / (layer.in + layer.out))
                                      : std::sqrt(6.0 / layer.in);
            for (auto& w : layer.weights) w = rng.uniform(-limit, limit);
            layers_.push_back(std::move(layer));
        }
    }

    explicit Mlp(std::vector<Layer> layers) : layers_(std::move(layers)) {
        if (layers_.empty()) throw ShapeMismatch("an MLP needs at least one layer");
        sizes_.push_back(layers_.front().in);
        for (const auto& l : layers_) {
            if (l.in != sizes_.back() || l.weights.size() != static_cast<std::size_t>(l.in) * l.out ||
                l.bias.size() != static_cast<std::size_t>(l.out))
                throw ShapeMismatch("inconsistent layer shapes");
            sizes_.push_back(l.out);
        }
    }

    const std::vector<int>& sizes() const { return sizes_; }
    int input_size() const { return sizes_.front(); }
    int output_size() const { return sizes_.back(); }
    const std::vector<Layer>& layers() const { return layers_; }
    std::vector<Layer>& layers() { return layers_; }

    std::size_t parameter_count() const {
        std::size_t n = 0;
        for (const auto& l : layers_) n += l.weights.size() + l.bias.size();
        return n;
    }

    bool all_finite() const {
        for (const auto& l : layers_) {
            for (double w : l.weights)
                if (!std::isfinite(w)) return false;
            for (double b : l.bias)
                if (!std::isfinite(b)) return false;
        }
        return true;
    }

    // Activations of every layer for a batch, kept for backpropagation.
    // acts[0] is the input, acts[L] the output; each is [batch][size].
    struct Cache {
        int batch = 0;
        std::vector<std::vector<double>> acts;
    };

    void forward(std::span<const double> input, int batch, Cache& cache) const {
        if (input.size() != static_cast<std::size_t>(batch) * input_size())
            throw ShapeMismatch("input size does not match network");
        cache.batch = batch;
        cache.acts.resize(layers_.size() + 1);
        cache.acts[0].assign(input.begin(), input.end());
        for (std::size_t l = 0; l < layers_.size(); ++l) {
            const auto& L = layers_[l];
            const auto& x = cache.acts[l];
            auto& y = cache.acts[l + 1];
            y.resize(static_cast<std::size_t>(batch) * L.out);
            const bool relu = l + 1 < layers_.size();
            for (int b = 0; b < batch; ++b) {
                double* yb = y.data() + static_cast<std::size_t>(b) * L.out;
                const double* xb = x.data() + static_cast<std::size_t>(b) * L.in;
                std::copy(L.bias.begin(), L.bias.end(), yb);
                for (int i = 0; i < L.in; ++i) {
                    const double xi = xb[i];
                    if (xi == 0.0) continue;
                    const double* w = L.weights.data() + static_cast<std::size_t>(i) * L.out;
                    for (int o = 0; o < L.out; ++o) yb[o] += w[o] * xi;
                }
                if (relu)
                    for (int o = 0; o < L.out; ++o) yb[o] = yb[o] > 0.0 ? yb[o] : 0.0;
            }
        }
    }

    std::vector<double> forward(std::span<const double> input, int batch = 1) const {
        Cache c;
        forward(input, batch, c);
        return std::move(c.acts.back());
    }

    // Accumulates parameter gradients given dLoss/dOutput ([batch][out]) and the cache
    // from the matching forward pass. `grads` must have this network's shape.
    void backward(const Cache& cache, std::vector<double> d_out, Mlp& grads) const {
        const int batch = cache.batch;
        std::vector<double> d_in;
        for (std::size_t l = layers_.size(); l-- > 0;) {
            const auto& L = layers_[l];
            auto& G = grads.layers_[l];
            const auto& x = cache.acts[l];
            const bool need_input_grad = l > 0;
            if (need_input_grad) d_in.assign(static_cast<std::size_t>(batch) * L.in, 0.0);
            for (int b = 0; b < batch; ++b) {
                const double* dy = d_out.data() + static_cast<std::size_t>(b) * L.out;
                const double* xb = x.data() + static_cast<std::size_t>(b) * L.in;
                for (int o = 0; o < L.out; ++o) G.bias[o] += dy[o];
                for (int i = 0; i < L.in; ++i) {
                    const double* w = L.weights.data() + static_cast<std::size_t>(i) * L.out;
                    const double xi = xb[i];
                    if (xi != 0.0) {
                        double* g = G.weights.data() + static_cast<std::size_t>(i) * L.out;
                        for (int o = 0; o < L.out; ++o) g[o] += xi * dy[o];
                    }
                    // Input of a hidden layer is a rectifier output; zero means inactive.
                    if (need_input_grad && xi > 0.0) {
                        double s = 0.0;
                        for (int o = 0; o < L.out; ++o) s += w[o] * dy[o];
                        d_in[static_cast<std::size_t>(b) * L.in + i] = s;
                    }
                }
            }
            if (need_input_grad) d_out.swap(d_in);
        }
    }

    Mlp zeros_like() const {
        Mlp z = *this;
        for (auto& l : z.layers_) {
            std::fill(l.weights.begin(), l.weights.end(), 0.0);
            std::fill(l.bias.begin(), l.bias.end(), 0.0);
        }
        return z;
    }

    double squared_norm() const {
        double s = 0.0;
        for (const auto& l : layers_) {
            for (double w : l.weights) s += w * w;
            for (double b : l.bias) s += b * b;
        }
        return s;
    }

    // this += scale * other
    void add_scaled(const Mlp& other, double scale) {
        for (std::size_t l = 0; l < layers_.size(); ++l) {
            auto& a = layers_[l];
            const auto& b = other.layers_[l];
            for (std::size_t i = 0; i < a.weights.size(); ++i) a.weights[i] += scale * b.weights[i];
            for (std::size_t i = 0; i < a.bias.size(); ++i) a.bias[i] += scale * b.bias[i];
        }
    }

    bool operator==(const Mlp&) const = default;

private:
    std::vector<int> sizes_;
    std::vector<Layer> layers_;
};

}  // namespace cyborg
