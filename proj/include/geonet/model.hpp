#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "geonet/neural.hpp"
#include "geonet/tensor.hpp"

namespace geonet::nn {

enum class LayerKind : int { Conv = 0, BatchNorm = 1, ReLU = 2, MaxPool = 3, GlobalAvgPool = 4, Linear = 5 };

const char* to_string(LayerKind k);

struct LayerSpec {
    LayerKind kind = LayerKind::ReLU;
    std::size_t in_channels = 0;
    std::size_t out_channels = 0;
    std::size_t kernel = 0;
    std::size_t stride = 1;
    std::size_t pad = 0;
    bool bias = false;

    friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

/**
 * The orientation classifier:
 *   conv3x3(1->32)+BN+ReLU+pool, conv3x3(32->64)+BN+ReLU+pool,
 *   conv3x3(64->128)+ReLU, conv1x1(128->128)+ReLU+pool,
 *   global average pool, fully-connected 128->classes.
 * extra_conv inserts a conv3x3(128->128)+ReLU before the 1x1 layer.
 * Convolutions followed by batch norm carry no bias.
 */
std::vector<LayerSpec> geonet_architecture(std::size_t num_classes = 8, bool extra_conv = false);

/// Checks channel chaining and returns the class count (output width of the last layer).
std::size_t validate_architecture(std::span<const LayerSpec> layers, std::size_t in_channels = 1);

template <class T>
struct Param {
    std::string name;
    Tensor<T>* value;
    Tensor<T>* grad;
};

template <class T>
struct NamedTensor {
    std::string name;
    Tensor<T> tensor;
};

template <class T>
class GeoNet {
public:
    GeoNet() = default;
    /// Kaiming-uniform weights (bound sqrt(6 / fan_in) for convolutions, 1 / sqrt(fan_in) for the
    /// classifier), zero biases, unit gamma, zero beta.
    GeoNet(std::vector<LayerSpec> layers, std::uint64_t seed);

    const std::vector<LayerSpec>& layers() const { return specs_; }
    std::size_t num_classes() const { return classes_; }

    /// Forward pass over x[N,1,H,W]; caches activations for backward.
    Tensor<T> forward(const Tensor<T>& x, Mode mode);
    /// Runs layers [first, end) on a given input without caching. Used by gradient checks.
    /// When pattern is set, the ReLU masks and max-pool argmaxes are appended to it.
    Tensor<T> forward_from(std::size_t first, const Tensor<T>& input, Mode mode,
                           std::vector<std::uint32_t>* pattern = nullptr);
    /// Eval-mode logits without touching any state; safe to call concurrently.
    Tensor<T> infer(const Tensor<T>& x) const;

    /// Backpropagates d(loss)/d(logits) through the cached forward pass.
    /// Parameter gradients are overwritten; returns d(loss)/d(x).
    Tensor<T> backward(const Tensor<T>& grad_logits);

    /// Input seen by layer i during the last cached forward.
    const Tensor<T>& layer_input(std::size_t i) const { return states_.at(i).input; }
    /// Index of the layer owning the named parameter.
    std::size_t layer_of(const std::string& param_name) const;

    std::vector<Param<T>> parameters();
    /// Learnable parameters followed by running batch-norm statistics, in layer order.
    std::vector<NamedTensor<T>> state() const;
    /// Builds a model from layers + state; names and shapes must match exactly.
    static GeoNet from_state(std::vector<LayerSpec> layers, const std::vector<NamedTensor<T>>& tensors);

    void sgd_step(double lr);

    template <class U>
    GeoNet<U> cast() const {
        std::vector<NamedTensor<U>> st;
        for (const auto& nt : state()) st.push_back({nt.name, nt.tensor.template cast<U>()});
        return GeoNet<U>::from_state(specs_, st);
    }

private:
    struct LayerState {
        std::string name;
        Tensor<T> weight, bias, grad_weight, grad_bias;
        BatchNormState<T> bn;
        BatchNormCache<T> bn_cache;
        std::vector<std::uint32_t> argmax;
        Tensor<T> input;
    };

    Tensor<T> run_layer(std::size_t i, const Tensor<T>& in, Mode mode, bool cache);

    std::vector<LayerSpec> specs_;
    std::vector<LayerState> states_;
    std::size_t classes_ = 0;
};

extern template class GeoNet<float>;
extern template class GeoNet<double>;

/// Layer table as a [layers, 7] tensor: kind, in, out, kernel, stride, pad, bias.
Tensor<float> encode_architecture(std::span<const LayerSpec> layers);
std::vector<LayerSpec> decode_architecture(const Tensor<float>& t);

inline constexpr std::uint32_t kCheckpointVersion = 1;

/**
 * Checkpoint layout, all integers unsigned 32-bit little-endian:
 *   "GEON" | version | tensor count |
 *   per tensor: name length | UTF-8 name | rank | dims... | float32 LE data
 */
void write_tensors(const std::filesystem::path& path, const std::vector<NamedTensor<float>>& tensors);
std::vector<NamedTensor<float>> read_tensors(const std::filesystem::path& path);
std::vector<char> encode_tensors(const std::vector<NamedTensor<float>>& tensors);
std::vector<NamedTensor<float>> decode_tensors(std::span<const char> bytes, const std::string& origin = "checkpoint");

}  // namespace geonet::nn
