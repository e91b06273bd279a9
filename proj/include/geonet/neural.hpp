#pragma once

// Dense layer kernels with hand-written backward passes. Every kernel is
// instantiated for float (training) and double (gradient checks).

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "geonet/parallel.hpp"
#include "geonet/tensor.hpp"

namespace geonet::nn {

enum class Mode { Train, Eval };

struct ConvGeometry {
    std::size_t stride = 1;
    std::size_t pad = 0;
};

template <class T>
struct ConvGrads {
    Tensor<T> grad_x;
    Tensor<T> grad_weight;
    Tensor<T> grad_bias;  // empty when the layer has no bias
};

/// Cross-correlation of x[N,C,H,W] with weight[K,C,kh,kw]; bias[K] may be empty.
template <class T>
Tensor<T> conv2d_forward(const Tensor<T>& x, const Tensor<T>& weight, const Tensor<T>& bias, ConvGeometry g);

template <class T>
ConvGrads<T> conv2d_backward(const Tensor<T>& grad_out, const Tensor<T>& x, const Tensor<T>& weight, ConvGeometry g,
                             bool has_bias);

template <class T>
struct BatchNormState {
    Tensor<T> gamma;
    Tensor<T> beta;
    Tensor<T> running_mean;
    Tensor<T> running_var;
    double momentum = 0.1;
    double epsilon = 1e-5;

    explicit BatchNormState(std::size_t channels = 0)
        : gamma({channels}, T(1)), beta({channels}, T(0)), running_mean({channels}, T(0)),
          running_var({channels}, T(1)) {}
};

template <class T>
struct BatchNormCache {
    Tensor<T> x_hat;
    std::vector<T> inv_std;
    Mode mode = Mode::Train;
};

template <class T>
struct BatchNormGrads {
    Tensor<T> grad_x;
    Tensor<T> grad_gamma;
    Tensor<T> grad_beta;
};

/// Train mode normalizes with batch statistics and updates the running
/// estimates (unbiased variance); Eval mode reads the running estimates only.
/// Train mode needs N*H*W >= 2.
template <class T>
Tensor<T> batchnorm_forward(const Tensor<T>& x, BatchNormState<T>& state, Mode mode, BatchNormCache<T>* cache);

template <class T>
BatchNormGrads<T> batchnorm_backward(const Tensor<T>& grad_out, const BatchNormCache<T>& cache,
                                     const BatchNormState<T>& state);

template <class T>
Tensor<T> relu_forward(const Tensor<T>& x);
template <class T>
Tensor<T> relu_backward(const Tensor<T>& grad_out, const Tensor<T>& x);

template <class T>
struct PoolResult {
    Tensor<T> out;
    std::vector<std::uint32_t> argmax;  // flat input offset within each [H,W] plane
};

/// 2x2 window, stride 2; H and W must be even. Ties go to the first element in row-major order.
template <class T>
PoolResult<T> maxpool2x2_forward(const Tensor<T>& x);
template <class T>
Tensor<T> maxpool2x2_backward(const Tensor<T>& grad_out, const std::vector<std::uint32_t>& argmax,
                              const Shape& input_shape);

template <class T>
Tensor<T> global_avg_pool_forward(const Tensor<T>& x);
template <class T>
Tensor<T> global_avg_pool_backward(const Tensor<T>& grad_out, const Shape& input_shape);

/// y = x W^T + b for x[N,I], weight[O,I], bias[O].
template <class T>
Tensor<T> linear_forward(const Tensor<T>& x, const Tensor<T>& weight, const Tensor<T>& bias);

template <class T>
struct LinearGrads {
    Tensor<T> grad_x;
    Tensor<T> grad_weight;
    Tensor<T> grad_bias;
};

template <class T>
LinearGrads<T> linear_backward(const Tensor<T>& grad_out, const Tensor<T>& x, const Tensor<T>& weight);

template <class T>
struct LossResult {
    double loss = 0.0;
    Tensor<T> grad_logits;
};

/// Mean softmax cross-entropy over the batch, using max subtraction.
/// Gradient is (softmax - onehot) / N. Labels must be in [0, classes).
template <class T>
LossResult<T> softmax_xent(const Tensor<T>& logits, std::span<const int> labels);

/// Row-wise softmax of logits[N,K].
template <class T>
Tensor<T> softmax(const Tensor<T>& logits);

/// Plain SGD: p <- p - lr * g.
template <class T>
void sgd_step(Tensor<T>& param, const Tensor<T>& grad, double lr);

}  // namespace geonet::nn
