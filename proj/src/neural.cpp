#include "geonet/neural.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace geonet::nn {

namespace {

template <class T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <class T>
using MatMap = Eigen::Map<RowMat<T>>;
template <class T>
using ConstMatMap = Eigen::Map<const RowMat<T>>;

struct ConvDims {
    std::size_t n, c, h, w, k, kh, kw, ho, wo;
    std::size_t patch() const { return c * kh * kw; }
    std::size_t plane_out() const { return ho * wo; }
};

template <class T>
ConvDims conv_dims(const Tensor<T>& x, const Tensor<T>& weight, ConvGeometry g) {
    if (x.rank() != 4) throw ConfigError("conv2d input must be rank 4 [N,C,H,W], got " + shape_string(x.shape()));
    if (weight.rank() != 4)
        throw ConfigError("conv2d weight must be rank 4 [K,C,kh,kw], got " + shape_string(weight.shape()));
    if (g.stride < 1) throw ConfigError("conv2d stride must be >= 1");
    ConvDims d{x.dim(0), x.dim(1), x.dim(2), x.dim(3), weight.dim(0), weight.dim(2), weight.dim(3), 0, 0};
    if (weight.dim(1) != d.c)
        throw ConfigError("conv2d channel mismatch: input C=" + std::to_string(d.c) +
                          ", weight C=" + std::to_string(weight.dim(1)));
    const std::size_t ph = d.h + 2 * g.pad;
    const std::size_t pw = d.w + 2 * g.pad;
    if (ph < d.kh || pw < d.kw)
        throw ConfigError("conv2d kernel " + std::to_string(d.kh) + "x" + std::to_string(d.kw) +
                          " larger than padded input " + std::to_string(ph) + "x" + std::to_string(pw));
    if ((ph - d.kh) % g.stride != 0 || (pw - d.kw) % g.stride != 0)
        throw ConfigError("conv2d output size is not integral for H=" + std::to_string(d.h) +
                          ", W=" + std::to_string(d.w) + ", stride " + std::to_string(g.stride));
    d.ho = (ph - d.kh) / g.stride + 1;
    d.wo = (pw - d.kw) / g.stride + 1;
    return d;
}

bool is_pointwise(const ConvDims& d, ConvGeometry g) { return d.kh == 1 && d.kw == 1 && g.stride == 1 && g.pad == 0; }

template <class T>
void im2col(const T* x, const ConvDims& d, ConvGeometry g, T* cols) {
    const auto pad = static_cast<long>(g.pad);
    const auto h = static_cast<long>(d.h);
    const auto w = static_cast<long>(d.w);
    for (std::size_t c = 0; c < d.c; ++c) {
        const T* plane = x + c * d.h * d.w;
        for (std::size_t ki = 0; ki < d.kh; ++ki) {
            for (std::size_t kj = 0; kj < d.kw; ++kj) {
                T* row = cols + ((c * d.kh + ki) * d.kw + kj) * d.plane_out();
                for (std::size_t oh = 0; oh < d.ho; ++oh) {
                    const long ih = static_cast<long>(oh * g.stride + ki) - pad;
                    T* dst = row + oh * d.wo;
                    if (ih < 0 || ih >= h) {
                        std::fill(dst, dst + d.wo, T(0));
                        continue;
                    }
                    const T* src = plane + ih * w;
                    for (std::size_t ow = 0; ow < d.wo; ++ow) {
                        const long iw = static_cast<long>(ow * g.stride + kj) - pad;
                        dst[ow] = (iw < 0 || iw >= w) ? T(0) : src[iw];
                    }
                }
            }
        }
    }
}

template <class T>
void col2im(const T* cols, const ConvDims& d, ConvGeometry g, T* x) {
    const auto pad = static_cast<long>(g.pad);
    const auto h = static_cast<long>(d.h);
    const auto w = static_cast<long>(d.w);
    std::fill(x, x + d.c * d.h * d.w, T(0));
    for (std::size_t c = 0; c < d.c; ++c) {
        T* plane = x + c * d.h * d.w;
        for (std::size_t ki = 0; ki < d.kh; ++ki) {
            for (std::size_t kj = 0; kj < d.kw; ++kj) {
                const T* row = cols + ((c * d.kh + ki) * d.kw + kj) * d.plane_out();
                for (std::size_t oh = 0; oh < d.ho; ++oh) {
                    const long ih = static_cast<long>(oh * g.stride + ki) - pad;
                    if (ih < 0 || ih >= h) continue;
                    T* dst = plane + ih * w;
                    const T* src = row + oh * d.wo;
                    for (std::size_t ow = 0; ow < d.wo; ++ow) {
                        const long iw = static_cast<long>(ow * g.stride + kj) - pad;
                        if (iw >= 0 && iw < w) dst[iw] += src[ow];
                    }
                }
            }
        }
    }
}

void require_same_shape(const Shape& a, const Shape& b, const char* what) {
    if (a != b) throw ConfigError(std::string(what) + ": shape " + shape_string(a) + " vs " + shape_string(b));
}

}  // namespace

template <class T>
Tensor<T> conv2d_forward(const Tensor<T>& x, const Tensor<T>& weight, const Tensor<T>& bias, ConvGeometry g) {
    const ConvDims d = conv_dims(x, weight, g);
    if (!bias.empty() && (bias.rank() != 1 || bias.dim(0) != d.k))
        throw ConfigError("conv2d bias shape " + shape_string(bias.shape()) + " does not match K=" + std::to_string(d.k));
    Tensor<T> out({d.n, d.k, d.ho, d.wo});
    const ConstMatMap<T> wm(weight.data(), static_cast<Eigen::Index>(d.k), static_cast<Eigen::Index>(d.patch()));
    const bool pointwise = is_pointwise(d, g);
    const auto n = static_cast<long>(d.n);

#pragma omp parallel num_threads(geonet::num_workers())
    {
        std::vector<T> cols(pointwise ? 0 : d.patch() * d.plane_out());
#pragma omp for schedule(static)
        for (long i = 0; i < n; ++i) {
            const T* xs = x.data() + static_cast<std::size_t>(i) * d.c * d.h * d.w;
            if (!pointwise) im2col(xs, d, g, cols.data());
            const ConstMatMap<T> cm(pointwise ? xs : cols.data(), static_cast<Eigen::Index>(d.patch()),
                                    static_cast<Eigen::Index>(d.plane_out()));
            MatMap<T> om(out.data() + static_cast<std::size_t>(i) * d.k * d.plane_out(),
                         static_cast<Eigen::Index>(d.k), static_cast<Eigen::Index>(d.plane_out()));
            om.noalias() = wm * cm;
            if (!bias.empty())
                for (std::size_t k = 0; k < d.k; ++k) om.row(static_cast<Eigen::Index>(k)).array() += bias[k];
        }
    }
    return out;
}

template <class T>
ConvGrads<T> conv2d_backward(const Tensor<T>& grad_out, const Tensor<T>& x, const Tensor<T>& weight, ConvGeometry g,
                             bool has_bias) {
    const ConvDims d = conv_dims(x, weight, g);
    require_same_shape(grad_out.shape(), {d.n, d.k, d.ho, d.wo}, "conv2d_backward grad_out");
    ConvGrads<T> r{Tensor<T>(x.shape()), Tensor<T>(weight.shape()), has_bias ? Tensor<T>({d.k}) : Tensor<T>()};
    const ConstMatMap<T> wm(weight.data(), static_cast<Eigen::Index>(d.k), static_cast<Eigen::Index>(d.patch()));
    const bool pointwise = is_pointwise(d, g);
    const std::size_t wsize = weight.size();
    std::vector<T> per_sample(d.n * wsize);
    const auto n = static_cast<long>(d.n);

#pragma omp parallel num_threads(geonet::num_workers())
    {
        std::vector<T> cols(pointwise ? 0 : d.patch() * d.plane_out());
        std::vector<T> gcols(pointwise ? 0 : d.patch() * d.plane_out());
#pragma omp for schedule(static)
        for (long i = 0; i < n; ++i) {
            const auto s = static_cast<std::size_t>(i);
            const T* xs = x.data() + s * d.c * d.h * d.w;
            if (!pointwise) im2col(xs, d, g, cols.data());
            const ConstMatMap<T> cm(pointwise ? xs : cols.data(), static_cast<Eigen::Index>(d.patch()),
                                    static_cast<Eigen::Index>(d.plane_out()));
            const ConstMatMap<T> gm(grad_out.data() + s * d.k * d.plane_out(), static_cast<Eigen::Index>(d.k),
                                    static_cast<Eigen::Index>(d.plane_out()));
            MatMap<T> gw(per_sample.data() + s * wsize, static_cast<Eigen::Index>(d.k),
                         static_cast<Eigen::Index>(d.patch()));
            gw.noalias() = gm * cm.transpose();
            T* gx = r.grad_x.data() + s * d.c * d.h * d.w;
            if (pointwise) {
                MatMap<T> gxm(gx, static_cast<Eigen::Index>(d.patch()), static_cast<Eigen::Index>(d.plane_out()));
                gxm.noalias() = wm.transpose() * gm;
            } else {
                MatMap<T> gcm(gcols.data(), static_cast<Eigen::Index>(d.patch()),
                              static_cast<Eigen::Index>(d.plane_out()));
                gcm.noalias() = wm.transpose() * gm;
                col2im(gcols.data(), d, g, gx);
            }
        }
    }

    T* gw = r.grad_weight.data();
    for (std::size_t s = 0; s < d.n; ++s) {
        const T* src = per_sample.data() + s * wsize;
        for (std::size_t j = 0; j < wsize; ++j) gw[j] += src[j];
    }
    if (has_bias) {
        for (std::size_t s = 0; s < d.n; ++s)
            for (std::size_t k = 0; k < d.k; ++k) {
                const T* p = grad_out.data() + (s * d.k + k) * d.plane_out();
                T acc = 0;
                for (std::size_t j = 0; j < d.plane_out(); ++j) acc += p[j];
                r.grad_bias[k] += acc;
            }
    }
    return r;
}

template <class T>
Tensor<T> batchnorm_forward(const Tensor<T>& x, BatchNormState<T>& state, Mode mode, BatchNormCache<T>* cache) {
    if (x.rank() != 4) throw ConfigError("batchnorm input must be rank 4, got " + shape_string(x.shape()));
    const std::size_t n = x.dim(0), c = x.dim(1), plane = x.dim(2) * x.dim(3);
    if (state.gamma.size() != c)
        throw ConfigError("batchnorm has " + std::to_string(state.gamma.size()) + " channels, input has " +
                          std::to_string(c));
    if (!(state.epsilon > 0.0)) throw ConfigError("batchnorm epsilon must be positive");
    const std::size_t m = n * plane;
    if (mode == Mode::Train && m < 2)
        throw ConfigError("batchnorm training needs at least 2 values per channel, got " + std::to_string(m));

    Tensor<T> out(x.shape());
    Tensor<T> x_hat(x.shape());
    std::vector<T> inv_std(c);
    const auto channels = static_cast<long>(c);

#pragma omp parallel for num_threads(geonet::num_workers()) schedule(static)
    for (long ci = 0; ci < channels; ++ci) {
        const auto ch = static_cast<std::size_t>(ci);
        double mean = 0.0;
        double var = 0.0;
        if (mode == Mode::Train) {
            for (std::size_t s = 0; s < n; ++s) {
                const T* p = x.data() + (s * c + ch) * plane;
                for (std::size_t j = 0; j < plane; ++j) mean += p[j];
            }
            mean /= static_cast<double>(m);
            for (std::size_t s = 0; s < n; ++s) {
                const T* p = x.data() + (s * c + ch) * plane;
                for (std::size_t j = 0; j < plane; ++j) {
                    const double dlt = p[j] - mean;
                    var += dlt * dlt;
                }
            }
            var /= static_cast<double>(m);
            const double mom = state.momentum;
            state.running_mean[ch] = static_cast<T>((1.0 - mom) * state.running_mean[ch] + mom * mean);
            state.running_var[ch] = static_cast<T>((1.0 - mom) * state.running_var[ch] +
                                                   mom * var * static_cast<double>(m) / static_cast<double>(m - 1));
        } else {
            mean = state.running_mean[ch];
            var = state.running_var[ch];
        }
        const T is = static_cast<T>(1.0 / std::sqrt(var + state.epsilon));
        const T mu = static_cast<T>(mean);
        inv_std[ch] = is;
        const T gm = state.gamma[ch];
        const T bt = state.beta[ch];
        for (std::size_t s = 0; s < n; ++s) {
            const std::size_t off = (s * c + ch) * plane;
            for (std::size_t j = 0; j < plane; ++j) {
                const T xh = (x[off + j] - mu) * is;
                x_hat[off + j] = xh;
                out[off + j] = gm * xh + bt;
            }
        }
    }
    if (cache) {
        cache->x_hat = std::move(x_hat);
        cache->inv_std = std::move(inv_std);
        cache->mode = mode;
    }
    return out;
}

template <class T>
BatchNormGrads<T> batchnorm_backward(const Tensor<T>& grad_out, const BatchNormCache<T>& cache,
                                     const BatchNormState<T>& state) {
    require_same_shape(grad_out.shape(), cache.x_hat.shape(), "batchnorm_backward grad_out");
    const std::size_t n = grad_out.dim(0), c = grad_out.dim(1), plane = grad_out.dim(2) * grad_out.dim(3);
    const auto m = static_cast<double>(n * plane);
    BatchNormGrads<T> r{Tensor<T>(grad_out.shape()), Tensor<T>({c}), Tensor<T>({c})};
    const auto channels = static_cast<long>(c);

#pragma omp parallel for num_threads(geonet::num_workers()) schedule(static)
    for (long ci = 0; ci < channels; ++ci) {
        const auto ch = static_cast<std::size_t>(ci);
        double sum_dy = 0.0;
        double sum_dy_xh = 0.0;
        for (std::size_t s = 0; s < n; ++s) {
            const std::size_t off = (s * c + ch) * plane;
            for (std::size_t j = 0; j < plane; ++j) {
                sum_dy += grad_out[off + j];
                sum_dy_xh += static_cast<double>(grad_out[off + j]) * cache.x_hat[off + j];
            }
        }
        r.grad_gamma[ch] = static_cast<T>(sum_dy_xh);
        r.grad_beta[ch] = static_cast<T>(sum_dy);
        const double scale = static_cast<double>(state.gamma[ch]) * cache.inv_std[ch];
        for (std::size_t s = 0; s < n; ++s) {
            const std::size_t off = (s * c + ch) * plane;
            for (std::size_t j = 0; j < plane; ++j) {
                if (cache.mode == Mode::Train) {
                    r.grad_x[off + j] = static_cast<T>(
                        scale / m * (m * grad_out[off + j] - sum_dy - cache.x_hat[off + j] * sum_dy_xh));
                } else {
                    r.grad_x[off + j] = static_cast<T>(scale * grad_out[off + j]);
                }
            }
        }
    }
    return r;
}

template <class T>
Tensor<T> relu_forward(const Tensor<T>& x) {
    Tensor<T> out(x.shape());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] > T(0) ? x[i] : T(0);
    return out;
}

template <class T>
Tensor<T> relu_backward(const Tensor<T>& grad_out, const Tensor<T>& x) {
    require_same_shape(grad_out.shape(), x.shape(), "relu_backward");
    Tensor<T> g(x.shape());
    for (std::size_t i = 0; i < x.size(); ++i) g[i] = x[i] > T(0) ? grad_out[i] : T(0);
    return g;
}

template <class T>
PoolResult<T> maxpool2x2_forward(const Tensor<T>& x) {
    if (x.rank() != 4) throw ConfigError("maxpool input must be rank 4, got " + shape_string(x.shape()));
    const std::size_t h = x.dim(2), w = x.dim(3);
    if (h % 2 != 0 || w % 2 != 0)
        throw ConfigError("maxpool2x2 needs even spatial dims, got " + std::to_string(h) + "x" + std::to_string(w));
    const std::size_t planes = x.dim(0) * x.dim(1);
    const std::size_t ho = h / 2, wo = w / 2;
    PoolResult<T> r{Tensor<T>({x.dim(0), x.dim(1), ho, wo}), std::vector<std::uint32_t>(planes * ho * wo)};
    for (std::size_t p = 0; p < planes; ++p) {
        const T* src = x.data() + p * h * w;
        for (std::size_t i = 0; i < ho; ++i) {
            for (std::size_t j = 0; j < wo; ++j) {
                std::size_t best = (2 * i) * w + 2 * j;
                for (const std::size_t cand : {(2 * i) * w + 2 * j + 1, (2 * i + 1) * w + 2 * j,
                                               (2 * i + 1) * w + 2 * j + 1})
                    if (src[cand] > src[best]) best = cand;
                const std::size_t o = (p * ho + i) * wo + j;
                r.out[o] = src[best];
                r.argmax[o] = static_cast<std::uint32_t>(best);
            }
        }
    }
    return r;
}

template <class T>
Tensor<T> maxpool2x2_backward(const Tensor<T>& grad_out, const std::vector<std::uint32_t>& argmax,
                              const Shape& input_shape) {
    if (grad_out.size() != argmax.size()) throw ConfigError("maxpool_backward: argmax does not match grad_out");
    Tensor<T> g(input_shape);
    const std::size_t plane_in = input_shape.at(2) * input_shape.at(3);
    const std::size_t plane_out = plane_in / 4;
    for (std::size_t o = 0; o < grad_out.size(); ++o) g[(o / plane_out) * plane_in + argmax[o]] += grad_out[o];
    return g;
}

template <class T>
Tensor<T> global_avg_pool_forward(const Tensor<T>& x) {
    if (x.rank() != 4) throw ConfigError("global_avg_pool input must be rank 4, got " + shape_string(x.shape()));
    const std::size_t plane = x.dim(2) * x.dim(3);
    Tensor<T> out({x.dim(0), x.dim(1)});
    for (std::size_t p = 0; p < out.size(); ++p) {
        double s = 0.0;
        for (std::size_t j = 0; j < plane; ++j) s += x[p * plane + j];
        out[p] = static_cast<T>(s / static_cast<double>(plane));
    }
    return out;
}

template <class T>
Tensor<T> global_avg_pool_backward(const Tensor<T>& grad_out, const Shape& input_shape) {
    Tensor<T> g(input_shape);
    const std::size_t plane = input_shape.at(2) * input_shape.at(3);
    if (grad_out.size() * plane != g.size()) throw ConfigError("global_avg_pool_backward: shape mismatch");
    const T inv = T(1) / static_cast<T>(plane);
    for (std::size_t p = 0; p < grad_out.size(); ++p)
        for (std::size_t j = 0; j < plane; ++j) g[p * plane + j] = grad_out[p] * inv;
    return g;
}

template <class T>
Tensor<T> linear_forward(const Tensor<T>& x, const Tensor<T>& weight, const Tensor<T>& bias) {
    if (x.rank() != 2 || weight.rank() != 2 || x.dim(1) != weight.dim(1))
        throw ConfigError("linear shape mismatch: x " + shape_string(x.shape()) + ", weight " +
                          shape_string(weight.shape()));
    if (bias.size() != weight.dim(0)) throw ConfigError("linear bias shape " + shape_string(bias.shape()));
    const auto n = static_cast<Eigen::Index>(x.dim(0));
    const auto in = static_cast<Eigen::Index>(x.dim(1));
    const auto o = static_cast<Eigen::Index>(weight.dim(0));
    Tensor<T> out({x.dim(0), weight.dim(0)});
    MatMap<T> om(out.data(), n, o);
    om.noalias() = ConstMatMap<T>(x.data(), n, in) * ConstMatMap<T>(weight.data(), o, in).transpose();
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < o; ++j) om(i, j) += bias[static_cast<std::size_t>(j)];
    return out;
}

template <class T>
LinearGrads<T> linear_backward(const Tensor<T>& grad_out, const Tensor<T>& x, const Tensor<T>& weight) {
    require_same_shape(grad_out.shape(), {x.dim(0), weight.dim(0)}, "linear_backward grad_out");
    const auto n = static_cast<Eigen::Index>(x.dim(0));
    const auto in = static_cast<Eigen::Index>(x.dim(1));
    const auto o = static_cast<Eigen::Index>(weight.dim(0));
    LinearGrads<T> r{Tensor<T>(x.shape()), Tensor<T>(weight.shape()), Tensor<T>({weight.dim(0)})};
    const ConstMatMap<T> gm(grad_out.data(), n, o);
    MatMap<T>(r.grad_x.data(), n, in).noalias() = gm * ConstMatMap<T>(weight.data(), o, in);
    MatMap<T>(r.grad_weight.data(), o, in).noalias() = gm.transpose() * ConstMatMap<T>(x.data(), n, in);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < o; ++j) r.grad_bias[static_cast<std::size_t>(j)] += gm(i, j);
    return r;
}

template <class T>
Tensor<T> softmax(const Tensor<T>& logits) {
    if (logits.rank() != 2) throw ConfigError("softmax expects [N,K] logits, got " + shape_string(logits.shape()));
    const std::size_t n = logits.dim(0), k = logits.dim(1);
    Tensor<T> p(logits.shape());
    for (std::size_t i = 0; i < n; ++i) {
        const T* row = logits.data() + i * k;
        const double mx = *std::max_element(row, row + k);
        double s = 0.0;
        for (std::size_t j = 0; j < k; ++j) s += std::exp(row[j] - mx);
        for (std::size_t j = 0; j < k; ++j) p[i * k + j] = static_cast<T>(std::exp(row[j] - mx) / s);
    }
    return p;
}

template <class T>
LossResult<T> softmax_xent(const Tensor<T>& logits, std::span<const int> labels) {
    if (logits.rank() != 2) throw ConfigError("softmax_xent expects [N,K] logits, got " + shape_string(logits.shape()));
    const std::size_t n = logits.dim(0), k = logits.dim(1);
    if (labels.size() != n)
        throw ConfigError("softmax_xent: " + std::to_string(labels.size()) + " labels for " + std::to_string(n) +
                          " rows");
    LossResult<T> r{0.0, Tensor<T>(logits.shape())};
    for (std::size_t i = 0; i < n; ++i) {
        const int y = labels[i];
        if (y < 0 || static_cast<std::size_t>(y) >= k)
            throw ConfigError("label " + std::to_string(y) + " outside [0, " + std::to_string(k) + ")");
        const T* row = logits.data() + i * k;
        const double mx = *std::max_element(row, row + k);
        double s = 0.0;
        for (std::size_t j = 0; j < k; ++j) s += std::exp(row[j] - mx);
        const double log_s = std::log(s);
        r.loss -= (row[y] - mx) - log_s;
        for (std::size_t j = 0; j < k; ++j) {
            const double p = std::exp(row[j] - mx - log_s);
            r.grad_logits[i * k + j] = static_cast<T>((p - (static_cast<int>(j) == y ? 1.0 : 0.0)) / static_cast<double>(n));
        }
    }
    r.loss /= static_cast<double>(n);
    return r;
}

template <class T>
void sgd_step(Tensor<T>& param, const Tensor<T>& grad, double lr) {
    require_same_shape(param.shape(), grad.shape(), "sgd_step");
    const T step = static_cast<T>(lr);
    for (std::size_t i = 0; i < param.size(); ++i) param[i] -= step * grad[i];
}

#define GEONET_INSTANTIATE(T)                                                                                        \
    template Tensor<T> conv2d_forward(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, ConvGeometry);          \
    template ConvGrads<T> conv2d_backward(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, ConvGeometry, bool); \
    template Tensor<T> batchnorm_forward(const Tensor<T>&, BatchNormState<T>&, Mode, BatchNormCache<T>*);           \
    template BatchNormGrads<T> batchnorm_backward(const Tensor<T>&, const BatchNormCache<T>&,                        \
                                                  const BatchNormState<T>&);                                         \
    template Tensor<T> relu_forward(const Tensor<T>&);                                                               \
    template Tensor<T> relu_backward(const Tensor<T>&, const Tensor<T>&);                                            \
    template PoolResult<T> maxpool2x2_forward(const Tensor<T>&);                                                     \
    template Tensor<T> maxpool2x2_backward(const Tensor<T>&, const std::vector<std::uint32_t>&, const Shape&);        \
    template Tensor<T> global_avg_pool_forward(const Tensor<T>&);                                                    \
    template Tensor<T> global_avg_pool_backward(const Tensor<T>&, const Shape&);                                     \
    template Tensor<T> linear_forward(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&);                         \
    template LinearGrads<T> linear_backward(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&);                   \
    template Tensor<T> softmax(const Tensor<T>&);                                                                    \
    template LossResult<T> softmax_xent(const Tensor<T>&, std::span<const int>);                                    \
    template void sgd_step(Tensor<T>&, const Tensor<T>&, double);

GEONET_INSTANTIATE(float)
GEONET_INSTANTIATE(double)

#undef GEONET_INSTANTIATE

}  // namespace geonet::nn
