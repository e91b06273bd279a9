#include "geonet/model.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <map>

#include "geonet/io.hpp"
#include "geonet/random.hpp"

namespace geonet::nn {

const char* to_string(LayerKind k) {
    switch (k) {
        case LayerKind::Conv: return "conv";
        case LayerKind::BatchNorm: return "bn";
        case LayerKind::ReLU: return "relu";
        case LayerKind::MaxPool: return "maxpool";
        case LayerKind::GlobalAvgPool: return "gap";
        case LayerKind::Linear: return "fc";
    }
    return "?";
}

std::vector<LayerSpec> geonet_architecture(std::size_t num_classes, bool extra_conv) {
    const auto conv = [](std::size_t in, std::size_t out, std::size_t k, bool bias) {
        return LayerSpec{LayerKind::Conv, in, out, k, 1, k / 2, bias};
    };
    const auto bn = [](std::size_t c) { return LayerSpec{LayerKind::BatchNorm, c, c}; };
    const LayerSpec relu{LayerKind::ReLU};
    const LayerSpec pool{LayerKind::MaxPool};

    std::vector<LayerSpec> l{conv(1, 32, 3, false), bn(32), relu, pool,
                             conv(32, 64, 3, false), bn(64), relu, pool,
                             conv(64, 128, 3, true), relu};
    if (extra_conv) l.insert(l.end(), {conv(128, 128, 3, true), relu});
    l.insert(l.end(), {conv(128, 128, 1, true), relu, pool, LayerSpec{LayerKind::GlobalAvgPool},
                       LayerSpec{LayerKind::Linear, 128, num_classes, 0, 1, 0, true}});
    return l;
}

std::size_t validate_architecture(std::span<const LayerSpec> layers, std::size_t in_channels) {
    if (layers.empty()) throw ConfigError("architecture has no layers");
    std::size_t channels = in_channels;
    bool flat = false;
    for (std::size_t i = 0; i < layers.size(); ++i) {
        const LayerSpec& s = layers[i];
        const std::string where = "layer " + std::to_string(i) + " (" + to_string(s.kind) + ")";
        switch (s.kind) {
            case LayerKind::Conv:
                if (flat) throw ConfigError(where + ": convolution after flattening");
                if (s.in_channels != channels)
                    throw ConfigError(where + ": expects " + std::to_string(s.in_channels) + " channels, receives " +
                                      std::to_string(channels));
                if (s.out_channels < 1 || s.kernel < 1 || s.stride < 1) throw ConfigError(where + ": bad geometry");
                channels = s.out_channels;
                break;
            case LayerKind::BatchNorm:
                if (flat || s.in_channels != channels) throw ConfigError(where + ": channel mismatch");
                break;
            case LayerKind::ReLU: break;
            case LayerKind::MaxPool:
                if (flat) throw ConfigError(where + ": pooling after flattening");
                break;
            case LayerKind::GlobalAvgPool:
                if (flat) throw ConfigError(where + ": already flat");
                flat = true;
                break;
            case LayerKind::Linear:
                if (!flat) throw ConfigError(where + ": fully-connected layer needs global pooling first");
                if (s.in_channels != channels)
                    throw ConfigError(where + ": expects " + std::to_string(s.in_channels) + " features, receives " +
                                      std::to_string(channels));
                channels = s.out_channels;
                break;
            default: throw ConfigError(where + ": unknown layer kind");
        }
    }
    if (layers.back().kind != LayerKind::Linear) throw ConfigError("architecture must end with a fully-connected layer");
    return channels;
}

namespace {

std::vector<std::string> layer_names(std::span<const LayerSpec> layers) {
    std::map<LayerKind, int> counts;
    std::vector<std::string> names;
    for (const auto& s : layers) names.push_back(std::string(to_string(s.kind)) + std::to_string(++counts[s.kind]));
    return names;
}

}  // namespace

template <class T>
GeoNet<T>::GeoNet(std::vector<LayerSpec> layers, std::uint64_t seed) : specs_(std::move(layers)) {
    classes_ = validate_architecture(specs_);
    const auto names = layer_names(specs_);
    Rng rng(seed);
    // Fan-in scaled uniform init: sqrt(6 / fan_in) ahead of a ReLU, 1 / sqrt(fan_in) for the classifier.
    const auto kaiming = [&rng](Tensor<T>& w, std::size_t fan_in, double gain_sq) {
        const double bound = std::sqrt(gain_sq * 3.0 / static_cast<double>(fan_in));
        for (auto& v : w.values()) v = static_cast<T>(uniform(rng, -bound, bound));
    };
    for (std::size_t i = 0; i < specs_.size(); ++i) {
        const LayerSpec& s = specs_[i];
        LayerState st;
        st.name = names[i];
        if (s.kind == LayerKind::Conv) {
            st.weight = Tensor<T>({s.out_channels, s.in_channels, s.kernel, s.kernel});
            kaiming(st.weight, s.in_channels * s.kernel * s.kernel, 2.0);
            if (s.bias) st.bias = Tensor<T>({s.out_channels});
        } else if (s.kind == LayerKind::Linear) {
            st.weight = Tensor<T>({s.out_channels, s.in_channels});
            kaiming(st.weight, s.in_channels, 1.0 / 3.0);
            st.bias = Tensor<T>({s.out_channels});
        } else if (s.kind == LayerKind::BatchNorm) {
            st.bn = BatchNormState<T>(s.in_channels);
        }
        st.grad_weight = Tensor<T>(st.weight.shape());
        st.grad_bias = Tensor<T>(st.bias.shape());
        states_.push_back(std::move(st));
    }
}

template <class T>
Tensor<T> GeoNet<T>::run_layer(std::size_t i, const Tensor<T>& in, Mode mode, bool cache) {
    const LayerSpec& s = specs_[i];
    LayerState& st = states_[i];
    if (cache) st.input = in;
    switch (s.kind) {
        case LayerKind::Conv: return conv2d_forward(in, st.weight, st.bias, {s.stride, s.pad});
        case LayerKind::BatchNorm: return batchnorm_forward<T>(in, st.bn, mode, cache ? &st.bn_cache : nullptr);
        case LayerKind::ReLU: return relu_forward(in);
        case LayerKind::MaxPool: {
            auto r = maxpool2x2_forward(in);
            if (cache) st.argmax = std::move(r.argmax);
            return std::move(r.out);
        }
        case LayerKind::GlobalAvgPool: return global_avg_pool_forward(in);
        case LayerKind::Linear: return linear_forward(in, st.weight, st.bias);
    }
    throw ConfigError("unknown layer kind");
}

template <class T>
Tensor<T> GeoNet<T>::forward(const Tensor<T>& x, Mode mode) {
    if (x.rank() != 4 || x.dim(1) != specs_.front().in_channels)
        throw ConfigError("model input must be [N," + std::to_string(specs_.front().in_channels) + ",H,W], got " +
                          shape_string(x.shape()));
    Tensor<T> a = x;
    for (std::size_t i = 0; i < specs_.size(); ++i) a = run_layer(i, a, mode, true);
    return a;
}

template <class T>
Tensor<T> GeoNet<T>::forward_from(std::size_t first, const Tensor<T>& input, Mode mode,
                                   std::vector<std::uint32_t>* pattern) {
    Tensor<T> a = input;
    for (std::size_t i = first; i < specs_.size(); ++i) {
        if (pattern && specs_[i].kind == LayerKind::ReLU) {
            for (const T v : a.values()) pattern->push_back(v > T(0));
        } else if (pattern && specs_[i].kind == LayerKind::MaxPool) {
            auto r = maxpool2x2_forward(a);
            pattern->insert(pattern->end(), r.argmax.begin(), r.argmax.end());
            a = std::move(r.out);
            continue;
        }
        a = run_layer(i, a, mode, false);
    }
    return a;
}

template <class T>
Tensor<T> GeoNet<T>::infer(const Tensor<T>& x) const {
    if (x.rank() != 4 || x.dim(1) != specs_.front().in_channels)
        throw ConfigError("model input must be [N," + std::to_string(specs_.front().in_channels) + ",H,W], got " +
                          shape_string(x.shape()));
    Tensor<T> a = x;
    for (std::size_t i = 0; i < specs_.size(); ++i) {
        const LayerSpec& s = specs_[i];
        const LayerState& st = states_[i];
        switch (s.kind) {
            case LayerKind::Conv: a = conv2d_forward(a, st.weight, st.bias, {s.stride, s.pad}); break;
            case LayerKind::BatchNorm: {
                BatchNormState<T> frozen = st.bn;
                a = batchnorm_forward<T>(a, frozen, Mode::Eval, nullptr);
                break;
            }
            case LayerKind::ReLU: a = relu_forward(a); break;
            case LayerKind::MaxPool: a = maxpool2x2_forward(a).out; break;
            case LayerKind::GlobalAvgPool: a = global_avg_pool_forward(a); break;
            case LayerKind::Linear: a = linear_forward(a, st.weight, st.bias); break;
        }
    }
    return a;
}

template <class T>
Tensor<T> GeoNet<T>::backward(const Tensor<T>& grad_logits) {
    Tensor<T> g = grad_logits;
    for (std::size_t idx = specs_.size(); idx-- > 0;) {
        const LayerSpec& s = specs_[idx];
        LayerState& st = states_[idx];
        if (st.input.empty()) throw ConfigError("backward called without a cached forward pass");
        switch (s.kind) {
            case LayerKind::Conv: {
                auto r = conv2d_backward(g, st.input, st.weight, {s.stride, s.pad}, s.bias);
                st.grad_weight = std::move(r.grad_weight);
                if (s.bias) st.grad_bias = std::move(r.grad_bias);
                g = std::move(r.grad_x);
                break;
            }
            case LayerKind::BatchNorm: {
                auto r = batchnorm_backward(g, st.bn_cache, st.bn);
                st.grad_weight = std::move(r.grad_gamma);
                st.grad_bias = std::move(r.grad_beta);
                g = std::move(r.grad_x);
                break;
            }
            case LayerKind::ReLU: g = relu_backward(g, st.input); break;
            case LayerKind::MaxPool: g = maxpool2x2_backward(g, st.argmax, st.input.shape()); break;
            case LayerKind::GlobalAvgPool: g = global_avg_pool_backward(g, st.input.shape()); break;
            case LayerKind::Linear: {
                auto r = linear_backward(g, st.input, st.weight);
                st.grad_weight = std::move(r.grad_weight);
                st.grad_bias = std::move(r.grad_bias);
                g = std::move(r.grad_x);
                break;
            }
        }
    }
    return g;
}

template <class T>
std::vector<Param<T>> GeoNet<T>::parameters() {
    std::vector<Param<T>> out;
    for (std::size_t i = 0; i < specs_.size(); ++i) {
        LayerState& st = states_[i];
        switch (specs_[i].kind) {
            case LayerKind::Conv:
            case LayerKind::Linear:
                out.push_back({st.name + ".weight", &st.weight, &st.grad_weight});
                if (specs_[i].bias) out.push_back({st.name + ".bias", &st.bias, &st.grad_bias});
                break;
            case LayerKind::BatchNorm:
                if (st.grad_weight.shape() != st.bn.gamma.shape()) {
                    st.grad_weight = Tensor<T>(st.bn.gamma.shape());
                    st.grad_bias = Tensor<T>(st.bn.beta.shape());
                }
                out.push_back({st.name + ".gamma", &st.bn.gamma, &st.grad_weight});
                out.push_back({st.name + ".beta", &st.bn.beta, &st.grad_bias});
                break;
            default: break;
        }
    }
    return out;
}

template <class T>
std::size_t GeoNet<T>::layer_of(const std::string& param_name) const {
    const std::string prefix = param_name.substr(0, param_name.find('.'));
    for (std::size_t i = 0; i < states_.size(); ++i)
        if (states_[i].name == prefix) return i;
    throw ConfigError("no layer owns parameter " + param_name);
}

template <class T>
std::vector<NamedTensor<T>> GeoNet<T>::state() const {
    std::vector<NamedTensor<T>> out;
    for (std::size_t i = 0; i < specs_.size(); ++i) {
        const LayerState& st = states_[i];
        switch (specs_[i].kind) {
            case LayerKind::Conv:
            case LayerKind::Linear:
                out.push_back({st.name + ".weight", st.weight});
                if (specs_[i].bias) out.push_back({st.name + ".bias", st.bias});
                break;
            case LayerKind::BatchNorm:
                out.push_back({st.name + ".gamma", st.bn.gamma});
                out.push_back({st.name + ".beta", st.bn.beta});
                out.push_back({st.name + ".running_mean", st.bn.running_mean});
                out.push_back({st.name + ".running_var", st.bn.running_var});
                break;
            default: break;
        }
    }
    return out;
}

template <class T>
GeoNet<T> GeoNet<T>::from_state(std::vector<LayerSpec> layers, const std::vector<NamedTensor<T>>& tensors) {
    GeoNet<T> net(std::move(layers), 0);
    std::map<std::string, const Tensor<T>*> by_name;
    for (const auto& nt : tensors) by_name[nt.name] = &nt.tensor;
    const auto take = [&](const std::string& name, Tensor<T>& dst) {
        const auto it = by_name.find(name);
        if (it == by_name.end()) throw ConfigError("model state is missing tensor " + name);
        if (it->second->shape() != dst.shape())
            throw ConfigError("tensor " + name + " has shape " + shape_string(it->second->shape()) + ", expected " +
                              shape_string(dst.shape()));
        dst = *it->second;
        by_name.erase(it);
    };
    for (std::size_t i = 0; i < net.specs_.size(); ++i) {
        LayerState& st = net.states_[i];
        switch (net.specs_[i].kind) {
            case LayerKind::Conv:
            case LayerKind::Linear:
                take(st.name + ".weight", st.weight);
                if (net.specs_[i].bias) take(st.name + ".bias", st.bias);
                break;
            case LayerKind::BatchNorm:
                take(st.name + ".gamma", st.bn.gamma);
                take(st.name + ".beta", st.bn.beta);
                take(st.name + ".running_mean", st.bn.running_mean);
                take(st.name + ".running_var", st.bn.running_var);
                for (auto v : st.bn.running_var.values())
                    if (!(v >= 0)) throw ConfigError(st.name + ".running_var has a negative entry");
                break;
            default: break;
        }
    }
    if (!by_name.empty()) throw ConfigError("model state has unexpected tensor " + by_name.begin()->first);
    return net;
}

template <class T>
void GeoNet<T>::sgd_step(double lr) {
    for (auto& p : parameters()) nn::sgd_step(*p.value, *p.grad, lr);
}

template class GeoNet<float>;
template class GeoNet<double>;

Tensor<float> encode_architecture(std::span<const LayerSpec> layers) {
    Tensor<float> t({layers.size(), 7});
    for (std::size_t i = 0; i < layers.size(); ++i) {
        const LayerSpec& s = layers[i];
        const float row[7] = {static_cast<float>(static_cast<int>(s.kind)), static_cast<float>(s.in_channels),
                              static_cast<float>(s.out_channels),            static_cast<float>(s.kernel),
                              static_cast<float>(s.stride),                  static_cast<float>(s.pad),
                              s.bias ? 1.0f : 0.0f};
        std::copy(std::begin(row), std::end(row), t.data() + i * 7);
    }
    return t;
}

std::vector<LayerSpec> decode_architecture(const Tensor<float>& t) {
    if (t.rank() != 2 || t.dim(1) != 7) throw ConfigError("architecture tensor must be [layers,7]");
    std::vector<LayerSpec> out;
    for (std::size_t i = 0; i < t.dim(0); ++i) {
        const float* r = t.data() + i * 7;
        for (int j = 0; j < 7; ++j)
            if (!(r[j] >= 0.0f) || r[j] != std::floor(r[j])) throw ConfigError("architecture tensor has a non-integer entry");
        if (r[0] > static_cast<float>(LayerKind::Linear)) throw ConfigError("architecture tensor has an unknown layer kind");
        out.push_back({static_cast<LayerKind>(static_cast<int>(r[0])), static_cast<std::size_t>(r[1]),
                       static_cast<std::size_t>(r[2]), static_cast<std::size_t>(r[3]), static_cast<std::size_t>(r[4]),
                       static_cast<std::size_t>(r[5]), r[6] != 0.0f});
    }
    validate_architecture(out);
    return out;
}

namespace {

void put_u32(std::vector<char>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
}

void put_f32(std::vector<char>& out, float f) { put_u32(out, std::bit_cast<std::uint32_t>(f)); }

class Reader {
public:
    Reader(std::span<const char> b, std::string origin) : bytes_(b), origin_(std::move(origin)) {}

    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
        pos_ += 4;
        return v;
    }
    std::string str(std::size_t n) {
        need(n);
        std::string s(bytes_.data() + pos_, n);
        pos_ += n;
        return s;
    }
    void need(std::size_t n) const {
        if (bytes_.size() - pos_ < n) throw DataError(origin_ + ": truncated checkpoint");
    }
    bool done() const { return pos_ == bytes_.size(); }
    const std::string& origin() const { return origin_; }

private:
    std::span<const char> bytes_;
    std::size_t pos_ = 0;
    std::string origin_;
};

}  // namespace

std::vector<char> encode_tensors(const std::vector<NamedTensor<float>>& tensors) {
    std::vector<char> out{'G', 'E', 'O', 'N'};
    put_u32(out, kCheckpointVersion);
    put_u32(out, static_cast<std::uint32_t>(tensors.size()));
    for (const auto& nt : tensors) {
        put_u32(out, static_cast<std::uint32_t>(nt.name.size()));
        out.insert(out.end(), nt.name.begin(), nt.name.end());
        put_u32(out, static_cast<std::uint32_t>(nt.tensor.rank()));
        for (auto d : nt.tensor.shape()) put_u32(out, static_cast<std::uint32_t>(d));
        for (float v : nt.tensor.values()) put_f32(out, v);
    }
    return out;
}

std::vector<NamedTensor<float>> decode_tensors(std::span<const char> bytes, const std::string& origin) {
    Reader r(bytes, origin);
    if (r.str(4) != "GEON") throw DataError(origin + ": bad checkpoint magic");
    const std::uint32_t version = r.u32();
    if (version != kCheckpointVersion)
        throw DataError(origin + ": unsupported checkpoint version " + std::to_string(version));
    const std::uint32_t count = r.u32();
    std::vector<NamedTensor<float>> out;
    for (std::uint32_t t = 0; t < count; ++t) {
        NamedTensor<float> nt;
        nt.name = r.str(r.u32());
        const std::uint32_t rank = r.u32();
        Shape shape;
        for (std::uint32_t i = 0; i < rank; ++i) shape.push_back(r.u32());
        const std::size_t n = shape_size(shape);
        r.need(n * 4);
        std::vector<float> data(n);
        for (auto& v : data) v = std::bit_cast<float>(r.u32());
        nt.tensor = Tensor<float>(std::move(shape), std::move(data));
        out.push_back(std::move(nt));
    }
    if (!r.done()) throw DataError(origin + ": trailing bytes after checkpoint tensors");
    return out;
}

void write_tensors(const std::filesystem::path& path, const std::vector<NamedTensor<float>>& tensors) {
    const auto bytes = encode_tensors(tensors);
    write_file_atomic(path, std::span<const char>(bytes));
}

std::vector<NamedTensor<float>> read_tensors(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError(path.string() + ": cannot open checkpoint");
    const std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return decode_tensors(bytes, path.string());
}

}  // namespace geonet::nn
