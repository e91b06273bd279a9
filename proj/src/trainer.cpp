#include "geonet/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "geonet/error.hpp"
#include "geonet/parallel.hpp"

namespace geonet {

using nn::GeoNet;
using nn::Tensor;

void TrainConfig::validate() const {
    if (epochs < 1) throw ConfigError("epochs must be >= 1");
    if (batch_size < 2) throw ConfigError("batch_size must be >= 2 (batch norm needs statistics)");
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) throw ConfigError("learning_rate must be > 0");
    if (input_size < 8) throw ConfigError("input_size must be >= 8");
    if (input_size % 8 != 0) throw ConfigError("input_size must be a multiple of 8 (three 2x2 poolings)");
    if (workers < 1) throw ConfigError("workers must be >= 1");
    if (data_dir.empty() && synthetic_slices < 5) throw ConfigError("synthetic_slices must be >= 5");
    if (data_dir.empty() && phantom_size < 32) throw ConfigError("phantom_size must be >= 32");
    augment_config().validate();
    if (prepare.clahe.tile_rows < 1 || prepare.clahe.tile_cols < 1 || !(prepare.clahe.clip_limit >= 1.0))
        throw ConfigError("invalid CLAHE parameters");
}

AugmentConfig TrainConfig::augment_config() const {
    AugmentConfig a = augment;
    a.out_size = input_size;
    a.seed = seed;
    return a;
}

namespace {

double through_float(double v) { return static_cast<double>(static_cast<float>(v)); }

}  // namespace

Preprocess Preprocess::from(const TrainConfig& cfg) {
    Preprocess p;
    p.input_size = cfg.input_size;
    p.crop_fraction = through_float(cfg.augment.crop_fraction);
    p.equalize = cfg.prepare.equalize;
    p.clahe = cfg.prepare.clahe;
    p.clahe.clip_limit = through_float(p.clahe.clip_limit);
    return p;
}

Tensor<float> Preprocess::encode() const {
    return Tensor<float>({6}, {static_cast<float>(input_size), static_cast<float>(crop_fraction), equalize ? 1.0f : 0.0f,
                               static_cast<float>(clahe.tile_rows), static_cast<float>(clahe.tile_cols),
                               static_cast<float>(clahe.clip_limit)});
}

Preprocess Preprocess::decode(const Tensor<float>& t) {
    if (t.rank() != 1 || t.size() != 6) throw DataError("preprocess tensor must have 6 entries");
    Preprocess p;
    if (!(t[0] >= 8.0f) || !(t[3] >= 1.0f) || !(t[4] >= 1.0f)) throw DataError("preprocess tensor has invalid sizes");
    p.input_size = static_cast<std::size_t>(t[0]);
    p.crop_fraction = t[1];
    p.equalize = t[2] != 0.0f;
    p.clahe.tile_rows = static_cast<std::size_t>(t[3]);
    p.clahe.tile_cols = static_cast<std::size_t>(t[4]);
    p.clahe.clip_limit = t[5];
    return p;
}

Dataset prepare_dataset(const TrainConfig& cfg) {
    cfg.validate();
    set_num_workers(cfg.workers);
    Dataset d;
    d.slices = cfg.data_dir.empty() ? synth_slices(cfg.synthetic_slices, cfg.seed, cfg.phantom_size)
                                    : load_slices(cfg.data_dir);
    if (d.slices.empty()) throw DataError("dataset is empty");
    d.split = make_split(d.slices.size(), cfg.seed);
    d.train = build_samples(d.slices, d.split.train, cfg.prepare);
    d.test = build_samples(d.slices, d.split.test, cfg.prepare);
    return d;
}

std::vector<LabeledSample> evaluation_views(const std::vector<LabeledSample>& samples, const Preprocess& pre) {
    std::vector<LabeledSample> out(samples.size());
    parallel_for(samples.size(), [&](std::size_t i) {
        out[i] = {center_view(samples[i].image, pre.crop_fraction, pre.input_size), samples[i].label, samples[i].source};
    });
    return out;
}

namespace {

Tensor<float> pack(const std::vector<const GrayImage*>& images) {
    const std::size_t h = images.front()->height();
    const std::size_t w = images.front()->width();
    Tensor<float> x({images.size(), 1, h, w});
    for (std::size_t i = 0; i < images.size(); ++i) {
        if (images[i]->height() != h || images[i]->width() != w)
            throw ConfigError("batch images differ in size");
        std::copy(images[i]->pixels().begin(), images[i]->pixels().end(), x.data() + i * h * w);
    }
    return x;
}

int argmax_row(const Tensor<float>& logits, std::size_t row) {
    const std::size_t k = logits.dim(1);
    const float* p = logits.data() + row * k;
    return static_cast<int>(std::max_element(p, p + k) - p);
}

}  // namespace

Evaluation evaluate(const GeoNet<float>& model, const std::vector<LabeledSample>& samples) {
    Evaluation ev;
    if (samples.empty()) return ev;
    constexpr std::size_t kChunk = 64;
    double loss_sum = 0.0;
    std::size_t correct = 0;
    for (std::size_t start = 0; start < samples.size(); start += kChunk) {
        const std::size_t end = std::min(samples.size(), start + kChunk);
        std::vector<const GrayImage*> imgs;
        std::vector<int> labels;
        for (std::size_t i = start; i < end; ++i) {
            imgs.push_back(&samples[i].image);
            labels.push_back(samples[i].label);
        }
        const Tensor<float> logits = model.infer(pack(imgs));
        if (logits.dim(1) != 8) throw ConfigError("model does not have 8 outputs");
        loss_sum += nn::softmax_xent(logits, labels).loss * static_cast<double>(labels.size());
        for (std::size_t i = 0; i < labels.size(); ++i) {
            const int pred = argmax_row(logits, i);
            ++ev.confusion[static_cast<std::size_t>(labels[i])][static_cast<std::size_t>(pred)];
            if (pred == labels[i]) ++correct;
        }
    }
    ev.count = samples.size();
    ev.loss = loss_sum / static_cast<double>(ev.count);
    ev.accuracy = static_cast<double>(correct) / static_cast<double>(ev.count);
    return ev;
}

TrainResult train(const TrainConfig& cfg, const std::function<void(const EpochMetrics&)>& on_epoch) {
    return train(cfg, prepare_dataset(cfg), on_epoch);
}

TrainResult train(const TrainConfig& cfg, const Dataset& data, const std::function<void(const EpochMetrics&)>& on_epoch) {
    cfg.validate();
    set_num_workers(cfg.workers);
    if (data.train.empty()) throw DataError("training set is empty");

    TrainResult result;
    result.preprocess = Preprocess::from(cfg);
    result.model = GeoNet<float>(nn::geonet_architecture(8, cfg.extra_conv), derive_seed(cfg.seed, {0x1a17u}));
    GeoNet<float>& model = result.model;

    const AugmentConfig aug = cfg.augment_config();
    const std::vector<LabeledSample> test_views = evaluation_views(data.test, result.preprocess);

    std::vector<std::size_t> order(data.train.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    bool first_batch = true;
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        Rng shuffler(derive_seed(cfg.seed, {0x5b0ffu, epoch}));
        shuffle(order, shuffler);

        double loss_sum = 0.0;
        std::size_t seen = 0;
        std::size_t correct = 0;
        std::size_t batch_index = 0;
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size, ++batch_index) {
            const std::size_t end = std::min(order.size(), start + cfg.batch_size);
            if (end - start < 2) break;  // batch norm cannot use a single sample
            const std::size_t b = end - start;

            std::vector<GrayImage> views(b);
            std::vector<int> labels(b);
            parallel_for(b, [&](std::size_t i) {
                const LabeledSample& s = data.train[order[start + i]];
                Rng rng(sample_seed(cfg.seed, s.source, epoch, s.label));
                views[i] = augment(s.image, aug, rng);
            });
            std::vector<const GrayImage*> ptrs;
            for (std::size_t i = 0; i < b; ++i) {
                ptrs.push_back(&views[i]);
                labels[i] = data.train[order[start + i]].label;
            }

            const Tensor<float> logits = model.forward(pack(ptrs), nn::Mode::Train);
            const auto loss = nn::softmax_xent(logits, labels);
            if (!std::isfinite(loss.loss) || !logits.all_finite())
                throw DataError("non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                                std::to_string(batch_index));
            if (first_batch) {
                result.initial_loss = loss.loss;
                first_batch = false;
            }
            for (std::size_t i = 0; i < b; ++i)
                if (argmax_row(logits, i) == labels[i]) ++correct;
            loss_sum += loss.loss * static_cast<double>(b);
            seen += b;

            model.backward(loss.grad_logits);
            model.sgd_step(cfg.learning_rate);
        }

        EpochMetrics m;
        m.epoch = epoch;
        m.train_loss = seen ? loss_sum / static_cast<double>(seen) : 0.0;
        m.train_accuracy = seen ? static_cast<double>(correct) / static_cast<double>(seen) : 0.0;
        const Evaluation ev = evaluate(model, test_views);
        m.test_loss = ev.loss;
        m.test_accuracy = ev.accuracy;
        result.metrics.push_back(m);
        if (on_epoch) on_epoch(m);
    }
    return result;
}

Prediction predict_orientation(const GeoNet<float>& model, const Preprocess& pre, const GrayImage& img) {
    const GrayImage eq = pre.equalize ? clahe(img, pre.clahe) : img;
    const GrayImage view = center_view(eq, pre.crop_fraction, pre.input_size);
    const Tensor<float> logits = model.infer(pack({&view}));
    if (logits.dim(1) != 8) throw ConfigError("model does not have 8 outputs");
    Prediction p;
    const std::size_t k = logits.dim(1);
    const double mx = *std::max_element(logits.data(), logits.data() + k);
    double s = 0.0;
    for (std::size_t j = 0; j < k; ++j) s += std::exp(logits[j] - mx);
    for (std::size_t j = 0; j < k; ++j) p.probabilities[j] = std::exp(logits[j] - mx) / s;
    p.label = argmax_row(logits, 0);
    return p;
}

GrayImage fix_orientation(const GeoNet<float>& model, const Preprocess& pre, const GrayImage& img) {
    const Prediction p = predict_orientation(model, pre, img);
    return apply_2d(img, inverse_2d(orient_2d(p.label)));
}

void save_checkpoint(const std::filesystem::path& path, const GeoNet<float>& model, const Preprocess& pre) {
    std::vector<nn::NamedTensor<float>> tensors{{"architecture", nn::encode_architecture(model.layers())},
                                                {"preprocess", pre.encode()}};
    for (auto& nt : model.state()) tensors.push_back(std::move(nt));
    nn::write_tensors(path, tensors);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    auto tensors = nn::read_tensors(path);
    if (tensors.size() < 2 || tensors[0].name != "architecture" || tensors[1].name != "preprocess")
        throw DataError(path.string() + ": checkpoint lacks architecture/preprocess tensors");
    try {
        Checkpoint ck;
        const auto layers = nn::decode_architecture(tensors[0].tensor);
        ck.preprocess = Preprocess::decode(tensors[1].tensor);
        tensors.erase(tensors.begin(), tensors.begin() + 2);
        ck.model = GeoNet<float>::from_state(layers, tensors);
        return ck;
    } catch (const ConfigError& e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

std::string format_metric(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

std::string format_metrics_csv(const std::vector<EpochMetrics>& metrics) {
    std::ostringstream os;
    os << "epoch,train_loss,train_acc,test_loss,test_acc\n";
    for (const auto& m : metrics)
        os << m.epoch << ',' << format_metric(m.train_loss) << ',' << format_metric(m.train_accuracy) << ','
           << format_metric(m.test_loss) << ',' << format_metric(m.test_accuracy) << '\n';
    return os.str();
}

std::string format_confusion(const Confusion& c) {
    std::ostringstream os;
    for (const auto& row : c) {
        for (std::size_t j = 0; j < row.size(); ++j) os << (j ? "\t" : "") << row[j];
        os << '\n';
    }
    return os.str();
}

}  // namespace geonet
