#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "geonet/datapipe.hpp"
#include "geonet/model.hpp"

namespace geonet {

struct TrainConfig {
    std::size_t epochs = 32;
    std::size_t batch_size = 16;
    double learning_rate = 0.01;
    std::size_t input_size = 256;
    std::uint64_t seed = 0;
    /// out_size and seed are taken from input_size and seed.
    AugmentConfig augment;
    PrepareOptions prepare;
    /// Directory of PGM slices; when empty, synthetic_slices phantoms are generated.
    std::filesystem::path data_dir;
    std::size_t synthetic_slices = 200;
    std::size_t phantom_size = 96;
    bool extra_conv = false;
    int workers = 1;

    void validate() const;
    AugmentConfig augment_config() const;
};

struct EpochMetrics {
    std::size_t epoch = 0;
    double train_loss = 0.0;
    double train_accuracy = 0.0;
    double test_loss = 0.0;
    double test_accuracy = 0.0;
};

/// What inference needs to turn a raw slice into network input.
struct Preprocess {
    std::size_t input_size = 256;
    double crop_fraction = 0.7;
    bool equalize = true;
    ClaheParams clahe;

    nn::Tensor<float> encode() const;
    static Preprocess decode(const nn::Tensor<float>& t);
    static Preprocess from(const TrainConfig& cfg);
};

struct Dataset {
    std::vector<Slice> slices;
    DatasetSplit split;
    std::vector<LabeledSample> train;
    std::vector<LabeledSample> test;
};

/// Loads or synthesizes slices, splits them by slice and expands labels.
Dataset prepare_dataset(const TrainConfig& cfg);

struct TrainResult {
    nn::GeoNet<float> model;
    Preprocess preprocess;
    std::vector<EpochMetrics> metrics;
    /// Loss of the untrained model on the first training batch.
    double initial_loss = 0.0;
};

/// Runs the whole experiment; deterministic given cfg. on_epoch is called after each epoch.
TrainResult train(const TrainConfig& cfg, const std::function<void(const EpochMetrics&)>& on_epoch = {});
TrainResult train(const TrainConfig& cfg, const Dataset& data,
                  const std::function<void(const EpochMetrics&)>& on_epoch = {});

using Confusion = std::array<std::array<std::uint64_t, 8>, 8>;

struct Evaluation {
    double loss = 0.0;
    double accuracy = 0.0;
    /// Row = true label, column = predicted label.
    Confusion confusion{};
    std::size_t count = 0;
};

/// Deterministic network inputs: centered crop then resize to the model input size.
std::vector<LabeledSample> evaluation_views(const std::vector<LabeledSample>& samples, const Preprocess& pre);

/// Eval-mode metrics over samples already at the model input size.
Evaluation evaluate(const nn::GeoNet<float>& model, const std::vector<LabeledSample>& samples);

struct Prediction {
    int label = 0;
    std::array<double, 8> probabilities{};
};

/// Normalizes a copy (equalization, centered crop, resize) and classifies it.
Prediction predict_orientation(const nn::GeoNet<float>& model, const Preprocess& pre, const GrayImage& img);

/// Undoes the predicted transform on the image as given.
GrayImage fix_orientation(const nn::GeoNet<float>& model, const Preprocess& pre, const GrayImage& img);

struct Checkpoint {
    nn::GeoNet<float> model;
    Preprocess preprocess;
};

/// Adds "architecture" and "preprocess" tensors to the model state.
void save_checkpoint(const std::filesystem::path& path, const nn::GeoNet<float>& model, const Preprocess& pre);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Header epoch,train_loss,train_acc,test_loss,test_acc; six significant digits.
std::string format_metrics_csv(const std::vector<EpochMetrics>& metrics);
/// Eight lines of eight tab-separated counts.
std::string format_confusion(const Confusion& c);
/// Six significant digits, as written to the metrics file.
std::string format_metric(double v);

}  // namespace geonet
