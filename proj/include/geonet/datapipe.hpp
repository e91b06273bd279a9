#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "geonet/random.hpp"
#include "geonet/raster.hpp"

namespace geonet {

/// One source slice before label expansion.
struct Slice {
    std::string id;
    GrayImage image;
};

struct LabeledSample {
    GrayImage image;
    int label = 0;
    /// Index of the originating slice.
    std::size_t source = 0;
};

struct DatasetSplit {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
    std::uint64_t seed = 0;
};

struct AugmentConfig {
    double crop_fraction = 0.7;
    std::size_t out_size = 256;
    double max_jitter_degrees = 10.0;
    std::uint64_t seed = 0;

    /// Throws ConfigError unless 0 < crop_fraction <= 1, out_size >= 8, 0 <= jitter < 45.
    void validate() const;
};

/// The eight transformed copies of img, element y carrying label y.
std::vector<LabeledSample> expand_labels(const GrayImage& img, std::size_t source);

/// Seeded shuffle of slice indices, floor(0.8 n) to train. Needs n >= 5.
DatasetSplit make_split(std::size_t n_slices, std::uint64_t seed);

/// Side of the square crop window covering crop_fraction of the smaller square.
std::size_t crop_side(std::size_t height, std::size_t width, double crop_fraction);

/// Random jitter rotation, random square crop, bilinear resize to out_size.
GrayImage augment(const GrayImage& img, const AugmentConfig& cfg, Rng& rng);

/// Deterministic evaluation view: centered crop of the same size, then resize.
GrayImage center_view(const GrayImage& img, double crop_fraction, std::size_t out_size);

/// Per-sample stream: independent of processing order and worker count.
std::uint64_t sample_seed(std::uint64_t seed, std::size_t source, std::size_t epoch, int label);

/**
 * Synthetic short-axis cardiac stand-in: dark background, a wide torso
 * ellipse, an off-center ventricle ring whose wall brightness grows with
 * angle, a bright blood pool, a crescent beside the ring, a small bright
 * blob below and mild noise. No orientation transform maps it onto itself.
 * Requires h, w >= 32.
 */
GrayImage synth_phantom(std::uint64_t seed, std::size_t h, std::size_t w);

std::vector<Slice> synth_slices(std::size_t n, std::uint64_t seed, std::size_t size);

/// Every *.pgm file in dir, sorted by file name; throws DataError naming any bad file.
std::vector<Slice> load_slices(const std::filesystem::path& dir);

enum class AheOrder {
    /// Equalize each source slice once, then expand (variants are exact permutations).
    BeforeExpansion,
    /// Expand first, then equalize each transformed image.
    AfterExpansion,
};

struct PrepareOptions {
    bool equalize = true;
    ClaheParams clahe;
    AheOrder order = AheOrder::BeforeExpansion;
};

/// Equalization plus 8-way expansion for the given slice indices, grouped by slice in label order.
std::vector<LabeledSample> build_samples(const std::vector<Slice>& slices, const std::vector<std::size_t>& indices,
                                         const PrepareOptions& opts);

struct ManifestRow {
    std::string split;
    std::string source_id;
    int label = 0;
    std::string path;
};

/**
 * Writes <out>/train/<label>/<source>_<label>.pgm, the same under test/, and
 * <out>/manifest.tsv with columns split, source_id, label, path (relative).
 */
std::vector<ManifestRow> materialize_dataset(const std::vector<Slice>& slices, const DatasetSplit& split,
                                             const PrepareOptions& opts, const std::filesystem::path& out_dir);

std::vector<ManifestRow> read_manifest(const std::filesystem::path& path);

struct SerialSample {
    ImageStack stack;
    int label = 0;
};

/// The sixteen transformed copies of a frame sequence, element y carrying label y.
std::vector<SerialSample> expand_serial(const ImageStack& stack);

}  // namespace geonet
