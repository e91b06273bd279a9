#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <span>
#include <vector>

#include "geonet/orient_group.hpp"

namespace geonet {

/// Row-major grayscale raster with samples in [0, 1].
class GrayImage {
public:
    GrayImage() = default;
    GrayImage(std::size_t height, std::size_t width, float fill = 0.0f);
    /// Takes ownership of pixels; throws ConfigError on size mismatch or values outside [0, 1].
    GrayImage(std::size_t height, std::size_t width, std::vector<float> pixels);

    std::size_t height() const { return height_; }
    std::size_t width() const { return width_; }
    std::size_t size() const { return pixels_.size(); }
    bool empty() const { return pixels_.empty(); }

    float operator()(std::size_t row, std::size_t col) const { return pixels_[row * width_ + col]; }
    float& operator()(std::size_t row, std::size_t col) { return pixels_[row * width_ + col]; }

    std::span<const float> pixels() const { return pixels_; }
    std::span<float> pixels() { return pixels_; }

    /// Quantized 8-bit view, round(v * 255).
    std::vector<std::uint8_t> to_bytes() const;
    static GrayImage from_bytes(std::size_t height, std::size_t width, std::span<const std::uint8_t> bytes);

    friend bool operator==(const GrayImage&, const GrayImage&) = default;

private:
    std::size_t height_ = 0;
    std::size_t width_ = 0;
    std::vector<float> pixels_;
};

/// Frame sequence with two spatial dimensions and one time dimension.
class ImageStack {
public:
    /// Requires at least two frames of identical size.
    explicit ImageStack(std::vector<GrayImage> frames);

    std::size_t frame_count() const { return frames_.size(); }
    const GrayImage& frame(std::size_t i) const { return frames_.at(i); }
    const std::vector<GrayImage>& frames() const { return frames_; }

    friend bool operator==(const ImageStack&, const ImageStack&) = default;

private:
    std::vector<GrayImage> frames_;
};

struct Histogram {
    std::array<std::uint64_t, 256> bins{};
    std::uint64_t total() const;
};

std::uint8_t quantize(float v);

/// Exact pixel permutation; axis-swapping transforms produce a width x height result.
GrayImage apply_2d(const GrayImage& img, const OrientTransform2D& t);
ImageStack apply_serial(const ImageStack& stack, const SerialTransform& st);

struct ClaheParams {
    std::size_t tile_rows = 8;
    std::size_t tile_cols = 8;
    /// Multiple of the uniform bin height; infinity disables clipping.
    double clip_limit = 2.0;
};

/**
 * Contrast-limited adaptive histogram equalization.
 *
 * Each tile gets a 256-bin histogram of the quantized image. Bins above
 * clip_limit * (tile pixels / 256) are clipped and the excess is spread
 * uniformly over all bins. The tile mapping is the normalized cumulative
 * histogram, cdf(v) / tile pixels, and each pixel interpolates bilinearly
 * between the mappings of the four nearest tile centers. A tile whose
 * unclipped histogram occupies a single bin maps through identity.
 *
 * Throws ConfigError when the image is smaller than the tile grid, the grid
 * is empty, or clip_limit < 1.
 */
GrayImage clahe(const GrayImage& img, const ClaheParams& params = {});

Histogram histogram(const GrayImage& img);
/// Shannon entropy in bits.
double entropy(const Histogram& h);

/// Bilinear resampling with half-pixel center alignment and edge clamping.
GrayImage resize_bilinear(const GrayImage& img, std::size_t out_h, std::size_t out_w);

/// Rotation about the image center by angle_degrees (counterclockwise as
/// displayed), bilinear sampling, zero fill. |angle| must be below 45.
GrayImage rotate_small(const GrayImage& img, double angle_degrees);

/// Square crop starting at (top, left).
GrayImage crop(const GrayImage& img, std::size_t top, std::size_t left, std::size_t height, std::size_t width);

double mean_abs_diff(const GrayImage& a, const GrayImage& b);

/// Binary 8-bit PGM (P5). Any maxval up to 255 is accepted on read.
GrayImage read_pgm(const std::filesystem::path& path);
void write_pgm(const std::filesystem::path& path, const GrayImage& img);

/// Renders the histogram as a simple bar chart (white bars on black).
GrayImage render_histogram(const Histogram& h, std::size_t height = 128);
/// 8-bit grayscale PNG.
void write_png(const std::filesystem::path& path, const GrayImage& img);

}  // namespace geonet
