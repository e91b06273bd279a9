#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "geonet/random.hpp"
#include "geonet/raster.hpp"

namespace geonet::testing {

inline GrayImage random_image(std::size_t h, std::size_t w, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<float> px(h * w);
    for (float& v : px) v = static_cast<float>(uniform01(rng));
    return GrayImage(h, w, std::move(px));
}

inline double max_abs_diff(const GrayImage& a, const GrayImage& b) {
    if (a.height() != b.height() || a.width() != b.width()) return 1e30;
    double m = 0.0;
    for (std::size_t i = 0; i < a.pixels().size(); ++i)
        m = std::max(m, static_cast<double>(std::abs(a.pixels()[i] - b.pixels()[i])));
    return m;
}

/// Radial gradient around an off-center point, values confined to [0.4, 0.6].
inline GrayImage low_contrast_gradient(std::size_t n) {
    GrayImage img(n, n);
    const double size = static_cast<double>(n);
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < n; ++c) {
            const double d = std::hypot((static_cast<double>(c) + 0.5) / size - 0.3,
                                        (static_cast<double>(r) + 0.5) / size - 0.4);
            img(r, c) = static_cast<float>(0.4 + 0.2 * std::min(1.0, d / 0.9));
        }
    return img;
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("geonet_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace geonet::testing
