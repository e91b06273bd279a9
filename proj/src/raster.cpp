#include "geonet/raster.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "geonet/error.hpp"
#include "geonet/io.hpp"

namespace geonet {

namespace {

float lerp(float a, float b, float t) { return a == b ? a : a + t * (b - a); }

}  // namespace

GrayImage::GrayImage(std::size_t height, std::size_t width, float fill)
    : height_(height), width_(width), pixels_(height * width, fill) {
    if (!(fill >= 0.0f && fill <= 1.0f)) throw ConfigError("pixel fill value outside [0, 1]");
}

GrayImage::GrayImage(std::size_t height, std::size_t width, std::vector<float> pixels)
    : height_(height), width_(width), pixels_(std::move(pixels)) {
    if (pixels_.size() != height_ * width_)
        throw ConfigError("pixel buffer has " + std::to_string(pixels_.size()) + " values, expected " +
                          std::to_string(height_ * width_));
    for (float v : pixels_)
        if (!(v >= 0.0f && v <= 1.0f)) throw ConfigError("pixel value outside [0, 1]");
}

std::uint8_t quantize(float v) {
    const float c = std::clamp(v, 0.0f, 1.0f);
    return static_cast<std::uint8_t>(std::lround(c * 255.0f));
}

std::vector<std::uint8_t> GrayImage::to_bytes() const {
    std::vector<std::uint8_t> out(pixels_.size());
    std::transform(pixels_.begin(), pixels_.end(), out.begin(), quantize);
    return out;
}

GrayImage GrayImage::from_bytes(std::size_t height, std::size_t width, std::span<const std::uint8_t> bytes) {
    std::vector<float> px(bytes.size());
    std::transform(bytes.begin(), bytes.end(), px.begin(),
                   [](std::uint8_t b) { return static_cast<float>(b) / 255.0f; });
    return GrayImage(height, width, std::move(px));
}

ImageStack::ImageStack(std::vector<GrayImage> frames) : frames_(std::move(frames)) {
    if (frames_.size() < 2) throw ConfigError("image stack needs at least 2 frames");
    for (const auto& f : frames_)
        if (f.height() != frames_[0].height() || f.width() != frames_[0].width())
            throw ConfigError("image stack frames differ in size");
}

std::uint64_t Histogram::total() const {
    std::uint64_t t = 0;
    for (auto b : bins) t += b;
    return t;
}

GrayImage apply_2d(const GrayImage& img, const OrientTransform2D& t) {
    const auto h = static_cast<long>(img.height());
    const auto w = static_cast<long>(img.width());
    const bool swap = t.swaps_axes();
    const long oh = swap ? w : h;
    const long ow = swap ? h : w;
    GrayImage out(static_cast<std::size_t>(oh), static_cast<std::size_t>(ow));
    const auto& m = t.matrix;
    // Doubled centered coordinates keep the remapping in exact integers.
    for (long r = 0; r < h; ++r) {
        const long y2 = 2 * r - (h - 1);
        for (long c = 0; c < w; ++c) {
            const long x2 = 2 * c - (w - 1);
            const long ox2 = m[0][0] * x2 + m[0][1] * y2;
            const long oy2 = m[1][0] * x2 + m[1][1] * y2;
            const long oc = (ox2 + ow - 1) / 2;
            const long orow = (oy2 + oh - 1) / 2;
            out(static_cast<std::size_t>(orow), static_cast<std::size_t>(oc)) =
                img(static_cast<std::size_t>(r), static_cast<std::size_t>(c));
        }
    }
    return out;
}

ImageStack apply_serial(const ImageStack& stack, const SerialTransform& st) {
    std::vector<GrayImage> frames;
    frames.reserve(stack.frame_count());
    for (const auto& f : stack.frames()) frames.push_back(apply_2d(f, st.planar));
    if (st.time_reversed) std::reverse(frames.begin(), frames.end());
    return ImageStack(std::move(frames));
}

GrayImage clahe(const GrayImage& img, const ClaheParams& params) {
    if (params.tile_rows < 1 || params.tile_cols < 1) throw ConfigError("CLAHE tile grid must be at least 1x1");
    if (!(params.clip_limit >= 1.0)) throw ConfigError("CLAHE clip limit must be >= 1");
    if (img.height() < params.tile_rows || img.width() < params.tile_cols)
        throw ConfigError("image " + std::to_string(img.height()) + "x" + std::to_string(img.width()) +
                          " is smaller than the CLAHE tile grid " + std::to_string(params.tile_rows) + "x" +
                          std::to_string(params.tile_cols));

    const std::size_t h = img.height();
    const std::size_t w = img.width();
    const std::size_t rows = params.tile_rows;
    const std::size_t cols = params.tile_cols;
    const double th = static_cast<double>(h) / static_cast<double>(rows);
    const double tw = static_cast<double>(w) / static_cast<double>(cols);
    const auto bounds = [](std::size_t i, double step) { return static_cast<std::size_t>(std::floor(i * step)); };

    const std::vector<std::uint8_t> q = img.to_bytes();

    struct TileMap {
        bool identity = false;
        std::array<float, 256> lut{};
    };
    std::vector<TileMap> maps(rows * cols);

    for (std::size_t tr = 0; tr < rows; ++tr) {
        const std::size_t r0 = bounds(tr, th);
        const std::size_t r1 = tr + 1 == rows ? h : bounds(tr + 1, th);
        for (std::size_t tc = 0; tc < cols; ++tc) {
            const std::size_t c0 = bounds(tc, tw);
            const std::size_t c1 = tc + 1 == cols ? w : bounds(tc + 1, tw);
            std::array<double, 256> hist{};
            for (std::size_t r = r0; r < r1; ++r)
                for (std::size_t c = c0; c < c1; ++c) hist[q[r * w + c]] += 1.0;
            const double n = static_cast<double>((r1 - r0) * (c1 - c0));

            TileMap& tm = maps[tr * cols + tc];
            const auto occupied = std::count_if(hist.begin(), hist.end(), [](double v) { return v > 0.0; });
            if (occupied <= 1) {
                tm.identity = true;
                continue;
            }
            if (std::isfinite(params.clip_limit)) {
                const double limit = std::max(1.0, params.clip_limit * n / 256.0);
                double excess = 0.0;
                for (double& v : hist) {
                    if (v > limit) {
                        excess += v - limit;
                        v = limit;
                    }
                }
                const double share = excess / 256.0;
                for (double& v : hist) v += share;
            }
            double cdf = 0.0;
            for (std::size_t b = 0; b < 256; ++b) {
                cdf += hist[b];
                tm.lut[b] = static_cast<float>(std::min(1.0, cdf / n));
            }
        }
    }

    GrayImage out(h, w);
    const auto pixels = img.pixels();
    const auto map_value = [&](std::size_t tile, std::size_t idx) {
        const TileMap& tm = maps[tile];
        return tm.identity ? pixels[idx] : tm.lut[q[idx]];
    };
    for (std::size_t r = 0; r < h; ++r) {
        const double fy = (static_cast<double>(r) + 0.5) / th - 0.5;
        const double fy0 = std::floor(fy);
        const std::size_t ty0 = fy0 < 0 ? 0 : std::min(rows - 1, static_cast<std::size_t>(fy0));
        const std::size_t ty1 = std::min(rows - 1, ty0 + (fy0 < 0 ? 0 : 1));
        const auto wy = static_cast<float>(std::clamp(fy - fy0, 0.0, 1.0));
        for (std::size_t c = 0; c < w; ++c) {
            const double fx = (static_cast<double>(c) + 0.5) / tw - 0.5;
            const double fx0 = std::floor(fx);
            const std::size_t tx0 = fx0 < 0 ? 0 : std::min(cols - 1, static_cast<std::size_t>(fx0));
            const std::size_t tx1 = std::min(cols - 1, tx0 + (fx0 < 0 ? 0 : 1));
            const auto wx = static_cast<float>(std::clamp(fx - fx0, 0.0, 1.0));
            const std::size_t idx = r * w + c;
            const float top = lerp(map_value(ty0 * cols + tx0, idx), map_value(ty0 * cols + tx1, idx), wx);
            const float bot = lerp(map_value(ty1 * cols + tx0, idx), map_value(ty1 * cols + tx1, idx), wx);
            out(r, c) = std::clamp(lerp(top, bot, wy), 0.0f, 1.0f);
        }
    }
    return out;
}

Histogram histogram(const GrayImage& img) {
    Histogram h;
    for (float v : img.pixels()) ++h.bins[quantize(v)];
    return h;
}

double entropy(const Histogram& h) {
    const auto n = static_cast<double>(h.total());
    if (n == 0.0) return 0.0;
    double e = 0.0;
    for (auto b : h.bins) {
        if (b == 0) continue;
        const double p = static_cast<double>(b) / n;
        e -= p * std::log2(p);
    }
    return e;
}

GrayImage resize_bilinear(const GrayImage& img, std::size_t out_h, std::size_t out_w) {
    if (out_h < 1 || out_w < 1) throw ConfigError("resize target must be at least 1x1");
    if (img.empty()) throw ConfigError("cannot resize an empty image");
    const std::size_t h = img.height();
    const std::size_t w = img.width();
    const double sy = static_cast<double>(h) / static_cast<double>(out_h);
    const double sx = static_cast<double>(w) / static_cast<double>(out_w);

    struct Tap {
        std::size_t i0, i1;
        float t;
    };
    const auto taps = [](std::size_t n_out, std::size_t n_in, double scale) {
        std::vector<Tap> out(n_out);
        for (std::size_t d = 0; d < n_out; ++d) {
            const double s = std::clamp((static_cast<double>(d) + 0.5) * scale - 0.5, 0.0,
                                        static_cast<double>(n_in - 1));
            const auto i0 = static_cast<std::size_t>(std::floor(s));
            const std::size_t i1 = std::min(i0 + 1, n_in - 1);
            out[d] = {i0, i1, static_cast<float>(s - static_cast<double>(i0))};
        }
        return out;
    };
    const auto ty = taps(out_h, h, sy);
    const auto tx = taps(out_w, w, sx);

    GrayImage out(out_h, out_w);
    for (std::size_t r = 0; r < out_h; ++r) {
        for (std::size_t c = 0; c < out_w; ++c) {
            const float top = lerp(img(ty[r].i0, tx[c].i0), img(ty[r].i0, tx[c].i1), tx[c].t);
            const float bot = lerp(img(ty[r].i1, tx[c].i0), img(ty[r].i1, tx[c].i1), tx[c].t);
            out(r, c) = std::clamp(lerp(top, bot, ty[r].t), 0.0f, 1.0f);
        }
    }
    return out;
}

GrayImage rotate_small(const GrayImage& img, double angle_degrees) {
    if (!(std::abs(angle_degrees) < 45.0))
        throw ConfigError("jitter rotation must stay below 45 degrees, got " + std::to_string(angle_degrees));
    const std::size_t h = img.height();
    const std::size_t w = img.width();
    const double theta = angle_degrees * M_PI / 180.0;
    const double cs = std::cos(theta);
    const double sn = std::sin(theta);
    const double cy = (static_cast<double>(h) - 1.0) / 2.0;
    const double cx = (static_cast<double>(w) - 1.0) / 2.0;

    const auto at = [&](long r, long c) -> float {
        if (r < 0 || c < 0 || r >= static_cast<long>(h) || c >= static_cast<long>(w)) return 0.0f;
        return img(static_cast<std::size_t>(r), static_cast<std::size_t>(c));
    };

    GrayImage out(h, w);
    for (std::size_t r = 0; r < h; ++r) {
        const double dy = static_cast<double>(r) - cy;
        for (std::size_t c = 0; c < w; ++c) {
            const double dx = static_cast<double>(c) - cx;
            // Inverse map: rows grow downward, so a displayed counterclockwise
            // turn samples from the clockwise-rotated position.
            const double sx = cs * dx - sn * dy + cx;
            const double sy = sn * dx + cs * dy + cy;
            const double fx0 = std::floor(sx);
            const double fy0 = std::floor(sy);
            const auto x0 = static_cast<long>(fx0);
            const auto y0 = static_cast<long>(fy0);
            const auto tx = static_cast<float>(sx - fx0);
            const auto ty = static_cast<float>(sy - fy0);
            const float top = lerp(at(y0, x0), at(y0, x0 + 1), tx);
            const float bot = lerp(at(y0 + 1, x0), at(y0 + 1, x0 + 1), tx);
            out(r, c) = std::clamp(lerp(top, bot, ty), 0.0f, 1.0f);
        }
    }
    return out;
}

GrayImage crop(const GrayImage& img, std::size_t top, std::size_t left, std::size_t height, std::size_t width) {
    if (height < 1 || width < 1 || top + height > img.height() || left + width > img.width())
        throw ConfigError("crop window " + std::to_string(height) + "x" + std::to_string(width) + " at (" +
                          std::to_string(top) + "," + std::to_string(left) + ") does not fit image " +
                          std::to_string(img.height()) + "x" + std::to_string(img.width()));
    GrayImage out(height, width);
    for (std::size_t r = 0; r < height; ++r)
        for (std::size_t c = 0; c < width; ++c) out(r, c) = img(top + r, left + c);
    return out;
}

double mean_abs_diff(const GrayImage& a, const GrayImage& b) {
    if (a.height() != b.height() || a.width() != b.width()) throw ConfigError("image sizes differ");
    if (a.empty()) return 0.0;
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(static_cast<double>(a.pixels()[i]) - b.pixels()[i]);
    return s / static_cast<double>(a.size());
}

namespace {

// Reads one header token, skipping whitespace and '#' comments.
std::string header_token(std::istream& in) {
    std::string tok;
    int ch = 0;
    while ((ch = in.get()) != EOF) {
        if (ch == '#') {
            while ((ch = in.get()) != EOF && ch != '\n') {
            }
            continue;
        }
        if (std::isspace(ch)) {
            if (!tok.empty()) break;
            continue;
        }
        tok.push_back(static_cast<char>(ch));
    }
    return tok;
}

std::size_t header_number(std::istream& in, const std::filesystem::path& path, const char* what) {
    const std::string tok = header_token(in);
    if (tok.empty() || tok.find_first_not_of("0123456789") != std::string::npos)
        throw DataError(path.string() + ": malformed PGM header (bad " + what + ")");
    return static_cast<std::size_t>(std::stoul(tok));
}

}  // namespace

GrayImage read_pgm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError(path.string() + ": cannot open file");
    if (header_token(in) != "P5") throw DataError(path.string() + ": malformed PGM header (expected P5)");
    const std::size_t w = header_number(in, path, "width");
    const std::size_t h = header_number(in, path, "height");
    const std::size_t maxval = header_number(in, path, "maxval");
    if (w == 0 || h == 0) throw DataError(path.string() + ": PGM has zero size");
    if (maxval == 0 || maxval > 255) throw DataError(path.string() + ": unsupported PGM maxval " + std::to_string(maxval));
    std::vector<std::uint8_t> bytes(w * h);
    in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (in.gcount() != static_cast<std::streamsize>(bytes.size()))
        throw DataError(path.string() + ": truncated PGM pixel data");
    if (maxval == 255) return GrayImage::from_bytes(h, w, bytes);
    std::vector<float> px(bytes.size());
    for (std::size_t i = 0; i < bytes.size(); ++i) {
        if (bytes[i] > maxval) throw DataError(path.string() + ": PGM sample exceeds maxval");
        px[i] = static_cast<float>(bytes[i]) / static_cast<float>(maxval);
    }
    return GrayImage(h, w, std::move(px));
}

void write_pgm(const std::filesystem::path& path, const GrayImage& img) {
    std::string data = "P5\n" + std::to_string(img.width()) + " " + std::to_string(img.height()) + "\n255\n";
    const auto bytes = img.to_bytes();
    data.append(reinterpret_cast<const char*>(bytes.data()), bytes.size());
    write_file_atomic(path, data);
}

GrayImage render_histogram(const Histogram& h, std::size_t height) {
    GrayImage out(height, 256);
    const auto peak = *std::max_element(h.bins.begin(), h.bins.end());
    if (peak == 0) return out;
    for (std::size_t b = 0; b < 256; ++b) {
        const auto bar = static_cast<std::size_t>(
            std::llround(static_cast<double>(h.bins[b]) / static_cast<double>(peak) * static_cast<double>(height)));
        for (std::size_t r = height - bar; r < height; ++r) out(r, b) = 1.0f;
    }
    return out;
}

void write_png(const std::filesystem::path& path, const GrayImage& img) {
    png_image image{};
    image.version = PNG_IMAGE_VERSION;
    image.width = static_cast<png_uint_32>(img.width());
    image.height = static_cast<png_uint_32>(img.height());
    image.format = PNG_FORMAT_GRAY;
    const auto bytes = img.to_bytes();
    png_alloc_size_t size = 0;
    if (!png_image_write_get_memory_size(image, size, 0, bytes.data(), 0, nullptr))
        throw DataError("PNG encode failed: " + std::string(image.message));
    std::vector<char> buf(size);
    if (!png_image_write_to_memory(&image, buf.data(), &size, 0, bytes.data(), 0, nullptr))
        throw DataError("PNG encode failed: " + std::string(image.message));
    buf.resize(size);
    write_file_atomic(path, std::span<const char>(buf));
}

}  // namespace geonet
