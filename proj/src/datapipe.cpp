#include "geonet/datapipe.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>

#include "geonet/error.hpp"
#include "geonet/io.hpp"
#include "geonet/parallel.hpp"

namespace geonet {

void AugmentConfig::validate() const {
    if (!(crop_fraction > 0.0 && crop_fraction <= 1.0))
        throw ConfigError("crop_fraction must be in (0, 1], got " + std::to_string(crop_fraction));
    if (out_size < 8) throw ConfigError("out_size must be at least 8, got " + std::to_string(out_size));
    if (!(max_jitter_degrees >= 0.0 && max_jitter_degrees < 45.0))
        throw ConfigError("max_jitter_degrees must be in [0, 45), got " + std::to_string(max_jitter_degrees));
}

std::vector<LabeledSample> expand_labels(const GrayImage& img, std::size_t source) {
    if (img.empty()) throw ConfigError("cannot expand an empty image");
    std::vector<LabeledSample> out;
    out.reserve(kNumOrient2D);
    for (const auto& t : enumerate_2d()) out.push_back({apply_2d(img, t), t.label, source});
    return out;
}

DatasetSplit make_split(std::size_t n_slices, std::uint64_t seed) {
    if (n_slices < 5)
        throw ConfigError("need at least 5 slices to form train and test sets, got " + std::to_string(n_slices));
    std::vector<std::size_t> order(n_slices);
    for (std::size_t i = 0; i < n_slices; ++i) order[i] = i;
    Rng rng(derive_seed(seed, {0x5711u}));
    shuffle(order, rng);
    const std::size_t n_train = n_slices * 4 / 5;
    DatasetSplit s;
    s.seed = seed;
    s.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
    s.test.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
    std::sort(s.train.begin(), s.train.end());
    std::sort(s.test.begin(), s.test.end());
    return s;
}

std::size_t crop_side(std::size_t height, std::size_t width, double crop_fraction) {
    return static_cast<std::size_t>(std::floor(std::sqrt(crop_fraction) * static_cast<double>(std::min(height, width))));
}

GrayImage augment(const GrayImage& img, const AugmentConfig& cfg, Rng& rng) {
    cfg.validate();
    const std::size_t side = crop_side(img.height(), img.width(), cfg.crop_fraction);
    if (side < 1 || side > std::min(img.height(), img.width()))
        throw ConfigError("crop window does not fit a " + std::to_string(img.height()) + "x" +
                          std::to_string(img.width()) + " image");
    const double angle = uniform(rng, -cfg.max_jitter_degrees, cfg.max_jitter_degrees);
    const std::size_t top = uniform_index(rng, img.height() - side + 1);
    const std::size_t left = uniform_index(rng, img.width() - side + 1);
    const GrayImage turned = angle == 0.0 ? img : rotate_small(img, angle);
    return resize_bilinear(crop(turned, top, left, side, side), cfg.out_size, cfg.out_size);
}

GrayImage center_view(const GrayImage& img, double crop_fraction, std::size_t out_size) {
    const std::size_t side = crop_side(img.height(), img.width(), crop_fraction);
    if (side < 1) throw ConfigError("crop window does not fit the image");
    const std::size_t top = (img.height() - side) / 2;
    const std::size_t left = (img.width() - side) / 2;
    return resize_bilinear(crop(img, top, left, side, side), out_size, out_size);
}

std::uint64_t sample_seed(std::uint64_t seed, std::size_t source, std::size_t epoch, int label) {
    return derive_seed(seed, {0xa06u, source, epoch, static_cast<std::uint64_t>(label)});
}

GrayImage synth_phantom(std::uint64_t seed, std::size_t h, std::size_t w) {
    if (h < 32 || w < 32) throw ConfigError("phantom needs at least 32x32 pixels");
    Rng rng(derive_seed(seed, {0x9a4u}));
    const double H = static_cast<double>(h);
    const double W = static_cast<double>(w);
    const double S = std::min(H, W);
    const auto jit = [&](double amount) { return uniform(rng, -amount, amount); };

    // Geometry in pixel units; every part keeps the same orientation cue across seeds.
    const double torso_cx = W * (0.5 + jit(0.02));
    const double torso_cy = H * (0.55 + jit(0.02));
    const double torso_a = W * (0.44 + jit(0.02));
    const double torso_b = H * (0.30 + jit(0.02));
    const double torso_level = 0.22 + jit(0.04);

    const double ring_cx = W * (0.40 + jit(0.03));
    const double ring_cy = H * (0.43 + jit(0.03));
    const double ring_r = S * (0.15 + jit(0.015));
    const double ring_t = S * (0.05 + jit(0.008));
    const double wall_lo = 0.35 + jit(0.05);
    const double wall_hi = 0.80 + jit(0.05);
    const double pool_level = 0.90 + jit(0.05);

    const double cres_cx = ring_cx + ring_r * (1.35 + jit(0.1));
    const double cres_cy = ring_cy + ring_r * (0.15 + jit(0.1));
    const double cres_r = ring_r * (0.95 + jit(0.08));
    const double cres_cut = cres_r * 0.6;
    const double cres_level = 0.62 + jit(0.05);

    const double blob_cx = W * (0.36 + jit(0.03));
    const double blob_cy = H * (0.78 + jit(0.02));
    const double blob_r = S * (0.05 + jit(0.01));
    const double blob_level = 0.95;

    const double phase = jit(0.3);
    const double noise = 0.03;

    std::vector<float> px(h * w);
    for (std::size_t r = 0; r < h; ++r) {
        for (std::size_t c = 0; c < w; ++c) {
            const double x = static_cast<double>(c) + 0.5;
            const double y = static_cast<double>(r) + 0.5;
            double v = 0.03;
            const double ex = (x - torso_cx) / torso_a;
            const double ey = (y - torso_cy) / torso_b;
            if (ex * ex + ey * ey <= 1.0) v = torso_level * (1.0 - 0.35 * (y - (torso_cy - torso_b)) / (2.0 * torso_b));

            const double dx = x - ring_cx;
            const double dy = y - ring_cy;
            const double d = std::hypot(dx, dy);
            const double cdx = x - cres_cx;
            const double cdy = y - cres_cy;
            const double cut_dx = x - (cres_cx + cres_r * 0.45);
            if (std::hypot(cdx, cdy) <= cres_r && std::hypot(cut_dx, cdy) > cres_cut && d > ring_r + ring_t)
                v = cres_level;
            if (d <= ring_r - ring_t) {
                v = pool_level;
            } else if (d <= ring_r + ring_t) {
                double a = std::atan2(dy, dx) + M_PI + phase;  // (0, 2pi] offset by phase
                a = std::fmod(a + 2.0 * M_PI, 2.0 * M_PI) / (2.0 * M_PI);
                v = wall_lo + (wall_hi - wall_lo) * a;
            }
            if (std::hypot(x - blob_cx, y - blob_cy) <= blob_r) v = blob_level;
            v += jit(noise);
            px[r * w + c] = static_cast<float>(std::clamp(v, 0.0, 1.0));
        }
    }
    return GrayImage(h, w, std::move(px));
}

std::vector<Slice> synth_slices(std::size_t n, std::uint64_t seed, std::size_t size) {
    std::vector<Slice> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        char id[32];
        std::snprintf(id, sizeof id, "phantom%04zu", i);
        out.push_back({id, synth_phantom(derive_seed(seed, {0x51ceu, i}), size, size)});
    }
    return out;
}

std::vector<Slice> load_slices(const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    if (!fs::is_directory(dir, ec)) throw DataError(dir.string() + ": not a directory");
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir, ec))
        if (e.is_regular_file() && e.path().extension() == ".pgm") files.push_back(e.path());
    if (ec) throw DataError(dir.string() + ": " + ec.message());
    if (files.empty()) throw DataError(dir.string() + ": no .pgm files found");
    std::sort(files.begin(), files.end(), [](const fs::path& a, const fs::path& b) {
        return a.filename().string() < b.filename().string();
    });
    std::vector<Slice> out;
    out.reserve(files.size());
    for (const auto& f : files) out.push_back({f.stem().string(), read_pgm(f)});
    return out;
}

std::vector<LabeledSample> build_samples(const std::vector<Slice>& slices, const std::vector<std::size_t>& indices,
                                         const PrepareOptions& opts) {
    std::vector<LabeledSample> out(indices.size() * kNumOrient2D);
    parallel_for(indices.size(), [&](std::size_t k) {
        const std::size_t src = indices[k];
        const GrayImage& raw = slices.at(src).image;
        const bool pre = opts.equalize && opts.order == AheOrder::BeforeExpansion;
        auto expanded = expand_labels(pre ? clahe(raw, opts.clahe) : raw, src);
        for (std::size_t y = 0; y < expanded.size(); ++y) {
            if (opts.equalize && opts.order == AheOrder::AfterExpansion)
                expanded[y].image = clahe(expanded[y].image, opts.clahe);
            out[k * kNumOrient2D + y] = std::move(expanded[y]);
        }
    });
    return out;
}

std::vector<ManifestRow> materialize_dataset(const std::vector<Slice>& slices, const DatasetSplit& split,
                                             const PrepareOptions& opts, const std::filesystem::path& out_dir) {
    std::vector<ManifestRow> rows;
    std::ostringstream tsv;
    tsv << "split\tsource_id\tlabel\tpath\n";
    for (const auto& [name, indices] : {std::pair{"train", &split.train}, std::pair{"test", &split.test}}) {
        for (const auto& s : build_samples(slices, *indices, opts)) {
            const std::string& id = slices[s.source].id;
            const std::string rel = std::string(name) + "/" + std::to_string(s.label) + "/" + id + "_" +
                                    std::to_string(s.label) + ".pgm";
            write_pgm(out_dir / rel, s.image);
            rows.push_back({name, id, s.label, rel});
            tsv << name << '\t' << id << '\t' << s.label << '\t' << rel << '\n';
        }
    }
    write_file_atomic(out_dir / "manifest.tsv", tsv.str());
    return rows;
}

std::vector<ManifestRow> read_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError(path.string() + ": cannot open manifest");
    std::string line;
    if (!std::getline(in, line) || line != "split\tsource_id\tlabel\tpath")
        throw DataError(path.string() + ": bad manifest header");
    std::vector<ManifestRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        ManifestRow r;
        std::string label;
        if (!std::getline(ls, r.split, '\t') || !std::getline(ls, r.source_id, '\t') ||
            !std::getline(ls, label, '\t') || !std::getline(ls, r.path))
            throw DataError(path.string() + ": malformed manifest row: " + line);
        r.label = std::stoi(label);
        rows.push_back(std::move(r));
    }
    return rows;
}

std::vector<SerialSample> expand_serial(const ImageStack& stack) {
    std::vector<SerialSample> out;
    out.reserve(kNumSerial);
    for (const auto& st : enumerate_serial()) out.push_back({apply_serial(stack, st), st.label()});
    return out;
}

}  // namespace geonet
