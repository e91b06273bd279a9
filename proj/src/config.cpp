#include "geonet/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>

#include "geonet/error.hpp"

namespace geonet {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::size_t to_size(const std::string& key, std::string_view v) {
    std::size_t out = 0;
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size()) throw ConfigError(key + ": expected a non-negative integer, got '" + std::string(v) + "'");
    return out;
}

std::uint64_t to_u64(const std::string& key, std::string_view v) {
    std::uint64_t out = 0;
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size()) throw ConfigError(key + ": expected a non-negative integer, got '" + std::string(v) + "'");
    return out;
}

double to_double(const std::string& key, std::string_view v) {
    const std::string s(v);
    std::size_t used = 0;
    double out = 0.0;
    try {
        out = std::stod(s, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != s.size() || !std::isfinite(out)) throw ConfigError(key + ": expected a number, got '" + s + "'");
    return out;
}

bool to_bool(const std::string& key, std::string_view v) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError(key + ": expected true or false, got '" + std::string(v) + "'");
}

}  // namespace

TrainConfig parse_config(std::string_view text, const std::filesystem::path& base_dir) {
    TrainConfig cfg;
    using Setter = std::function<void(const std::string&, std::string_view)>;
    const std::map<std::string, Setter, std::less<>> setters{
        {"epochs", [&](auto& k, auto v) { cfg.epochs = to_size(k, v); }},
        {"batch_size", [&](auto& k, auto v) { cfg.batch_size = to_size(k, v); }},
        {"learning_rate", [&](auto& k, auto v) { cfg.learning_rate = to_double(k, v); }},
        {"input_size", [&](auto& k, auto v) { cfg.input_size = to_size(k, v); }},
        {"seed", [&](auto& k, auto v) { cfg.seed = to_u64(k, v); }},
        {"crop_fraction", [&](auto& k, auto v) { cfg.augment.crop_fraction = to_double(k, v); }},
        {"max_jitter_degrees", [&](auto& k, auto v) { cfg.augment.max_jitter_degrees = to_double(k, v); }},
        {"clahe", [&](auto& k, auto v) { cfg.prepare.equalize = to_bool(k, v); }},
        {"clahe_tile_rows", [&](auto& k, auto v) { cfg.prepare.clahe.tile_rows = to_size(k, v); }},
        {"clahe_tile_cols", [&](auto& k, auto v) { cfg.prepare.clahe.tile_cols = to_size(k, v); }},
        {"clahe_clip_limit", [&](auto& k, auto v) { cfg.prepare.clahe.clip_limit = to_double(k, v); }},
        {"ahe_order",
         [&](auto& k, auto v) {
             if (v == "before") cfg.prepare.order = AheOrder::BeforeExpansion;
             else if (v == "after") cfg.prepare.order = AheOrder::AfterExpansion;
             else throw ConfigError(k + ": expected before or after, got '" + std::string(v) + "'");
         }},
        {"data_dir",
         [&](auto& k, auto v) {
             if (v.empty()) throw ConfigError(k + ": empty path");
             std::filesystem::path p{std::string(v)};
             cfg.data_dir = p.is_relative() && !base_dir.empty() ? base_dir / p : p;
         }},
        {"synthetic_slices", [&](auto& k, auto v) { cfg.synthetic_slices = to_size(k, v); }},
        {"phantom_size", [&](auto& k, auto v) { cfg.phantom_size = to_size(k, v); }},
        {"extra_conv", [&](auto& k, auto v) { cfg.extra_conv = to_bool(k, v); }},
        {"workers",
         [&](auto& k, auto v) {
             const std::size_t n = to_size(k, v);
             if (n < 1 || n > 256) throw ConfigError(k + ": expected 1..256");
             cfg.workers = static_cast<int>(n);
         }},
    };

    std::set<std::string, std::less<>> seen;
    std::istringstream in{std::string(text)};
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string_view line = raw;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
        const std::string key(trim(line.substr(0, eq)));
        const std::string_view value = trim(line.substr(eq + 1));
        const auto it = setters.find(key);
        if (it == setters.end()) throw ConfigError("unknown config key '" + key + "'");
        if (!seen.insert(key).second) throw ConfigError("duplicate config key '" + key + "'");
        it->second(key, value);
    }
    cfg.validate();
    return cfg;
}

TrainConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read config " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path.parent_path());
}

}  // namespace geonet
