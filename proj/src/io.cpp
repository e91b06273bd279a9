#include "geonet/io.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <system_error>

#include "geonet/error.hpp"
#include "geonet/parallel.hpp"

namespace geonet {

namespace {
std::atomic<int> g_workers{1};
}  // namespace

void set_num_workers(int n) { g_workers = std::max(1, n); }
int num_workers() { return g_workers; }

void write_file_atomic(const std::filesystem::path& path, std::span<const char> bytes) {
    namespace fs = std::filesystem;
    if (path.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(path.parent_path(), ec);
        if (ec) throw DataError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
    }
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw DataError("cannot open " + tmp.string() + " for writing");
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        out.flush();
        if (!out) {
            out.close();
            std::error_code ignored;
            fs::remove(tmp, ignored);
            throw DataError("write failed: " + path.string());
        }
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        std::error_code ignored;
        fs::remove(tmp, ignored);
        throw DataError("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
    }
}

void write_file_atomic(const std::filesystem::path& path, std::string_view text) {
    write_file_atomic(path, std::span<const char>(text.data(), text.size()));
}

}  // namespace geonet
