#include "bytesort/features.hpp"

#include "bytesort/errors.hpp"

#include <fstream>
#include <vector>

namespace bytesort {

namespace {
constexpr std::size_t kChunkSize = 1 << 16;
}

void RawHistogram::accumulate(std::span<const std::uint8_t> bytes) noexcept {
    for (std::uint8_t b : bytes) ++counts[b];
    total_bytes += bytes.size();
}

RawHistogram byte_histogram(std::span<const std::uint8_t> bytes) {
    if (bytes.empty()) throw EmptyFile("empty input");
    RawHistogram raw;
    raw.accumulate(bytes);
    return raw;
}

Histogram normalize(const RawHistogram& raw) {
    if (raw.total_bytes == 0) throw EmptyFile("histogram of zero bytes");
    Histogram h;
    const double total = static_cast<double>(raw.total_bytes);
    for (std::size_t v = 0; v < kBins; ++v) h.bins[v] = static_cast<double>(raw.counts[v]) / total;
    return h;
}

RawHistogram byte_histogram_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    RawHistogram raw;
    std::vector<std::uint8_t> buf(kChunkSize);
    while (in) {
        in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
        const auto got = static_cast<std::size_t>(in.gcount());
        if (got == 0) break;
        raw.accumulate({buf.data(), got});
    }
    if (in.bad()) throw IoError("read failed: " + path.string());
    if (raw.total_bytes == 0) throw EmptyFile("empty file: " + path.string());
    return raw;
}

Histogram featurize_file(const std::filesystem::path& path) { return normalize(byte_histogram_file(path)); }

} // namespace bytesort
