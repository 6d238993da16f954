#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>

namespace bytesort {

inline constexpr std::size_t kBins = 256;

struct RawHistogram {
    std::array<std::uint64_t, kBins> counts{};
    std::uint64_t total_bytes = 0;

    // Adds bytes to the running counts (chunked reads call this repeatedly).
    void accumulate(std::span<const std::uint8_t> bytes) noexcept;

    bool operator==(const RawHistogram&) const = default;
};

// Byte-value distribution; bins sum to 1.
struct Histogram {
    std::array<double, kBins> bins{};

    bool operator==(const Histogram&) const = default;
};

// Throws EmptyFile on zero-length input.
RawHistogram byte_histogram(std::span<const std::uint8_t> bytes);
Histogram normalize(const RawHistogram& raw);

// Streams the whole file in fixed-size chunks. Throws IoError or EmptyFile.
RawHistogram byte_histogram_file(const std::filesystem::path& path);
Histogram featurize_file(const std::filesystem::path& path);

} // namespace bytesort
