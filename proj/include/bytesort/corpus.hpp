#pragma once

#include "bytesort/features.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace bytesort {

struct LabeledSample {
    Histogram features;
    std::size_t label = 0;
    std::string source_path;         // relative to the ingest root, '/' separated
    std::string original_extension;  // lowercased, no leading dot

    bool operator==(const LabeledSample&) const = default;
};

// Class names sorted lexicographically; a label is an index into names.
struct ClassMap {
    std::vector<std::string> names;

    std::size_t size() const noexcept { return names.size(); }
    std::optional<std::size_t> index_of(std::string_view name) const;

    bool operator==(const ClassMap&) const = default;
};

struct Dataset {
    std::vector<LabeledSample> samples;
    ClassMap classes;
};

struct IngestFailure {
    std::string path;
    std::string reason;
};

struct IngestReport {
    std::size_t files_seen = 0;
    std::vector<std::pair<std::string, std::size_t>> removed_classes; // (extension, file count)
    std::vector<std::string> removed_files;
    std::vector<IngestFailure> failures; // unreadable, empty or extensionless files

    bool empty() const noexcept { return removed_classes.empty() && removed_files.empty() && failures.empty(); }
};

struct IngestResult {
    Dataset dataset;
    IngestReport report;
};

inline constexpr std::size_t kMinClassSize = 20;

// Lowercased extension without the dot; empty when the file name has none.
std::string extension_of(const std::filesystem::path& path);

// Featurizes every regular file under root (lexicographic path order) and
// drops classes with fewer than min_class_size files. Throws IoError when
// root is not a readable directory.
IngestResult ingest(const std::filesystem::path& root, std::size_t min_class_size = kMinClassSize);

struct DatasetSplit {
    std::vector<LabeledSample> train;
    std::vector<LabeledSample> test;
    std::vector<std::size_t> supervised_indices; // sorted indices into train
    std::uint64_t seed = 0;
    ClassMap classes;

    std::vector<LabeledSample> supervised() const;
};

// Seeded permutation; the first round(train_fraction * n) samples become the
// training set. Every training sample starts out supervised.
DatasetSplit shuffle_split(const Dataset& data, std::uint64_t seed, double train_fraction = 0.8);

// Stratified draw of n supervised training samples: floor(n / C) per class
// where available, the rest handed out one per class in random class order.
DatasetSplit select_supervised(DatasetSplit split, std::size_t n, std::uint64_t seed);

// Feature cache: CSV with header path,label,ext,b0..b255, 9 significant
// digits per bin and a trailing "#sha256:<hex>" line over all preceding bytes.
void save_features(const Dataset& data, const std::filesystem::path& path);
Dataset load_features(const std::filesystem::path& path);

std::array<std::uint8_t, 32> sha256(std::span<const std::uint8_t> bytes);
std::string to_hex(std::span<const std::uint8_t> bytes);

} // namespace bytesort
