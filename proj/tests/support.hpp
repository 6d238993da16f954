#pragma once

#include "bytesort/corpus.hpp"
#include "bytesort/features.hpp"
#include "bytesort/ndmath.hpp"
#include "bytesort/synthetic.hpp"

#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

namespace support {

namespace fs = std::filesystem;

class TempDir {
public:
    TempDir() {
        std::random_device rd;
        path_ = fs::temp_directory_path() / ("bytesort-test-" + std::to_string(rd()) + std::to_string(rd()));
        fs::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    const fs::path& path() const noexcept { return path_; }
    fs::path operator/(const std::string& name) const { return path_ / name; }

private:
    fs::path path_;
};

inline void write_file(const fs::path& p, const std::string& content) {
    fs::create_directories(p.parent_path());
    std::ofstream(p, std::ios::binary) << content;
}

inline std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

// In-memory dataset drawn from the synthetic generator, no files involved.
inline bytesort::Dataset synthetic_dataset(std::size_t per_class, std::uint64_t seed = 7) {
    bytesort::SyntheticSpec spec;
    spec.files_per_class = per_class;
    spec.seed = seed;
    bytesort::Dataset d;
    d.classes.names = bytesort::synthetic_class_names();
    for (std::size_t c = 0; c < d.classes.size(); ++c)
        for (std::size_t i = 0; i < per_class; ++i) {
            bytesort::LabeledSample s;
            s.features = bytesort::normalize(bytesort::byte_histogram(bytesort::synthetic_file(spec, c, i)));
            s.label = c;
            s.original_extension = d.classes.names[c];
            s.source_path = d.classes.names[c] + "_" + std::to_string(i) + "." + d.classes.names[c];
            d.samples.push_back(std::move(s));
        }
    return d;
}

inline bytesort::Histogram random_histogram(bytesort::Rng& rng) {
    bytesort::Histogram h;
    double s = 0.0;
    for (auto& b : h.bins) s += (b = rng.uniform());
    for (auto& b : h.bins) b /= s;
    return h;
}

} // namespace support
