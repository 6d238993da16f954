#pragma once

// Synthetic file corpus for exercising the pipeline without Govdocs1.
//
// Five classes, each a two-component Dirichlet mixture over byte-value
// distributions:
//
//   bin   zero-heavy binary (ELF-like header)      / zero-heavy with embedded strings
//   html  prose plus markup punctuation            / markup-dominated
//   pdf   half ASCII, half high-entropy ("%PDF-1") / quarter ASCII, rest high-entropy
//   txt   English-like prose                       / tabular numeric text
//   zip   uniform high-entropy ("PK" header)       / uniform with excess 0x00 and 0xFF
//
// A file is generated by picking a component with probability 1/2, drawing a
// byte distribution p ~ Dirichlet(concentration * profile), drawing a length
// uniformly in [min_bytes, max_bytes] and sampling that many bytes i.i.d.
// from p. Classes other than html and txt then get a fixed 6-byte magic
// header, so header obfuscation has something to remove.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace bytesort {

struct SyntheticSpec {
    std::size_t files_per_class = 400;
    std::size_t min_bytes = 512;
    std::size_t max_bytes = 4096;
    double concentration = 100.0;
    std::uint64_t seed = 7;
};

std::vector<std::string> synthetic_class_names();

// Normalized 256-bin profile of one mixture component (component 0 or 1).
std::vector<double> synthetic_profile(std::size_t cls, std::size_t component);

// Bytes of the i-th file of a class; deterministic in (spec.seed, cls, index).
std::vector<std::uint8_t> synthetic_file(const SyntheticSpec& spec, std::size_t cls, std::size_t index);

// Writes <class>_<index>.<class> files into dir (created if missing). Returns the file count.
std::size_t write_synthetic_corpus(const std::filesystem::path& dir, const SyntheticSpec& spec);

} // namespace bytesort
