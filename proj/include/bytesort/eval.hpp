#pragma once

#include "bytesort/classifier.hpp"
#include "bytesort/corpus.hpp"
#include "bytesort/sgan.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace bytesort {

// counts[true][predicted].
struct ConfusionMatrix {
    std::vector<std::vector<std::size_t>> counts;
    ClassMap classes;

    explicit ConfusionMatrix(ClassMap classes = {});

    void add(std::size_t truth, std::size_t predicted);
    std::size_t total() const noexcept;
    std::size_t correct() const noexcept;
    double accuracy() const noexcept;
    std::size_t row_sum(std::size_t truth) const noexcept;
    // NaN for a class with no test samples.
    double recall(std::size_t truth) const noexcept;

    bool operator==(const ConfusionMatrix&) const = default;
};

struct EvalResult {
    double accuracy = 0.0;
    ConfusionMatrix confusion;
    std::vector<std::size_t> predictions;
};

using ClassifyFn = std::function<std::size_t(const Histogram&)>;

// Throws InvalidArgument on an empty test set.
EvalResult evaluate(const ClassifyFn& classify_fn, std::span<const LabeledSample> test, const ClassMap& classes);
EvalResult evaluate(const Classifier& clf, std::span<const LabeledSample> test);

// ---------------------------------------------------------------------------
// Label-budget sweep

enum class Algorithm : std::uint8_t { sgan = 0, mlp = 1, tree = 2, knn = 3 };

const char* to_string(Algorithm a) noexcept;
Algorithm algorithm_from_string(std::string_view name); // throws InvalidArgument

struct SweepConfig {
    std::vector<std::size_t> budgets{2288, 1144, 500, 100, 50};
    std::vector<Algorithm> algorithms{Algorithm::sgan, Algorithm::mlp, Algorithm::tree, Algorithm::knn};
    std::vector<std::size_t> knn_ks{1, 2, 3, 4, 5, 6};
    std::size_t replicates = 1;
    std::uint64_t master_seed = 42;
    TrainConfig train; // seed is overridden per cell
};

struct SweepResult {
    std::vector<std::size_t> budgets;
    std::vector<std::string> columns;            // sgan, mlp, tree, knn_k1 ...
    std::vector<std::vector<double>> median;      // [budget][column]
    std::vector<std::vector<std::vector<double>>> runs; // [budget][column][replicate]
    std::vector<std::uint64_t> subset_seeds;      // [budget * replicates + replicate]
    std::vector<std::pair<std::string, TrainHistory>> histories;
    std::vector<std::pair<std::string, ConfusionMatrix>> confusions;
};

// Seed of one training run: derived from master seed, budget, algorithm and replicate.
std::uint64_t cell_seed(std::uint64_t master, std::size_t budget, Algorithm algo, std::size_t replicate) noexcept;
// Seed of the supervised-subset draw shared by every algorithm of a (budget, replicate).
std::uint64_t subset_seed(std::uint64_t master, std::size_t budget, std::size_t replicate) noexcept;

double median(std::vector<double> values);

// Every cell is evaluated on split.test. Budgets must lie in [1, |train|].
SweepResult run_sweep(const DatasetSplit& split, const SweepConfig& config);

// ---------------------------------------------------------------------------
// Header obfuscation

inline constexpr std::array<std::uint8_t, 6> kObfuscatedHeader{0xAA, 0xBB, 0xCC, 0xDD, 0xEE, 0xFF};

// xml, html and txt carry no magic header and are left untouched.
bool header_exempt(std::string_view extension) noexcept;

// Overwrites bytes[0..6) with AA BB CC DD EE FF. Throws FileTooShort.
void overwrite_header(std::span<std::uint8_t> bytes);

struct PerturbResult {
    std::vector<LabeledSample> samples;   // perturbed features, same order as input minus skipped
    std::vector<std::size_t> kept;        // input index of each entry in samples
    std::vector<IngestFailure> skipped;   // files shorter than six bytes
};

// Re-featurizes non-exempt samples from source_root / source_path with the
// first six bytes replaced in memory. Files on disk are never modified.
PerturbResult perturb_headers(std::span<const LabeledSample> test, const std::filesystem::path& source_root);

struct RobustnessReport {
    double original_accuracy = 0.0;
    double perturbed_accuracy = 0.0;
    std::size_t compared = 0;
    std::size_t skipped = 0;
    ConfusionMatrix perturbed_confusion;

    double delta() const noexcept { return perturbed_accuracy - original_accuracy; }
};

// Accuracy on the original and perturbed versions of the same kept samples.
RobustnessReport header_robustness(const ClassifyFn& classify_fn, std::span<const LabeledSample> test,
                                   const PerturbResult& perturbed, const ClassMap& classes);

struct PerturbationEpoch {
    std::size_t epoch = 0;
    double original_accuracy = 0.0;
    double perturbed_accuracy = 0.0;
};

// Observer that records original vs perturbed test accuracy after every epoch.
EpochObserver perturbation_tracker(std::vector<LabeledSample> original, std::vector<LabeledSample> perturbed,
                                   std::vector<PerturbationEpoch>& out);

// ---------------------------------------------------------------------------
// Reports (UTF-8, LF line endings)

void write_sweep_csv(const SweepResult& sweep, const std::filesystem::path& path);
// Row-normalized percentages followed by the raw counts.
void write_confusion_csv(const ConfusionMatrix& cm, const std::filesystem::path& path);
void write_history_csv(const TrainHistory& history, const std::filesystem::path& path);

// Writes sweep.csv, confusion_<tag>.csv and history_<tag>.csv; returns the paths written.
std::vector<std::filesystem::path> render_reports(const SweepResult& sweep,
                                                  std::span<const std::pair<std::string, ConfusionMatrix>> confusions,
                                                  const std::filesystem::path& out_dir);

} // namespace bytesort
