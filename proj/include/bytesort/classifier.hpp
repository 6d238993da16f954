#pragma once

#include "bytesort/corpus.hpp"
#include "bytesort/ndmath.hpp"

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace bytesort {

// A logit network plus the class names its outputs refer to. Classification
// applies softmax over the final linear layer.
struct Classifier {
    DenseNet net;
    ClassMap classes;

    bool operator==(const Classifier&) const = default;
};

struct Prediction {
    std::size_t label = 0;
    std::vector<double> probabilities;
};

Prediction classify(const Classifier& clf, const Histogram& h);
// Batched inference; same results as calling classify per sample.
std::vector<Prediction> classify_all(const Classifier& clf, std::span<const LabeledSample> samples);

// Fraction of samples whose argmax logit equals the label (inference mode).
double accuracy(const DenseNet& net, std::span<const LabeledSample> samples);

Matrix feature_matrix(std::span<const LabeledSample> samples);

struct EpochRecord {
    std::size_t epoch = 0; // 1-based
    // Adversarial losses are absent for purely supervised training.
    std::optional<double> d_real_loss;
    double c_loss = 0.0;
    std::optional<double> d_fake_loss;
    std::optional<double> g_loss;
    double train_accuracy = 0.0;

    bool operator==(const EpochRecord&) const = default;
};

struct TrainHistory {
    std::vector<EpochRecord> epochs;
    std::size_t best_epoch = 0; // 0 = initial weights

    bool operator==(const TrainHistory&) const = default;
};

// Called after every epoch with the current logit network.
using EpochObserver = std::function<void(const EpochRecord&, const DenseNet&)>;

// Strict-improvement snapshot bookkeeping shared by the SGAN and the MLP.
class BestSnapshot {
public:
    explicit BestSnapshot(const DenseNet& initial) : best_(initial) {}

    void offer(const EpochRecord& rec, const DenseNet& net);
    std::size_t best_epoch() const noexcept { return best_epoch_; }
    // Best network rounded to single precision, in inference mode.
    DenseNet release() &&;

private:
    DenseNet best_;
    double best_accuracy_ = -1.0;
    std::size_t best_epoch_ = 0;
};

// Cycles through a fixed index set, reshuffling at every wrap.
class BatchStream {
public:
    BatchStream(std::vector<std::size_t> indices, Rng& rng);
    std::vector<std::size_t> next(std::size_t count);

private:
    std::vector<std::size_t> indices_;
    std::size_t pos_ = 0;
    Rng* rng_;
};

} // namespace bytesort
