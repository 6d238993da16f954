#include "bytesort/classifier.hpp"

#include "bytesort/errors.hpp"

#include <algorithm>

namespace bytesort {

namespace {
constexpr std::size_t kEvalChunk = 256;

std::size_t argmax(std::span<const double> v) {
    return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}
} // namespace

Matrix feature_matrix(std::span<const LabeledSample> samples) {
    Matrix m(samples.size(), kBins);
    for (std::size_t i = 0; i < samples.size(); ++i)
        std::copy(samples[i].features.bins.begin(), samples[i].features.bins.end(), m.row(i).begin());
    return m;
}

Prediction classify(const Classifier& clf, const Histogram& h) {
    Matrix logits = predict(clf.net, Matrix::row_vector(h.bins));
    Prediction p;
    p.probabilities = softmax(logits.row(0));
    p.label = argmax(p.probabilities);
    return p;
}

std::vector<Prediction> classify_all(const Classifier& clf, std::span<const LabeledSample> samples) {
    std::vector<Prediction> out;
    out.reserve(samples.size());
    for (std::size_t start = 0; start < samples.size(); start += kEvalChunk) {
        const auto chunk = samples.subspan(start, std::min(kEvalChunk, samples.size() - start));
        Matrix logits = predict(clf.net, feature_matrix(chunk));
        for (std::size_t i = 0; i < chunk.size(); ++i) {
            Prediction p;
            p.probabilities = softmax(logits.row(i));
            p.label = argmax(p.probabilities);
            out.push_back(std::move(p));
        }
    }
    return out;
}

double accuracy(const DenseNet& net, std::span<const LabeledSample> samples) {
    if (samples.empty()) return 0.0;
    std::size_t correct = 0;
    for (std::size_t start = 0; start < samples.size(); start += kEvalChunk) {
        const auto chunk = samples.subspan(start, std::min(kEvalChunk, samples.size() - start));
        Matrix logits = predict(net, feature_matrix(chunk));
        for (std::size_t i = 0; i < chunk.size(); ++i)
            if (argmax(logits.row(i)) == chunk[i].label) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(samples.size());
}

void BestSnapshot::offer(const EpochRecord& rec, const DenseNet& net) {
    if (rec.train_accuracy > best_accuracy_) {
        best_accuracy_ = rec.train_accuracy;
        best_epoch_ = rec.epoch;
        best_ = net;
    }
}

DenseNet BestSnapshot::release() && {
    round_to_float(best_);
    best_.set_mode(Mode::inference);
    return std::move(best_);
}

BatchStream::BatchStream(std::vector<std::size_t> indices, Rng& rng) : indices_(std::move(indices)), rng_(&rng) {
    if (indices_.empty()) throw InvalidArgument("batch stream over an empty set");
    rng_->shuffle(indices_.begin(), indices_.end());
}

std::vector<std::size_t> BatchStream::next(std::size_t count) {
    std::vector<std::size_t> out;
    out.reserve(count);
    while (out.size() < count) {
        if (pos_ == indices_.size()) {
            rng_->shuffle(indices_.begin(), indices_.end());
            pos_ = 0;
        }
        out.push_back(indices_[pos_++]);
    }
    return out;
}

} // namespace bytesort
