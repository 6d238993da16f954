#pragma once

// Supervised comparison classifiers: a standalone MLP with the SGAN trunk's
// architecture, k-nearest neighbours and an unpruned CART decision tree.

#include "bytesort/classifier.hpp"
#include "bytesort/corpus.hpp"
#include "bytesort/sgan.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace bytesort {

struct MlpResult {
    Classifier classifier;
    TrainHistory history;
};

// Trains on the supervised subset only: each epoch is one reshuffled pass in
// batches of config.batch_size. Snapshots by whole-training-set accuracy.
MlpResult train_mlp(const DatasetSplit& split, const TrainConfig& config, const EpochObserver& observer = {});

inline constexpr std::size_t kMaxK = 6;

// Unweighted majority vote over the k nearest stored points (Euclidean).
// Vote ties go to the smaller summed distance, then the lower class index;
// equidistant points are taken in insertion order.
class KnnModel {
public:
    KnnModel(std::span<const LabeledSample> samples, std::size_t k);
    KnnModel(std::vector<Histogram> points, std::vector<std::size_t> labels, std::size_t k);

    std::size_t predict(const Histogram& h) const;

    std::size_t k() const noexcept { return k_; }
    const std::vector<Histogram>& points() const noexcept { return points_; }
    const std::vector<std::size_t>& labels() const noexcept { return labels_; }

    bool operator==(const KnnModel&) const = default;

private:
    std::vector<Histogram> points_;
    std::vector<std::size_t> labels_;
    std::size_t k_;
};

inline KnnModel knn_fit(std::span<const LabeledSample> samples, std::size_t k) { return KnnModel(samples, k); }
inline std::size_t knn_predict(const KnnModel& m, const Histogram& h) { return m.predict(h); }

// Flat CART tree. Node 0 is the root; children are indices into nodes.
struct TreeNode {
    static constexpr std::int32_t kLeaf = -1;

    std::int32_t feature = kLeaf; // kLeaf for leaves
    double threshold = 0.0;       // feature <= threshold goes left
    std::uint32_t left = 0;
    std::uint32_t right = 0;
    std::size_t label = 0;                 // majority label (leaves)
    std::vector<std::size_t> class_counts; // training samples reaching this node, per class

    bool is_leaf() const noexcept { return feature == kLeaf; }
    bool operator==(const TreeNode&) const = default;
};

struct DecisionTree {
    std::vector<TreeNode> nodes;
    std::size_t n_classes = 0;

    std::size_t depth() const; // edges on the longest root-to-leaf path
    std::size_t leaf_count() const;
    bool operator==(const DecisionTree&) const = default;
};

// Greedy Gini splits over midpoints of sorted distinct values, no depth limit.
// A node becomes a leaf when pure, when it holds fewer than two samples, or
// when no split lowers the weighted impurity.
DecisionTree tree_fit(std::span<const LabeledSample> samples, std::size_t n_classes);
std::size_t tree_predict(const DecisionTree& tree, const Histogram& h);

} // namespace bytesort
