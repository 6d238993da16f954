#include "bytesort/baselines.hpp"

#include "bytesort/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace bytesort {

// ---------------------------------------------------------------------------
// Standalone MLP

namespace {
constexpr std::uint64_t kMlpSalt = 0x4D4C50;
}

MlpResult train_mlp(const DatasetSplit& split, const TrainConfig& config, const EpochObserver& observer) {
    config.validate();
    if (split.supervised_indices.empty()) throw EmptySupervisedSet("no supervised samples in split");

    Rng init(config.seed);
    const auto specs = trunk_specs(split.classes.size());
    DenseNet net = DenseNet::build(specs, init);
    AdamState opt = AdamState::for_shapes(parameter_shapes(net), AdamConfig{.lr = config.lr_dc});
    Rng rng(derive_seed(config.seed, kMlpSalt));

    std::vector<std::size_t> order = split.supervised_indices;
    BestSnapshot best(net);
    MlpResult result;
    for (std::size_t e = 1; e <= config.max_epochs; ++e) {
        net.set_mode(Mode::training);
        rng.shuffle(order.begin(), order.end());
        double loss_sum = 0.0;
        std::size_t batches = 0;
        for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
            const std::size_t n = std::min(config.batch_size, order.size() - start);
            Matrix x(n, kBins);
            std::vector<std::size_t> labels(n);
            for (std::size_t i = 0; i < n; ++i) {
                const auto& s = split.train[order[start + i]];
                std::copy(s.features.bins.begin(), s.features.bins.end(), x.row(i).begin());
                labels[i] = s.label;
            }
            const ClassifierPass pass = classifier_pass(net, x, labels, rng);
            adam_step(parameter_blocks(net, pass.trunk), opt);
            loss_sum += pass.loss;
            ++batches;
        }
        EpochRecord rec;
        rec.epoch = e;
        rec.c_loss = loss_sum / static_cast<double>(batches);
        rec.train_accuracy = accuracy(net, split.train);
        result.history.epochs.push_back(rec);
        best.offer(rec, net);
        if (observer) observer(rec, net);
    }
    result.history.best_epoch = best.best_epoch();
    result.classifier = Classifier{std::move(best).release(), split.classes};
    return result;
}

// ---------------------------------------------------------------------------
// k-nearest neighbours

KnnModel::KnnModel(std::span<const LabeledSample> samples, std::size_t k) : k_(k) {
    points_.reserve(samples.size());
    labels_.reserve(samples.size());
    for (const auto& s : samples) {
        points_.push_back(s.features);
        labels_.push_back(s.label);
    }
    if (points_.empty()) throw EmptySupervisedSet("kNN needs at least one stored sample");
    if (k_ < 1 || k_ > kMaxK) throw InvalidArgument("k must be in [1, 6]");
}

KnnModel::KnnModel(std::vector<Histogram> points, std::vector<std::size_t> labels, std::size_t k)
    : points_(std::move(points)), labels_(std::move(labels)), k_(k) {
    if (points_.empty()) throw EmptySupervisedSet("kNN needs at least one stored sample");
    if (points_.size() != labels_.size()) throw DimensionError("kNN points and labels differ in length");
    if (k_ < 1 || k_ > kMaxK) throw InvalidArgument("k must be in [1, 6]");
}

std::size_t KnnModel::predict(const Histogram& h) const {
    // (squared distance, insertion index) of the k best so far, kept sorted.
    std::vector<std::pair<double, std::size_t>> best;
    best.reserve(k_ + 1);
    for (std::size_t i = 0; i < points_.size(); ++i) {
        double d2 = 0.0;
        const auto& p = points_[i].bins;
        for (std::size_t b = 0; b < kBins; ++b) {
            const double d = p[b] - h.bins[b];
            d2 += d * d;
        }
        if (best.size() == k_ && !(d2 < best.back().first)) continue;
        const std::pair<double, std::size_t> entry{d2, i};
        best.insert(std::upper_bound(best.begin(), best.end(), entry), entry);
        if (best.size() > k_) best.pop_back();
    }

    std::size_t n_classes = 0;
    for (const auto& [d2, i] : best) n_classes = std::max(n_classes, labels_[i] + 1);
    std::vector<std::size_t> votes(n_classes, 0);
    std::vector<double> dist(n_classes, 0.0);
    for (const auto& [d2, i] : best) {
        ++votes[labels_[i]];
        dist[labels_[i]] += std::sqrt(d2);
    }
    std::size_t winner = 0;
    for (std::size_t c = 1; c < n_classes; ++c) {
        if (votes[c] > votes[winner] || (votes[c] == votes[winner] && votes[c] > 0 && dist[c] < dist[winner]))
            winner = c;
    }
    return winner;
}

// ---------------------------------------------------------------------------
// CART

namespace {

double gini(const std::vector<std::size_t>& counts, std::size_t total) {
    if (total == 0) return 0.0;
    double sum_sq = 0.0;
    const double t = static_cast<double>(total);
    for (std::size_t c : counts) {
        const double p = static_cast<double>(c) / t;
        sum_sq += p * p;
    }
    return 1.0 - sum_sq;
}

std::size_t majority(const std::vector<std::size_t>& counts) {
    return static_cast<std::size_t>(std::max_element(counts.begin(), counts.end()) - counts.begin());
}

struct Split {
    std::int32_t feature = TreeNode::kLeaf;
    double threshold = 0.0;
    double impurity = 0.0; // weighted child impurity
};

constexpr double kMinGain = 1e-12;

Split best_split(std::span<const LabeledSample> samples, const std::vector<std::size_t>& idx,
                 const std::vector<std::size_t>& counts, std::size_t n_classes) {
    const std::size_t n = idx.size();
    const double parent = gini(counts, n);
    Split best;
    best.impurity = parent - kMinGain;

    std::vector<std::pair<double, std::size_t>> column(n); // (value, label)
    std::vector<std::size_t> left(n_classes), right(n_classes);
    for (std::size_t f = 0; f < kBins; ++f) {
        for (std::size_t i = 0; i < n; ++i) column[i] = {samples[idx[i]].features.bins[f], samples[idx[i]].label};
        std::sort(column.begin(), column.end());
        if (column.front().first == column.back().first) continue;
        std::fill(left.begin(), left.end(), 0);
        right = counts;
        for (std::size_t i = 0; i + 1 < n; ++i) {
            ++left[column[i].second];
            --right[column[i].second];
            const double a = column[i].first;
            const double b = column[i + 1].first;
            if (a == b) continue;
            const std::size_t nl = i + 1;
            const std::size_t nr = n - nl;
            const double w = (static_cast<double>(nl) * gini(left, nl) + static_cast<double>(nr) * gini(right, nr)) /
                             static_cast<double>(n);
            if (w < best.impurity) {
                double mid = a + (b - a) / 2.0;
                if (!(mid < b)) mid = a;
                best = {static_cast<std::int32_t>(f), mid, w};
            }
        }
    }
    return best;
}

} // namespace

DecisionTree tree_fit(std::span<const LabeledSample> samples, std::size_t n_classes) {
    if (samples.empty()) throw EmptySupervisedSet("decision tree needs at least one sample");
    for (const auto& s : samples) n_classes = std::max(n_classes, s.label + 1);

    DecisionTree tree;
    tree.n_classes = n_classes;

    struct Pending {
        std::uint32_t node;
        std::vector<std::size_t> idx;
    };
    std::vector<Pending> stack;
    std::vector<std::size_t> all(samples.size());
    std::iota(all.begin(), all.end(), 0);
    tree.nodes.emplace_back();
    stack.push_back({0, std::move(all)});

    while (!stack.empty()) {
        Pending job = std::move(stack.back());
        stack.pop_back();

        std::vector<std::size_t> counts(n_classes, 0);
        for (std::size_t i : job.idx) ++counts[samples[i].label];
        {
            auto& node = tree.nodes[job.node];
            node.class_counts = counts;
            node.label = majority(counts);
        }
        const bool pure = std::count_if(counts.begin(), counts.end(), [](std::size_t c) { return c > 0; }) <= 1;
        if (pure || job.idx.size() < 2) continue;

        const Split split = best_split(samples, job.idx, counts, n_classes);
        if (split.feature == TreeNode::kLeaf) continue;

        std::vector<std::size_t> li, ri;
        for (std::size_t i : job.idx)
            (samples[i].features.bins[static_cast<std::size_t>(split.feature)] <= split.threshold ? li : ri).push_back(i);

        const auto l = static_cast<std::uint32_t>(tree.nodes.size());
        tree.nodes.emplace_back();
        const auto r = static_cast<std::uint32_t>(tree.nodes.size());
        tree.nodes.emplace_back();
        auto& node = tree.nodes[job.node];
        node.feature = split.feature;
        node.threshold = split.threshold;
        node.left = l;
        node.right = r;
        stack.push_back({r, std::move(ri)});
        stack.push_back({l, std::move(li)});
    }
    return tree;
}

std::size_t tree_predict(const DecisionTree& tree, const Histogram& h) {
    if (tree.nodes.empty()) throw InvalidArgument("empty decision tree");
    std::size_t at = 0;
    while (!tree.nodes[at].is_leaf()) {
        const auto& n = tree.nodes[at];
        at = h.bins[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
    }
    return tree.nodes[at].label;
}

std::size_t DecisionTree::depth() const {
    if (nodes.empty()) return 0;
    std::size_t deepest = 0;
    std::vector<std::pair<std::size_t, std::size_t>> stack{{0, 0}};
    while (!stack.empty()) {
        auto [at, d] = stack.back();
        stack.pop_back();
        deepest = std::max(deepest, d);
        if (!nodes[at].is_leaf()) {
            stack.emplace_back(nodes[at].left, d + 1);
            stack.emplace_back(nodes[at].right, d + 1);
        }
    }
    return deepest;
}

std::size_t DecisionTree::leaf_count() const {
    return static_cast<std::size_t>(std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.is_leaf(); }));
}

} // namespace bytesort
