#include "bytesort/baselines.hpp"
#include "bytesort/errors.hpp"
#include "oracles.hpp"
#include "support.hpp"

#include <doctest.h>

using namespace bytesort;

namespace {

Histogram point(std::initializer_list<double> head) {
    Histogram h;
    std::size_t i = 0;
    for (double v : head) h.bins[i++] = v;
    return h;
}

} // namespace

TEST_CASE("kNN agrees with the brute-force oracle") {
    Rng rng(31);
    for (int trial = 0; trial < 10; ++trial) {
        const std::size_t n = 5 + rng.below(120);
        const std::size_t classes = 2 + rng.below(5);
        std::vector<Histogram> pts;
        std::vector<std::size_t> labels;
        for (std::size_t i = 0; i < n; ++i) {
            pts.push_back(support::random_histogram(rng));
            labels.push_back(rng.below(classes));
        }
        // duplicates force distance ties
        pts.push_back(pts[0]);
        labels.push_back((labels[0] + 1) % classes);
        for (std::size_t k = 1; k <= kMaxK; ++k) {
            const KnnModel m(pts, labels, k);
            for (int q = 0; q < 20; ++q) {
                const Histogram query = q == 0 ? pts[0] : support::random_histogram(rng);
                CHECK(m.predict(query) == oracle::knn_brute_force(pts, labels, k, query));
            }
        }
    }
}

TEST_CASE("kNN tie rules") {
    SUBCASE("equal distances resolve by insertion order") {
        const std::vector<Histogram> pts{point({1.0}), point({0.0, 1.0})};
        const KnnModel m(pts, {1, 0}, 1);
        CHECK(m.predict(point({0.5, 0.5})) == 1);
    }
    SUBCASE("split vote goes to the class with smaller summed distance") {
        const std::vector<Histogram> pts{point({0.1}), point({0.3}), point({0.15}), point({0.32})};
        const KnnModel m(pts, {0, 0, 1, 1}, 4);
        // distances from 0: class 0 sums 0.4, class 1 sums 0.47
        CHECK(m.predict(point({0.0})) == 0);
    }
    SUBCASE("exact tie on both goes to the lower label") {
        const std::vector<Histogram> pts{point({0.2}), point({0.0, 0.2})};
        const KnnModel m(pts, {1, 0}, 2);
        CHECK(m.predict(point({})) == 0);
    }
}

TEST_CASE("kNN argument checks") {
    const std::vector<Histogram> pts{point({1.0})};
    CHECK_THROWS_AS(KnnModel(pts, {0}, 0), InvalidArgument);
    CHECK_THROWS_AS(KnnModel(pts, {0}, 7), InvalidArgument);
    CHECK_THROWS_AS(KnnModel(pts, {0, 1}, 1), DimensionError);
    CHECK_THROWS_AS(KnnModel(std::vector<Histogram>{}, {}, 1), EmptySupervisedSet);
}

TEST_CASE("1-NN and the unpruned tree both reproduce their training labels") {
    const Dataset d = support::synthetic_dataset(30);
    const KnnModel knn(d.samples, 1);
    const DecisionTree tree = tree_fit(d.samples, d.classes.size());
    for (const auto& s : d.samples) {
        CHECK(knn.predict(s.features) == s.label);
        CHECK(tree_predict(tree, s.features) == s.label);
    }
    CHECK(tree.leaf_count() >= d.classes.size());
}

TEST_CASE("tree splits at the Gini-optimal midpoint") {
    std::vector<LabeledSample> s(4);
    const double xs[] = {0.0, 0.1, 0.2, 0.3};
    const std::size_t ys[] = {0, 0, 1, 1};
    for (std::size_t i = 0; i < 4; ++i) {
        s[i].features.bins[3] = xs[i];
        s[i].label = ys[i];
    }
    const DecisionTree t = tree_fit(s, 2);
    REQUIRE(t.nodes.size() == 3);
    CHECK(t.nodes[0].feature == 3);
    CHECK(t.nodes[0].threshold == doctest::Approx(0.15));
    CHECK(t.depth() == 1);
    CHECK(t.leaf_count() == 2);
    CHECK(t.nodes[0].class_counts == std::vector<std::size_t>{2, 2});
}

TEST_CASE("tree leaf takes the majority when points coincide") {
    std::vector<LabeledSample> s(3);
    s[0].label = 1;
    s[1].label = 1;
    s[2].label = 0;
    const DecisionTree t = tree_fit(s, 2);
    CHECK(t.nodes.size() == 1);
    CHECK(t.depth() == 0);
    CHECK(tree_predict(t, Histogram{}) == 1);
}

TEST_CASE("standalone MLP learns the synthetic classes") {
    const DatasetSplit split = select_supervised(shuffle_split(support::synthetic_dataset(30), 2), 60, 5);
    TrainConfig cfg;
    cfg.max_epochs = 30;
    cfg.seed = 4;
    const auto a = train_mlp(split, cfg);
    const auto b = train_mlp(split, cfg);
    CHECK(a.classifier == b.classifier);
    CHECK(a.history.epochs.size() == 30);
    CHECK_FALSE(a.history.epochs[0].g_loss.has_value());
    CHECK(accuracy(a.classifier.net, split.test) >= 0.8);
    CHECK(a.classifier.net.parameter_count() == build_sgan(0, 5).trunk.parameter_count());
}
