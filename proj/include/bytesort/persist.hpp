#pragma once

// Model files.
//
// Layout, little-endian throughout:
//
//   "BSR1"                     magic
//   u16  version               (1)
//   u8   kind                  0 classifier, 1 sgan_full, 2 knn, 3 tree
//   u16  class count, then per class: u16 byte length + UTF-8 name
//   u16  network count         classifier 1; sgan_full 3 (trunk, disc head, generator); knn/tree 0
//   per network: u16 layer count, then per layer:
//        u32 in, u32 out, u8 activation (0 linear, 1 relu, 2 sigmoid, 3 softmax), f64 dropout rate
//   u64  declared parameter count (sum over networks of out*in + out)
//   f32  parameters: network-major, layer-major, weights (row-major out x in) then biases
//   kind-specific tail:
//        sgan_full  three Adam states (disc, cls, gen): u64 t, f64 lr, beta1, beta2, epsilon,
//                   then f32 first moments and f32 second moments in parameter order
//        knn        u32 k, u64 point count, per point: u16 label + 256 x f64 bins
//        tree       u32 class count, u32 node count, per node: i32 feature, f64 threshold,
//                   u32 left, u32 right, u16 label, u32 x class count per-class sample counts
//   32 bytes SHA-256 over every preceding byte
//
// Weights are stored in single precision. Trained classifiers are already
// rounded to single precision, so a save/load round trip reproduces their
// outputs bit for bit.

#include "bytesort/baselines.hpp"
#include "bytesort/classifier.hpp"
#include "bytesort/sgan.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <variant>
#include <vector>

namespace bytesort {

inline constexpr std::uint16_t kModelFormatVersion = 1;

enum class ModelKind : std::uint8_t { classifier = 0, sgan_full = 1, knn = 2, tree = 3 };

const char* to_string(ModelKind k) noexcept;

struct SganCheckpoint {
    SganModel model;
    SganOptimizers optimizers;
    ClassMap classes;

    // Weights and optimizer moments rounded to single precision.
    static SganCheckpoint from(const SganResult& result, const ClassMap& classes);
};

struct KnnClassifier {
    KnnModel model;
    ClassMap classes;
};

struct TreeClassifier {
    DecisionTree tree;
    ClassMap classes;
};

using Model = std::variant<Classifier, SganCheckpoint, KnnClassifier, TreeClassifier>;

ModelKind kind_of(const Model& m) noexcept;
const ClassMap& classes_of(const Model& m) noexcept;

// kNN and tree predictions carry one-hot probabilities; sgan_full classifies with its trunk.
Prediction predict(const Model& m, const Histogram& h);

std::vector<std::uint8_t> encode_model(const Model& m);
// Throws BadMagic, VersionUnsupported, HashMismatch or CountMismatch.
Model decode_model(std::span<const std::uint8_t> bytes);

void save_model(const Model& m, const std::filesystem::path& path);
Model load_model(const std::filesystem::path& path);

} // namespace bytesort
