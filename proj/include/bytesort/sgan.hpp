#pragma once

// Semi-supervised GAN for byte-histogram classification.
//
// The discriminator and the classifier share one trunk that maps a 256-bin
// histogram to class logits. The classifier head is a softmax over those
// logits; the discriminator head is a single sigmoid unit fed by the logits.
// The generator maps 100-d standard-normal noise to a 256-d vector in (0,1).
//
// Every batch runs three optimizer steps in order:
//   D-step  half real (any training sample) / half generated, BCE, updates trunk + head
//   C-step  one batch of labeled samples, categorical CE, updates trunk
//   G-step  one batch of noise, non-saturating BCE against "real", updates generator only

#include "bytesort/classifier.hpp"
#include "bytesort/corpus.hpp"
#include "bytesort/ndmath.hpp"

#include <cstddef>
#include <cstdint>
#include <vector>

namespace bytesort {

inline constexpr std::size_t kLatentDim = 100;
inline constexpr double kDropoutRate = 0.3;

struct SganModel {
    DenseNet trunk;     // 256-512-256-128-64-C logits
    DenseNet disc_head; // C-1 sigmoid
    DenseNet gen;       // 100-32-64-128-256-256 sigmoid

    std::size_t parameter_count() const noexcept {
        return trunk.parameter_count() + disc_head.parameter_count() + gen.parameter_count();
    }
    bool operator==(const SganModel&) const = default;
};

std::vector<LayerSpec> trunk_specs(std::size_t n_classes);
std::vector<LayerSpec> generator_specs();

SganModel build_sgan(std::uint64_t seed, std::size_t n_classes = 11);

// batch x 100 matrix of i.i.d. standard normals.
Matrix sample_latent(Rng& rng, std::size_t batch);

struct SganOptimizers {
    AdamState disc; // trunk + disc_head
    AdamState cls;  // trunk
    AdamState gen;  // gen

    static SganOptimizers for_model(const SganModel& m, double lr_dc, double lr_g);
};

struct TrainConfig {
    std::size_t batch_size = 32;
    std::size_t max_epochs = 300;
    double lr_dc = 0.0005;
    double lr_g = 0.0005;
    std::size_t latent_dim = kLatentDim;
    std::uint64_t seed = 42;

    void validate() const; // throws InvalidArgument
};

// Loss/gradient kernels for one step each; exposed for testing.
struct DiscriminatorPass {
    double real_loss = 0.0; // mean BCE over the real rows
    double fake_loss = 0.0; // mean BCE over the generated rows
    Gradients trunk;
    Gradients head;
};
// Loss is the mean BCE over all rows (real target 1, fake target 0).
DiscriminatorPass discriminator_pass(const DenseNet& trunk, const DenseNet& head, const Matrix& real,
                                     const Matrix& fake, Rng& rng);

struct ClassifierPass {
    double loss = 0.0;
    Gradients trunk;
};
ClassifierPass classifier_pass(const DenseNet& trunk, const Matrix& inputs, std::span<const std::size_t> labels,
                               Rng& rng);

struct GeneratorPass {
    double loss = 0.0;
    Gradients gen;
};
// Trunk and head gradients are not formed; only the generator is trained.
GeneratorPass generator_pass(const SganModel& model, const Matrix& latents, Rng& rng);

// Owns the mutable training state for one run.
class SganTrainer {
public:
    // split must outlive the trainer.
    SganTrainer(SganModel model, const DatasetSplit& split, TrainConfig config);
    SganTrainer(const SganTrainer&) = delete;
    SganTrainer& operator=(const SganTrainer&) = delete;

    // Runs one epoch of ceil(|train| / batch) batches. The record's accuracy
    // is over the whole training set in inference mode.
    EpochRecord train_epoch();

    void discriminator_step();
    void classifier_step();
    void generator_step();

    const SganModel& model() const noexcept { return model_; }
    const SganOptimizers& optimizers() const noexcept { return opt_; }
    std::size_t epochs_done() const noexcept { return epoch_; }

private:
    SganModel model_;
    const DatasetSplit* split_;
    TrainConfig config_;
    Rng rng_;
    SganOptimizers opt_;
    BatchStream real_stream_;
    BatchStream sup_stream_;
    std::size_t epoch_ = 0;

    // Running sums over the current epoch's batches.
    double sum_d_real_ = 0.0, sum_d_fake_ = 0.0, sum_c_ = 0.0, sum_g_ = 0.0;
};

struct SganResult {
    Classifier classifier; // best-by-train-accuracy trunk, single precision, inference mode
    TrainHistory history;
    SganModel final_model;
    SganOptimizers final_optimizers;
};

// Throws EmptySupervisedSet when the split has no labeled samples.
SganResult train_sgan(const DatasetSplit& split, const TrainConfig& config, const EpochObserver& observer = {});
SganResult train_sgan(SganModel model, const DatasetSplit& split, const TrainConfig& config,
                      const EpochObserver& observer = {});

} // namespace bytesort
