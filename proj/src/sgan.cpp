#include "bytesort/sgan.hpp"

#include "bytesort/errors.hpp"

#include <cmath>

namespace bytesort {

std::vector<LayerSpec> trunk_specs(std::size_t n_classes) {
    return {
        {kBins, 512, Activation::relu, kDropoutRate},
        {512, 256, Activation::relu, kDropoutRate},
        {256, 128, Activation::relu, kDropoutRate},
        {128, 64, Activation::relu, kDropoutRate},
        {64, n_classes, Activation::linear, 0.0},
    };
}

std::vector<LayerSpec> generator_specs() {
    // The 256-unit ReLU layer feeds the sigmoid output directly, without dropout.
    return {
        {kLatentDim, 32, Activation::relu, kDropoutRate},
        {32, 64, Activation::relu, kDropoutRate},
        {64, 128, Activation::relu, kDropoutRate},
        {128, 256, Activation::relu, 0.0},
        {256, kBins, Activation::sigmoid, 0.0},
    };
}

SganModel build_sgan(std::uint64_t seed, std::size_t n_classes) {
    if (n_classes < 2) throw InvalidArgument("need at least two classes");
    Rng rng(seed);
    SganModel m;
    const auto ts = trunk_specs(n_classes);
    m.trunk = DenseNet::build(ts, rng);
    const LayerSpec head{n_classes, 1, Activation::sigmoid, 0.0};
    m.disc_head = DenseNet::build(std::span(&head, 1), rng);
    const auto gs = generator_specs();
    m.gen = DenseNet::build(gs, rng);
    return m;
}

Matrix sample_latent(Rng& rng, std::size_t batch) {
    Matrix z(batch, kLatentDim);
    for (double& v : z.data) v = rng.normal();
    return z;
}

SganOptimizers SganOptimizers::for_model(const SganModel& m, double lr_dc, double lr_g) {
    auto disc_shapes = parameter_shapes(m.trunk);
    const auto head_shapes = parameter_shapes(m.disc_head);
    disc_shapes.insert(disc_shapes.end(), head_shapes.begin(), head_shapes.end());
    const auto trunk_shapes = parameter_shapes(m.trunk);
    const auto gen_shapes = parameter_shapes(m.gen);
    return {
        AdamState::for_shapes(disc_shapes, AdamConfig{.lr = lr_dc}),
        AdamState::for_shapes(trunk_shapes, AdamConfig{.lr = lr_dc}),
        AdamState::for_shapes(gen_shapes, AdamConfig{.lr = lr_g}),
    };
}

void TrainConfig::validate() const {
    if (batch_size < 2 || batch_size % 2 != 0) throw InvalidArgument("batch size must be even and >= 2");
    if (latent_dim != kLatentDim) throw InvalidArgument("latent dimension is fixed at 100");
    if (!(lr_dc > 0.0) || !(lr_g > 0.0)) throw InvalidArgument("learning rates must be positive");
}

// ---------------------------------------------------------------------------
// Step kernels

DiscriminatorPass discriminator_pass(const DenseNet& trunk, const DenseNet& head, const Matrix& real,
                                     const Matrix& fake, Rng& rng) {
    if (real.cols != fake.cols) throw DimensionError("real and fake batches differ in width");
    Matrix input(real.rows + fake.rows, real.cols);
    std::copy(real.data.begin(), real.data.end(), input.data.begin());
    std::copy(fake.data.begin(), fake.data.end(), input.data.begin() + static_cast<std::ptrdiff_t>(real.size()));

    const Trace t_trunk = forward(trunk, input, rng);
    const Trace t_head = forward(head, t_trunk.output(), rng);
    const Matrix& p = t_head.output();

    const double n = static_cast<double>(input.rows);
    DiscriminatorPass out;
    Matrix dz(input.rows, 1);
    for (std::size_t i = 0; i < input.rows; ++i) {
        const int y = i < real.rows ? 1 : 0;
        const double pi = p(i, 0);
        (y ? out.real_loss : out.fake_loss) += bce_loss(pi, y);
        // sigmoid + BCE folded: d loss / d z = p - y.
        dz(i, 0) = (pi - y) / n;
    }
    if (real.rows) out.real_loss /= static_cast<double>(real.rows);
    if (fake.rows) out.fake_loss /= static_cast<double>(fake.rows);

    out.head = backward(head, t_head, dz, {.at = GradAt::pre_activation});
    out.trunk = backward(trunk, t_trunk, out.head.input);
    return out;
}

ClassifierPass classifier_pass(const DenseNet& trunk, const Matrix& inputs, std::span<const std::size_t> labels,
                               Rng& rng) {
    if (labels.size() != inputs.rows) throw DimensionError("label count does not match batch");
    const Trace t = forward(trunk, inputs, rng);
    const Matrix& logits = t.output();
    const double n = static_cast<double>(inputs.rows);
    ClassifierPass out;
    Matrix dz(inputs.rows, logits.cols);
    for (std::size_t i = 0; i < inputs.rows; ++i) {
        const auto probs = softmax(logits.row(i));
        out.loss += cce_loss(probs, labels[i]);
        const auto g = cce_logit_grad(probs, labels[i]);
        for (std::size_t c = 0; c < g.size(); ++c) dz(i, c) = g[c] / n;
    }
    out.loss /= n;
    out.trunk = backward(trunk, t, dz, {.at = GradAt::pre_activation});
    return out;
}

GeneratorPass generator_pass(const SganModel& model, const Matrix& latents, Rng& rng) {
    const Trace t_gen = forward(model.gen, latents, rng);
    const Trace t_trunk = forward(model.trunk, t_gen.output(), rng);
    const Trace t_head = forward(model.disc_head, t_trunk.output(), rng);
    const Matrix& p = t_head.output();

    const double n = static_cast<double>(latents.rows);
    GeneratorPass out;
    Matrix dz(latents.rows, 1);
    for (std::size_t i = 0; i < latents.rows; ++i) {
        out.loss += bce_loss(p(i, 0), 1);
        dz(i, 0) = (p(i, 0) - 1.0) / n;
    }
    out.loss /= n;

    const BackwardOptions frozen{.at = GradAt::output, .parameter_grads = false};
    const Gradients g_head = backward(model.disc_head, t_head, dz, {.at = GradAt::pre_activation, .parameter_grads = false});
    const Gradients g_trunk = backward(model.trunk, t_trunk, g_head.input, frozen);
    out.gen = backward(model.gen, t_gen, g_trunk.input);
    return out;
}

// ---------------------------------------------------------------------------
// Trainer

namespace {

std::vector<std::size_t> train_indices(const DatasetSplit& split) {
    if (split.train.empty()) throw EmptySupervisedSet("empty training set");
    std::vector<std::size_t> v(split.train.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = i;
    return v;
}

const std::vector<std::size_t>& checked_supervised(const DatasetSplit& split) {
    if (split.supervised_indices.empty()) throw EmptySupervisedSet("no supervised samples in split");
    return split.supervised_indices;
}

Matrix gather(const std::vector<LabeledSample>& samples, std::span<const std::size_t> idx) {
    Matrix m(idx.size(), kBins);
    for (std::size_t i = 0; i < idx.size(); ++i) {
        const auto& b = samples[idx[i]].features.bins;
        std::copy(b.begin(), b.end(), m.row(i).begin());
    }
    return m;
}

constexpr std::uint64_t kTrainerSalt = 0x53474E;

} // namespace

SganTrainer::SganTrainer(SganModel model, const DatasetSplit& split, TrainConfig config)
    : model_(std::move(model)),
      split_(&split),
      config_((config.validate(), config)),
      rng_(derive_seed(config.seed, kTrainerSalt)),
      opt_(SganOptimizers::for_model(model_, config.lr_dc, config.lr_g)),
      real_stream_(train_indices(split), rng_),
      sup_stream_(checked_supervised(split), rng_) {
    if (model_.trunk.in_dim() != kBins || model_.gen.in_dim() != config_.latent_dim)
        throw DimensionError("model does not match histogram or latent width");
    model_.trunk.set_mode(Mode::training);
    model_.disc_head.set_mode(Mode::training);
    model_.gen.set_mode(Mode::training);
}

void SganTrainer::discriminator_step() {
    const std::size_t half = config_.batch_size / 2;
    const auto idx = real_stream_.next(half);
    const Matrix real = gather(split_->train, idx);
    const Matrix fake = forward(model_.gen, sample_latent(rng_, half), rng_).output();

    const DiscriminatorPass pass = discriminator_pass(model_.trunk, model_.disc_head, real, fake, rng_);
    auto blocks = parameter_blocks(model_.trunk, pass.trunk);
    const auto head_blocks = parameter_blocks(model_.disc_head, pass.head);
    blocks.insert(blocks.end(), head_blocks.begin(), head_blocks.end());
    adam_step(blocks, opt_.disc);
    sum_d_real_ += pass.real_loss;
    sum_d_fake_ += pass.fake_loss;
}

void SganTrainer::classifier_step() {
    const auto idx = sup_stream_.next(config_.batch_size);
    const Matrix x = gather(split_->train, idx);
    std::vector<std::size_t> labels(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) labels[i] = split_->train[idx[i]].label;

    const ClassifierPass pass = classifier_pass(model_.trunk, x, labels, rng_);
    adam_step(parameter_blocks(model_.trunk, pass.trunk), opt_.cls);
    sum_c_ += pass.loss;
}

void SganTrainer::generator_step() {
    const GeneratorPass pass = generator_pass(model_, sample_latent(rng_, config_.batch_size), rng_);
    adam_step(parameter_blocks(model_.gen, pass.gen), opt_.gen);
    sum_g_ += pass.loss;
}

EpochRecord SganTrainer::train_epoch() {
    const std::size_t n = split_->train.size();
    const std::size_t batches = (n + config_.batch_size - 1) / config_.batch_size;
    sum_d_real_ = sum_d_fake_ = sum_c_ = sum_g_ = 0.0;
    for (std::size_t b = 0; b < batches; ++b) {
        discriminator_step();
        classifier_step();
        generator_step();
    }
    ++epoch_;
    const double nb = static_cast<double>(batches);
    EpochRecord rec;
    rec.epoch = epoch_;
    rec.d_real_loss = sum_d_real_ / nb;
    rec.c_loss = sum_c_ / nb;
    rec.d_fake_loss = sum_d_fake_ / nb;
    rec.g_loss = sum_g_ / nb;
    rec.train_accuracy = accuracy(model_.trunk, split_->train);
    return rec;
}

SganResult train_sgan(const DatasetSplit& split, const TrainConfig& config, const EpochObserver& observer) {
    return train_sgan(build_sgan(config.seed, split.classes.size()), split, config, observer);
}

SganResult train_sgan(SganModel model, const DatasetSplit& split, const TrainConfig& config,
                      const EpochObserver& observer) {
    SganTrainer trainer(std::move(model), split, config);
    BestSnapshot best(trainer.model().trunk);
    SganResult result;
    for (std::size_t e = 0; e < config.max_epochs; ++e) {
        const EpochRecord rec = trainer.train_epoch();
        result.history.epochs.push_back(rec);
        best.offer(rec, trainer.model().trunk);
        if (observer) observer(rec, trainer.model().trunk);
    }
    result.history.best_epoch = best.best_epoch();
    result.classifier = Classifier{std::move(best).release(), split.classes};
    result.final_model = trainer.model();
    result.final_optimizers = trainer.optimizers();
    return result;
}

} // namespace bytesort
