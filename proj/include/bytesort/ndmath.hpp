#pragma once

// Dense-network math shared by the generator, the discriminator/classifier
// trunk and the standalone MLP: matrices, activations, dropout, reverse-mode
// gradients, log losses and Adam.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>
#include <vector>

namespace bytesort {

// Project-wide deterministic generator. Everything stochastic (init, shuffles,
// dropout masks, latent draws, subset selection) is driven by one of these.
// The engine is std::mt19937_64; the distributions are libstdc++'s, so
// streams are reproducible for a given seed on a given toolchain.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

    std::uint64_t seed() const noexcept { return seed_; }
    std::mt19937_64& engine() noexcept { return engine_; }

    double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }
    double uniform(double lo, double hi) {
        return std::uniform_real_distribution<double>(lo, hi)(engine_);
    }
    double normal() { return std::normal_distribution<double>(0.0, 1.0)(engine_); }
    bool bernoulli(double p) { return std::bernoulli_distribution(p)(engine_); }
    // Uniform index in [0, n). n must be > 0.
    std::size_t below(std::size_t n) {
        return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_);
    }

    template <class It>
    void shuffle(It first, It last) {
        std::shuffle(first, last, engine_);
    }

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
};

// Derives an independent child seed; splitmix64 finalizer over (parent, salt).
std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t salt) noexcept;

struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data; // row-major, rows * cols

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}
    static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);
    static Matrix row_vector(std::span<const double> values);

    double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

    std::span<double> row(std::size_t r) { return {data.data() + r * cols, cols}; }
    std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }

    std::size_t size() const noexcept { return data.size(); }
    bool empty() const noexcept { return data.empty(); }

    bool operator==(const Matrix&) const = default;
};

enum class Activation : std::uint8_t { linear = 0, relu = 1, sigmoid = 2, softmax = 3 };

const char* to_string(Activation a) noexcept;

double sigmoid(double z) noexcept;
std::vector<double> relu(std::span<const double> x);
std::vector<double> sigmoid(std::span<const double> z);
std::vector<double> softmax(std::span<const double> logits);
void softmax_inplace(std::span<double> logits) noexcept;

struct DenseLayer {
    Matrix weights;              // out x in
    std::vector<double> biases;  // out
    Activation activation = Activation::linear;
    double dropout_rate = 0.0;

    std::size_t in_dim() const noexcept { return weights.cols; }
    std::size_t out_dim() const noexcept { return weights.rows; }
    std::size_t parameter_count() const noexcept { return weights.size() + biases.size(); }

    bool operator==(const DenseLayer&) const = default;
};

enum class Mode : std::uint8_t { training, inference };

struct LayerSpec {
    std::size_t in = 0;
    std::size_t out = 0;
    Activation activation = Activation::linear;
    double dropout_rate = 0.0;
};

class DenseNet {
public:
    DenseNet() = default;
    // Validates the dimension chain, dropout range and softmax placement.
    explicit DenseNet(std::vector<DenseLayer> layers, Mode mode = Mode::training);

    // He-uniform for ReLU layers, Glorot-uniform otherwise, zero biases.
    static DenseNet build(std::span<const LayerSpec> specs, Rng& rng);

    const std::vector<DenseLayer>& layers() const noexcept { return layers_; }
    std::vector<DenseLayer>& layers() noexcept { return layers_; }
    Mode mode() const noexcept { return mode_; }
    void set_mode(Mode m) noexcept { mode_ = m; }

    std::size_t in_dim() const noexcept;
    std::size_t out_dim() const noexcept;
    std::size_t parameter_count() const noexcept;
    std::vector<LayerSpec> specs() const;

    bool operator==(const DenseNet&) const = default;

private:
    std::vector<DenseLayer> layers_;
    Mode mode_ = Mode::training;
};

struct LayerTrace {
    Matrix pre;   // affine output
    Matrix post;  // activation output, after dropout
    Matrix mask;  // dropout multipliers (0 or 1/(1-rate)); empty when no dropout was applied
};

struct Trace {
    Matrix input;
    std::vector<LayerTrace> layers;

    const Matrix& output() const { return layers.empty() ? input : layers.back().post; }
};

// One row per sample. Dropout masks come from rng only in training mode.
Trace forward(const DenseNet& net, const Matrix& input, Rng& rng);
Trace forward(const DenseNet& net, std::span<const double> input, Rng& rng);

// Inference-mode evaluation regardless of net.mode(); keeps no trace.
Matrix predict(const DenseNet& net, const Matrix& input);

struct LayerGrad {
    Matrix weights;
    std::vector<double> biases;
};

struct Gradients {
    std::vector<LayerGrad> layers; // empty when parameter gradients were not requested
    Matrix input;                  // d loss / d input
};

enum class GradAt : std::uint8_t {
    output,         // upstream gradient is w.r.t. the last layer's activation output
    pre_activation, // upstream gradient is w.r.t. the last layer's affine output
};

struct BackwardOptions {
    GradAt at = GradAt::output;
    bool parameter_grads = true;
};

Gradients backward(const DenseNet& net, const Trace& trace, const Matrix& upstream,
                   BackwardOptions options = {});

// Log losses. Probabilities are clamped to [kProbClamp, 1 - kProbClamp].
inline constexpr double kProbClamp = 1e-7;

double bce_loss(double p, int target);
// d bce / d p, evaluated at the clamped probability.
double bce_grad(double p, int target);

double cce_loss(std::span<const double> probs, std::size_t label);
// d cce / d logits when probs = softmax(logits): probs - one_hot(label).
std::vector<double> cce_logit_grad(std::span<const double> probs, std::size_t label);

struct AdamConfig {
    double lr = 0.0005;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

struct AdamState {
    AdamConfig config;
    std::uint64_t t = 0;
    std::vector<std::vector<double>> m;
    std::vector<std::vector<double>> v;

    static AdamState for_shapes(std::span<const std::size_t> sizes, AdamConfig config = {});
};

struct ParamBlock {
    std::span<double> values;
    std::span<const double> grads;
};

// One bias-corrected Adam update over every block; t is incremented first.
void adam_step(std::span<const ParamBlock> blocks, AdamState& state);

// Flattened parameter sizes of a net: weights then biases, per layer.
std::vector<std::size_t> parameter_shapes(const DenseNet& net);
// Pairs each parameter tensor of net with its gradient, in parameter_shapes order.
std::vector<ParamBlock> parameter_blocks(DenseNet& net, const Gradients& grads);

// Rounds every weight and bias to the nearest single-precision value.
void round_to_float(DenseNet& net) noexcept;

} // namespace bytesort
