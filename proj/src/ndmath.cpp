#include "bytesort/ndmath.hpp"

#include "bytesort/errors.hpp"

#include <cmath>
#include <string>

namespace bytesort {

std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t salt) noexcept {
    std::uint64_t z = parent + 0x9E3779B97F4A7C15ULL * (salt + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    Matrix m;
    m.rows = rows.size();
    m.cols = rows.size() ? rows.begin()->size() : 0;
    m.data.reserve(m.rows * m.cols);
    for (const auto& r : rows) {
        if (r.size() != m.cols) throw DimensionError("ragged matrix literal");
        m.data.insert(m.data.end(), r.begin(), r.end());
    }
    return m;
}

Matrix Matrix::row_vector(std::span<const double> values) {
    Matrix m(1, values.size());
    std::copy(values.begin(), values.end(), m.data.begin());
    return m;
}

const char* to_string(Activation a) noexcept {
    switch (a) {
    case Activation::linear: return "linear";
    case Activation::relu: return "relu";
    case Activation::sigmoid: return "sigmoid";
    case Activation::softmax: return "softmax";
    }
    return "?";
}

double sigmoid(double z) noexcept {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

std::vector<double> relu(std::span<const double> x) {
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] > 0.0 ? x[i] : 0.0;
    return out;
}

std::vector<double> sigmoid(std::span<const double> z) {
    std::vector<double> out(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) out[i] = sigmoid(z[i]);
    return out;
}

void softmax_inplace(std::span<double> logits) noexcept {
    if (logits.empty()) return;
    const double mx = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (double& l : logits) {
        l = std::exp(l - mx);
        sum += l;
    }
    for (double& l : logits) l /= sum;
}

std::vector<double> softmax(std::span<const double> logits) {
    std::vector<double> out(logits.begin(), logits.end());
    softmax_inplace(out);
    return out;
}

// ---------------------------------------------------------------------------
// DenseNet

DenseNet::DenseNet(std::vector<DenseLayer> layers, Mode mode) : layers_(std::move(layers)), mode_(mode) {
    for (std::size_t k = 0; k < layers_.size(); ++k) {
        const auto& l = layers_[k];
        if (l.biases.size() != l.out_dim())
            throw DimensionError("layer " + std::to_string(k) + ": bias length != out dim");
        if (!(l.dropout_rate >= 0.0 && l.dropout_rate < 1.0))
            throw InvalidArgument("layer " + std::to_string(k) + ": dropout rate must be in [0,1)");
        if (l.activation == Activation::softmax && k + 1 != layers_.size())
            throw InvalidArgument("softmax is only allowed on the output layer");
        if (k > 0 && layers_[k - 1].out_dim() != l.in_dim())
            throw DimensionError("layer " + std::to_string(k) + ": in dim does not chain");
    }
}

DenseNet DenseNet::build(std::span<const LayerSpec> specs, Rng& rng) {
    std::vector<DenseLayer> layers;
    layers.reserve(specs.size());
    for (const auto& s : specs) {
        DenseLayer l;
        l.weights = Matrix(s.out, s.in);
        l.biases.assign(s.out, 0.0);
        l.activation = s.activation;
        l.dropout_rate = s.dropout_rate;
        const double fan_in = static_cast<double>(s.in);
        const double fan_out = static_cast<double>(s.out);
        const double limit = s.activation == Activation::relu ? std::sqrt(6.0 / fan_in)
                                                              : std::sqrt(6.0 / (fan_in + fan_out));
        for (double& w : l.weights.data) w = rng.uniform(-limit, limit);
        layers.push_back(std::move(l));
    }
    return DenseNet(std::move(layers));
}

std::size_t DenseNet::in_dim() const noexcept { return layers_.empty() ? 0 : layers_.front().in_dim(); }
std::size_t DenseNet::out_dim() const noexcept { return layers_.empty() ? 0 : layers_.back().out_dim(); }

std::size_t DenseNet::parameter_count() const noexcept {
    std::size_t n = 0;
    for (const auto& l : layers_) n += l.out_dim() * l.in_dim() + l.out_dim();
    return n;
}

std::vector<LayerSpec> DenseNet::specs() const {
    std::vector<LayerSpec> out;
    for (const auto& l : layers_) out.push_back({l.in_dim(), l.out_dim(), l.activation, l.dropout_rate});
    return out;
}

// ---------------------------------------------------------------------------
// Forward / backward

namespace {

// z = a * W^T + b. W is transposed once so the inner loop is a contiguous axpy.
void affine(const Matrix& a, const DenseLayer& layer, Matrix& z) {
    const std::size_t in = layer.in_dim();
    const std::size_t out = layer.out_dim();
    std::vector<double> wt(in * out);
    for (std::size_t o = 0; o < out; ++o)
        for (std::size_t k = 0; k < in; ++k) wt[k * out + o] = layer.weights.data[o * in + k];

    z = Matrix(a.rows, out);
    for (std::size_t i = 0; i < a.rows; ++i) {
        double* zi = z.data.data() + i * out;
        std::copy(layer.biases.begin(), layer.biases.end(), zi);
        const double* ai = a.data.data() + i * in;
        for (std::size_t k = 0; k < in; ++k) {
            const double aik = ai[k];
            if (aik == 0.0) continue;
            const double* w = wt.data() + k * out;
            for (std::size_t o = 0; o < out; ++o) zi[o] += aik * w[o];
        }
    }
}

void activate(Activation act, const Matrix& pre, Matrix& post) {
    post = pre;
    switch (act) {
    case Activation::linear: break;
    case Activation::relu:
        for (double& x : post.data) x = x > 0.0 ? x : 0.0;
        break;
    case Activation::sigmoid:
        for (double& x : post.data) x = sigmoid(x);
        break;
    case Activation::softmax:
        for (std::size_t i = 0; i < post.rows; ++i) softmax_inplace(post.row(i));
        break;
    }
}

void check_input(const DenseNet& net, const Matrix& input) {
    if (net.layers().empty()) throw DimensionError("network has no layers");
    if (input.cols != net.in_dim())
        throw DimensionError("input width " + std::to_string(input.cols) + " != network input " +
                             std::to_string(net.in_dim()));
}

// Multiplies g in place by the activation derivative at pre.
void activation_backward(Activation act, const Matrix& pre, Matrix& g) {
    switch (act) {
    case Activation::linear: break;
    case Activation::relu:
        for (std::size_t i = 0; i < g.size(); ++i)
            if (!(pre.data[i] > 0.0)) g.data[i] = 0.0;
        break;
    case Activation::sigmoid:
        for (std::size_t i = 0; i < g.size(); ++i) {
            const double s = sigmoid(pre.data[i]);
            g.data[i] *= s * (1.0 - s);
        }
        break;
    case Activation::softmax:
        for (std::size_t r = 0; r < g.rows; ++r) {
            auto s = softmax(pre.row(r));
            auto gr = g.row(r);
            double dot = 0.0;
            for (std::size_t c = 0; c < s.size(); ++c) dot += gr[c] * s[c];
            for (std::size_t c = 0; c < s.size(); ++c) gr[c] = s[c] * (gr[c] - dot);
        }
        break;
    }
}

} // namespace

Trace forward(const DenseNet& net, const Matrix& input, Rng& rng) {
    check_input(net, input);
    Trace trace;
    trace.input = input;
    trace.layers.resize(net.layers().size());
    const bool training = net.mode() == Mode::training;
    const Matrix* a = &trace.input;
    for (std::size_t k = 0; k < net.layers().size(); ++k) {
        const auto& layer = net.layers()[k];
        auto& lt = trace.layers[k];
        affine(*a, layer, lt.pre);
        activate(layer.activation, lt.pre, lt.post);
        if (training && layer.dropout_rate > 0.0) {
            const double keep = 1.0 - layer.dropout_rate;
            const double scale = 1.0 / keep;
            lt.mask = Matrix(lt.post.rows, lt.post.cols);
            for (std::size_t i = 0; i < lt.mask.size(); ++i) {
                lt.mask.data[i] = rng.bernoulli(keep) ? scale : 0.0;
                lt.post.data[i] *= lt.mask.data[i];
            }
        }
        a = &lt.post;
    }
    return trace;
}

Trace forward(const DenseNet& net, std::span<const double> input, Rng& rng) {
    return forward(net, Matrix::row_vector(input), rng);
}

Matrix predict(const DenseNet& net, const Matrix& input) {
    check_input(net, input);
    Matrix a = input;
    Matrix z;
    for (const auto& layer : net.layers()) {
        affine(a, layer, z);
        activate(layer.activation, z, a);
    }
    return a;
}

Gradients backward(const DenseNet& net, const Trace& trace, const Matrix& upstream, BackwardOptions options) {
    const auto& layers = net.layers();
    if (trace.layers.size() != layers.size() || layers.empty())
        throw DimensionError("trace does not match network depth");
    if (trace.input.cols != net.in_dim()) throw DimensionError("trace input does not match network");
    for (std::size_t k = 0; k < layers.size(); ++k) {
        const auto& lt = trace.layers[k];
        if (lt.pre.cols != layers[k].out_dim() || lt.pre.rows != trace.input.rows)
            throw DimensionError("trace layer " + std::to_string(k) + " does not match network");
    }
    const std::size_t batch = trace.input.rows;
    if (upstream.rows != batch || upstream.cols != net.out_dim())
        throw DimensionError("upstream gradient shape does not match network output");

    Gradients grads;
    if (options.parameter_grads) grads.layers.resize(layers.size());

    Matrix g = upstream;
    for (std::size_t idx = layers.size(); idx-- > 0;) {
        const auto& layer = layers[idx];
        const auto& lt = trace.layers[idx];
        const bool skip_activation = idx + 1 == layers.size() && options.at == GradAt::pre_activation;
        if (!skip_activation) {
            if (!lt.mask.empty())
                for (std::size_t i = 0; i < g.size(); ++i) g.data[i] *= lt.mask.data[i];
            activation_backward(layer.activation, lt.pre, g);
        }
        const Matrix& a_prev = idx == 0 ? trace.input : trace.layers[idx - 1].post;
        const std::size_t in = layer.in_dim();
        const std::size_t out = layer.out_dim();

        if (options.parameter_grads) {
            auto& lg = grads.layers[idx];
            lg.weights = Matrix(out, in);
            lg.biases.assign(out, 0.0);
            for (std::size_t i = 0; i < batch; ++i) {
                const double* gi = g.data.data() + i * out;
                const double* ai = a_prev.data.data() + i * in;
                for (std::size_t o = 0; o < out; ++o) {
                    const double d = gi[o];
                    if (d == 0.0) continue;
                    lg.biases[o] += d;
                    double* w = lg.weights.data.data() + o * in;
                    for (std::size_t c = 0; c < in; ++c) w[c] += d * ai[c];
                }
            }
        }

        Matrix prev(batch, in);
        for (std::size_t i = 0; i < batch; ++i) {
            const double* gi = g.data.data() + i * out;
            double* pi = prev.data.data() + i * in;
            for (std::size_t o = 0; o < out; ++o) {
                const double d = gi[o];
                if (d == 0.0) continue;
                const double* w = layer.weights.data.data() + o * in;
                for (std::size_t c = 0; c < in; ++c) pi[c] += d * w[c];
            }
        }
        g = std::move(prev);
    }
    grads.input = std::move(g);
    return grads;
}

// ---------------------------------------------------------------------------
// Losses

namespace {
double clamp_prob(double p) { return std::clamp(p, kProbClamp, 1.0 - kProbClamp); }
} // namespace

double bce_loss(double p, int target) {
    const double q = clamp_prob(p);
    return target ? -std::log(q) : -std::log(1.0 - q);
}

double bce_grad(double p, int target) {
    const double q = clamp_prob(p);
    return target ? -1.0 / q : 1.0 / (1.0 - q);
}

double cce_loss(std::span<const double> probs, std::size_t label) {
    if (label >= probs.size()) throw InvalidArgument("label " + std::to_string(label) + " out of range");
    return -std::log(clamp_prob(probs[label]));
}

std::vector<double> cce_logit_grad(std::span<const double> probs, std::size_t label) {
    if (label >= probs.size()) throw InvalidArgument("label " + std::to_string(label) + " out of range");
    std::vector<double> g(probs.begin(), probs.end());
    g[label] -= 1.0;
    return g;
}

// ---------------------------------------------------------------------------
// Adam

AdamState AdamState::for_shapes(std::span<const std::size_t> sizes, AdamConfig config) {
    AdamState s;
    s.config = config;
    for (std::size_t n : sizes) {
        s.m.emplace_back(n, 0.0);
        s.v.emplace_back(n, 0.0);
    }
    return s;
}

void adam_step(std::span<const ParamBlock> blocks, AdamState& state) {
    if (blocks.size() != state.m.size()) throw DimensionError("parameter block count does not match optimizer");
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        if (blocks[b].values.size() != state.m[b].size() || blocks[b].grads.size() != state.m[b].size())
            throw DimensionError("parameter block " + std::to_string(b) + " shape mismatch");
    }
    const auto& c = state.config;
    state.t += 1;
    const double t = static_cast<double>(state.t);
    const double bc1 = 1.0 - std::pow(c.beta1, t);
    const double bc2 = 1.0 - std::pow(c.beta2, t);
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        auto& m = state.m[b];
        auto& v = state.v[b];
        auto values = blocks[b].values;
        auto grads = blocks[b].grads;
        for (std::size_t i = 0; i < values.size(); ++i) {
            const double g = grads[i];
            m[i] = c.beta1 * m[i] + (1.0 - c.beta1) * g;
            v[i] = c.beta2 * v[i] + (1.0 - c.beta2) * g * g;
            const double mhat = m[i] / bc1;
            const double vhat = v[i] / bc2;
            values[i] -= c.lr * mhat / (std::sqrt(vhat) + c.epsilon);
        }
    }
}

std::vector<std::size_t> parameter_shapes(const DenseNet& net) {
    std::vector<std::size_t> out;
    for (const auto& l : net.layers()) {
        out.push_back(l.weights.size());
        out.push_back(l.biases.size());
    }
    return out;
}

std::vector<ParamBlock> parameter_blocks(DenseNet& net, const Gradients& grads) {
    if (grads.layers.size() != net.layers().size()) throw DimensionError("gradients do not match network");
    std::vector<ParamBlock> out;
    for (std::size_t k = 0; k < net.layers().size(); ++k) {
        auto& l = net.layers()[k];
        out.push_back({l.weights.data, grads.layers[k].weights.data});
        out.push_back({l.biases, grads.layers[k].biases});
    }
    return out;
}

void round_to_float(DenseNet& net) noexcept {
    for (auto& l : net.layers()) {
        for (double& w : l.weights.data) w = static_cast<double>(static_cast<float>(w));
        for (double& b : l.biases) b = static_cast<double>(static_cast<float>(b));
    }
}

} // namespace bytesort
