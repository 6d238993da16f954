#include "bytesort/errors.hpp"
#include "bytesort/ndmath.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <vector>

using namespace bytesort;
using doctest::Approx;

TEST_CASE("sigmoid and softmax match hand values") {
    CHECK(sigmoid(-2.0) == Approx(0.11920292202211755).epsilon(1e-12));
    CHECK(sigmoid(0.0) == 0.5);
    CHECK(sigmoid(-800.0) >= 0.0);
    CHECK(sigmoid(800.0) <= 1.0);

    const std::vector<double> z{1.0, 2.0, 3.0};
    const auto s = softmax(z);
    CHECK(s[0] == Approx(0.09003057317038046).epsilon(1e-12));
    CHECK(s[1] == Approx(0.24472847105479767).epsilon(1e-12));
    CHECK(s[2] == Approx(0.6652409557748219).epsilon(1e-12));

    // shift invariance, and no overflow for large logits
    const std::vector<double> big{1001.0, 1002.0, 1003.0};
    const auto sb = softmax(big);
    for (std::size_t i = 0; i < 3; ++i) CHECK(sb[i] == Approx(s[i]).epsilon(1e-12));
}

TEST_CASE("relu clips negatives") {
    const std::vector<double> x{-1.0, 0.0, 2.5};
    CHECK(relu(x) == std::vector<double>{0.0, 0.0, 2.5});
}

TEST_CASE("loss values and gradients") {
    CHECK(bce_loss(0.2, 0) == Approx(0.2231435513142097).epsilon(1e-12));
    CHECK(bce_loss(0.2, 1) == Approx(1.6094379124341003).epsilon(1e-12));
    CHECK(bce_grad(0.2, 0) == Approx(1.25));
    CHECK(bce_grad(0.2, 1) == Approx(-5.0));
    // clamped at 1e-7
    CHECK(bce_loss(0.0, 1) == Approx(-std::log(1e-7)));
    CHECK(std::isfinite(bce_loss(1.0, 0)));

    const std::vector<double> p{0.7, 0.2, 0.1};
    CHECK(cce_loss(p, 1) == Approx(1.6094379124341003).epsilon(1e-12));
    const auto g = cce_logit_grad(p, 1);
    CHECK(g[0] == Approx(0.7));
    CHECK(g[1] == Approx(-0.8));
    CHECK(g[2] == Approx(0.1));
    CHECK_THROWS_AS(cce_loss(p, 3), InvalidArgument);
}

TEST_CASE("network construction validates shapes") {
    Rng rng(1);
    const std::vector<LayerSpec> ok{{4, 3, Activation::relu, 0.3}, {3, 2, Activation::softmax, 0.0}};
    const DenseNet net = DenseNet::build(ok, rng);
    CHECK(net.in_dim() == 4);
    CHECK(net.out_dim() == 2);
    CHECK(net.parameter_count() == 4 * 3 + 3 + 3 * 2 + 2);
    for (const auto& l : net.layers())
        for (double b : l.biases) CHECK(b == 0.0);

    const std::vector<LayerSpec> gap{{4, 3, Activation::relu, 0.0}, {2, 2, Activation::linear, 0.0}};
    CHECK_THROWS_AS(DenseNet::build(gap, rng), DimensionError);
    const std::vector<LayerSpec> mid_softmax{{4, 3, Activation::softmax, 0.0}, {3, 2, Activation::linear, 0.0}};
    CHECK_THROWS_AS(DenseNet::build(mid_softmax, rng), InvalidArgument);
    const std::vector<LayerSpec> full_drop{{4, 3, Activation::relu, 1.0}};
    CHECK_THROWS_AS(DenseNet::build(full_drop, rng), InvalidArgument);

    Matrix wrong(1, 5);
    CHECK_THROWS_AS(forward(net, wrong, rng), DimensionError);
}

TEST_CASE("initialisation bounds: He for relu, Glorot otherwise") {
    Rng rng(3);
    const std::vector<LayerSpec> specs{{200, 100, Activation::relu, 0.0}, {100, 50, Activation::sigmoid, 0.0}};
    const DenseNet net = DenseNet::build(specs, rng);
    const double he = std::sqrt(6.0 / 200.0);
    const double glorot = std::sqrt(6.0 / 150.0);
    double max0 = 0.0, max1 = 0.0;
    for (double w : net.layers()[0].weights.data) max0 = std::max(max0, std::abs(w));
    for (double w : net.layers()[1].weights.data) max1 = std::max(max1, std::abs(w));
    CHECK(max0 <= he);
    CHECK(max0 > 0.95 * he);
    CHECK(max1 <= glorot);
    CHECK(max1 > 0.95 * glorot);
}

TEST_CASE("forward pass matches hand computation") {
    DenseLayer l1{Matrix::from_rows({{1.0, -1.0}, {0.5, 2.0}}), {0.0, -1.0}, Activation::relu, 0.0};
    DenseLayer l2{Matrix::from_rows({{2.0, -3.0}}), {0.5}, Activation::sigmoid, 0.0};
    DenseNet net({l1, l2});
    Rng rng(0);
    const std::vector<double> x{1.0, 2.0};
    const Trace t = forward(net, x, rng);
    // h = relu([1-2, 0.5+4-1]) = [0, 3.5]; out = sigmoid(-10.5 + 0.5)
    CHECK(t.layers[0].post(0, 0) == 0.0);
    CHECK(t.layers[0].post(0, 1) == Approx(3.5));
    CHECK(t.output()(0, 0) == Approx(sigmoid(-10.0)).epsilon(1e-12));
    CHECK(predict(net, Matrix::row_vector(x)) == t.output());
}

TEST_CASE("dropout keeps 1 - rate of units and rescales them") {
    const std::size_t n = 100000;
    DenseLayer l{Matrix(n, 1, 1.0), std::vector<double>(n, 0.0), Activation::linear, 0.3};
    DenseNet net({l});
    Rng rng(11);
    const Trace t = forward(net, std::vector<double>{1.0}, rng);
    std::size_t kept = 0;
    for (double v : t.output().data) {
        if (v != 0.0) {
            ++kept;
            CHECK(v == Approx(1.0 / 0.7).epsilon(1e-12));
        }
    }
    const double mean = 0.7 * n;
    const double sigma = std::sqrt(n * 0.7 * 0.3);
    CHECK(std::abs(static_cast<double>(kept) - mean) <= 3.0 * sigma);

    net.set_mode(Mode::inference);
    const Trace ti = forward(net, std::vector<double>{1.0}, rng);
    CHECK(ti.layers[0].mask.empty());
    for (double v : ti.output().data) CHECK(v == 1.0);
}

TEST_CASE("backward agrees with central differences on random nets") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto r = oracle::random_net_gradient_check(1000 + seed);
        CAPTURE(seed);
        CHECK(r.checked > 0);
        CHECK(r.max_rel_error <= 1e-4);
    }
}

TEST_CASE("backward through dropout uses the recorded mask") {
    Rng rng(5);
    const std::vector<LayerSpec> specs{{3, 4, Activation::relu, 0.5}, {4, 2, Activation::linear, 0.0}};
    DenseNet net = DenseNet::build(specs, rng);
    Matrix x = Matrix::from_rows({{0.3, -0.2, 0.9}});
    Matrix c = Matrix::from_rows({{1.0, -2.0}});
    Rng fwd(99);
    const Trace t = forward(net, x, fwd);
    const Gradients g = backward(net, t, c);
    // Same masks on every evaluation: replay the generator state.
    auto f = [&]() {
        Rng r(99);
        const Trace tt = forward(net, x, r);
        return tt.output()(0, 0) * 1.0 - 2.0 * tt.output()(0, 1);
    };
    const double h = 1e-6;
    for (std::size_t i = 0; i < net.layers()[0].weights.size(); ++i) {
        double& w = net.layers()[0].weights.data[i];
        const double w0 = w;
        w = w0 + h;
        const double fp = f();
        w = w0 - h;
        const double fm = f();
        w = w0;
        CHECK(g.layers[0].weights.data[i] == Approx((fp - fm) / (2 * h)).epsilon(1e-6));
    }
}

TEST_CASE("softmax output layer gradient at pre-activation equals p - y") {
    DenseLayer l{Matrix::from_rows({{1.0, 0.0}, {0.0, 1.0}, {1.0, 1.0}}), {0.0, 0.0, 0.0}, Activation::softmax, 0.0};
    DenseNet net({l});
    Rng rng(0);
    const Trace t = forward(net, std::vector<double>{0.2, -0.4}, rng);
    const auto p = t.output().row(0);
    const auto g = cce_logit_grad(p, 2);
    Matrix up(1, 3);
    std::copy(g.begin(), g.end(), up.data.begin());
    const Gradients pre = backward(net, t, up, {.at = GradAt::pre_activation});
    // d/dx of CCE = W^T (p - y)
    CHECK(pre.input(0, 0) == Approx(g[0] + g[2]));
    CHECK(pre.input(0, 1) == Approx(g[1] + g[2]));
    CHECK(pre.layers[0].biases[0] == Approx(g[0]));
}

TEST_CASE("Adam matches two hand-unrolled steps") {
    AdamConfig cfg;
    std::vector<double> w{1.0, -0.5, 0.0};
    const std::vector<double> g1{0.5, -2.0, 1e-3};
    const std::vector<double> g2{-0.25, 1.0, 3e-3};
    const std::size_t sizes[] = {3};
    AdamState st = AdamState::for_shapes(sizes, cfg);

    const ParamBlock b1[] = {{w, g1}};
    adam_step(b1, st);
    CHECK(st.t == 1);
    for (std::size_t i = 0; i < 3; ++i) {
        const auto o = oracle::adam_two_steps(std::vector<double>{1.0, -0.5, 0.0}[i], g1[i], g2[i], cfg);
        CHECK(std::abs(w[i] - o.after_first) <= 1e-12);
    }
    CHECK(w[0] == Approx(0.9995).epsilon(1e-6));

    const ParamBlock b2[] = {{w, g2}};
    adam_step(b2, st);
    CHECK(st.t == 2);
    for (std::size_t i = 0; i < 3; ++i) {
        const auto o = oracle::adam_two_steps(std::vector<double>{1.0, -0.5, 0.0}[i], g1[i], g2[i], cfg);
        CHECK(std::abs(w[i] - o.after_second) <= 1e-12);
    }

    const std::vector<double> short_grad{1.0};
    const ParamBlock bad[] = {{w, short_grad}};
    CHECK_THROWS_AS(adam_step(bad, st), DimensionError);
}

TEST_CASE("round_to_float is idempotent and lands on float values") {
    Rng rng(8);
    const std::vector<LayerSpec> specs{{5, 4, Activation::relu, 0.0}};
    DenseNet net = DenseNet::build(specs, rng);
    round_to_float(net);
    const DenseNet once = net;
    round_to_float(net);
    CHECK(net == once);
    for (double w : net.layers()[0].weights.data) CHECK(static_cast<double>(static_cast<float>(w)) == w);
}

TEST_CASE("derive_seed separates streams") {
    CHECK(derive_seed(42, 1) != derive_seed(42, 2));
    CHECK(derive_seed(42, 1) != derive_seed(43, 1));
    CHECK(derive_seed(42, 1) == derive_seed(42, 1));
}
