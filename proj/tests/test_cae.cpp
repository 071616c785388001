#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "gridrep/cae/model.hpp"
#include "gridrep/error.hpp"
#include "oracles.hpp"

using namespace gridrep;
using namespace gridrep::cae;

namespace {

Tensor4 random_tensor(std::size_t n, std::size_t c, std::size_t h, std::size_t w, SeededRng& rng, double lo = -1.0,
                      double hi = 1.0) {
    Tensor4 t(n, c, h, w);
    for (double& v : t.values) v = rng.uniform(lo, hi);
    return t;
}

std::vector<double> random_vector(std::size_t n, SeededRng& rng) {
    std::vector<double> v(n);
    for (double& x : v) x = rng.uniform(-1.0, 1.0);
    return v;
}

double inner(const std::vector<double>& a, const std::vector<double>& b) {
    long double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += static_cast<long double>(a[i]) * b[i];
    return static_cast<double>(s);
}

double max_rel(const std::vector<double>& a, const std::vector<double>& b, double floor) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = std::abs(a[i] - b[i]) / std::max({std::abs(a[i]), std::abs(b[i]), floor});
        worst = std::max(worst, d);
    }
    return worst;
}

// Smooth scene in [0, 1] so training has structure to learn.
Tensor4 blob_frames(std::size_t n, std::size_t res, SeededRng& rng) {
    Tensor4 t(n, 1, res, res);
    for (std::size_t i = 0; i < n; ++i) {
        const double cx = rng.uniform(0.3, 0.7), cy = rng.uniform(0.3, 0.7), amp = rng.uniform(0.4, 0.9);
        auto s = t.sample(i);
        for (std::size_t r = 0; r < res; ++r)
            for (std::size_t c = 0; c < res; ++c) {
                const double dx = (c + 0.5) / res - cx, dy = (r + 0.5) / res - cy;
                s[r * res + c] = 0.05 + amp * std::exp(-(dx * dx + dy * dy) / 0.03);
            }
    }
    return t;
}

Architecture tiny_arch(std::vector<std::size_t> channels) {
    Architecture a;
    a.resolution = 8;
    a.latent_dim = 4;
    a.channels = std::move(channels);
    return a;
}

}  // namespace

TEST_CASE("conv2d hand cases") {
    Tensor4 x(1, 1, 3, 3, 1.0);
    auto s = LayerSpec::conv(1, 1, 3, 1, 0);
    Tensor4 y = conv2d(x, s, std::vector<double>(9, 1.0), std::vector<double>{0.0});
    CHECK(y.shape_string() == "(1,1,1,1)");
    CHECK(y.values[0] == 9.0);

    SeededRng rng(3);
    Tensor4 r = random_tensor(2, 1, 4, 5, rng);
    auto id = LayerSpec::conv(1, 1, 1, 1, 0);
    CHECK(conv2d(r, id, std::vector<double>{1.0}, std::vector<double>{0.0}) == r);
    auto idt = LayerSpec::conv_transpose(1, 1, 1, 1, 0);
    CHECK(conv_transpose2d(r, idt, std::vector<double>{1.0}, std::vector<double>{0.0}) == r);

    // Padding 1 with a 3x3 ones kernel counts in-bounds neighbours.
    Tensor4 z = conv2d(x, LayerSpec::conv(1, 1, 3, 1, 1), std::vector<double>(9, 1.0), std::vector<double>{0.5});
    CHECK(z.values == std::vector<double>{4.5, 6.5, 4.5, 6.5, 9.5, 6.5, 4.5, 6.5, 4.5});

    CHECK_THROWS_AS(conv2d(Tensor4(1, 2, 3, 3), s, std::vector<double>(9, 1.0), std::vector<double>{0.0}), InvalidInput);
    CHECK_THROWS_AS(conv2d(Tensor4(1, 1, 2, 2), s, std::vector<double>(9, 1.0), std::vector<double>{0.0}), InvalidInput);
}

TEST_CASE("conv2d input gradient of sum matches finite differences") {
    SeededRng rng(11);
    auto s = LayerSpec::conv(2, 1, 3, 1, 1);
    auto w = random_vector(s.weight_count(), rng);
    auto b = random_vector(s.bias_count(), rng);
    Tensor4 x = random_tensor(1, 1, 5, 5, rng);
    auto f = [&](const std::vector<double>& v) {
        Tensor4 y = conv2d(Tensor4(1, 1, 5, 5, v), s, w, b);
        double sum = 0.0;
        for (double e : y.values) sum += e;
        return sum;
    };
    Tensor4 y = conv2d(x, s, w, b);
    LayerGrads g;
    conv2d_backward(x, Tensor4(y.n, y.c, y.h, y.w, 1.0), s, w, g);
    auto numeric = oracle::finite_difference(f, x.values, 1e-5);
    CHECK(max_rel(g.input.values, numeric, 1e-12) < 1e-5);
}

TEST_CASE("conv and transposed conv are adjoint") {
    SeededRng rng(17);
    struct Cfg {
        std::size_t out, in, k, stride, pad, h;
    };
    // The default architecture's block and a few odd ones.
    for (Cfg c : {Cfg{3, 2, 4, 2, 1, 8}, Cfg{16, 1, 4, 2, 1, 16}, Cfg{2, 3, 3, 1, 1, 5}, Cfg{2, 2, 3, 2, 0, 7},
                  Cfg{1, 1, 2, 3, 1, 6}}) {
        auto s = LayerSpec::conv(c.out, c.in, c.k, c.stride, c.pad);
        auto st = LayerSpec::conv_transpose(c.in, c.out, c.k, c.stride, c.pad);
        auto w = random_vector(s.weight_count(), rng);
        std::vector<double> zero_out(c.out, 0.0), zero_in(c.in, 0.0);
        Tensor4 x = random_tensor(2, c.in, c.h, c.h, rng);
        Tensor4 cx = conv2d(x, s, w, zero_out);
        Tensor4 y = random_tensor(cx.n, cx.c, cx.h, cx.w, rng);
        Tensor4 ty = conv_transpose2d(y, st, w, zero_in);
        INFO("k=" << c.k << " stride=" << c.stride << " pad=" << c.pad);
        if (c.stride == 2 && c.k == 4 && c.pad == 1) CHECK(ty.same_shape(x));
        // Shapes may differ when stride does not tile the input; compare on the overlap.
        if (ty.same_shape(x)) {
            const double lhs = inner(cx.values, y.values), rhs = inner(x.values, ty.values);
            CHECK(std::abs(lhs - rhs) <= 1e-10 * std::max(1.0, std::abs(lhs)));
        }
    }
}

TEST_CASE("transposed conv shape contract") {
    SeededRng rng(2);
    auto st = LayerSpec::conv_transpose(1, 1, 4, 2, 1);
    Tensor4 y = conv_transpose2d(random_tensor(1, 1, 4, 4, rng), st, random_vector(16, rng), std::vector<double>{0.0});
    CHECK(y.shape_string() == "(1,1,8,8)");
    CHECK_THROWS_AS(conv_transpose2d(Tensor4(1, 2, 4, 4), st, random_vector(16, rng), std::vector<double>{0.0}),
                    InvalidInput);
}

TEST_CASE("every layer kind has consistent gradients") {
    SeededRng rng(23);
    for (int trial = 0; trial < 4; ++trial) {
        const std::size_t n = 1 + rng.below(2), c = 1 + rng.below(3), h = 3 + rng.below(4), w = 3 + rng.below(4);
        const std::size_t oc = 1 + rng.below(3), k = 1 + rng.below(3), stride = 1 + rng.below(2), pad = rng.below(2);
        Tensor4 x = random_tensor(n, c, h, w, rng);
        std::vector<LayerSpec> specs = {LayerSpec::conv(oc, c, k, stride, pad), LayerSpec::conv_transpose(oc, c, k, stride, pad),
                                        LayerSpec::dense(oc + 1, c * h * w)};
        for (const auto& s : specs) {
            INFO(s.describe() << " on " << x.shape_string());
            auto w0 = random_vector(s.weight_count(), rng);
            auto b0 = random_vector(s.bias_count(), rng);
            auto fwd = [&](const Tensor4& in, const std::vector<double>& wv, const std::vector<double>& bv) {
                if (s.kind == LayerKind::conv) return conv2d(in, s, wv, bv);
                if (s.kind == LayerKind::conv_transpose) return conv_transpose2d(in, s, wv, bv);
                return dense(in, s, wv, bv);
            };
            Tensor4 y = fwd(x, w0, b0);
            Tensor4 probe = random_tensor(y.n, y.c, y.h, y.w, rng);
            // Scalar objective <probe, layer(x)>.
            auto objective = [&](const Tensor4& in, const std::vector<double>& wv, const std::vector<double>& bv) {
                return inner(fwd(in, wv, bv).values, probe.values);
            };
            LayerGrads g;
            if (s.kind == LayerKind::conv) conv2d_backward(x, probe, s, w0, g);
            else if (s.kind == LayerKind::conv_transpose) conv_transpose2d_backward(x, probe, s, w0, g);
            else dense_backward(x, probe, s, w0, g);

            auto nx = oracle::finite_difference(
                [&](const std::vector<double>& v) { return objective(Tensor4(x.n, x.c, x.h, x.w, v), w0, b0); }, x.values,
                1e-6);
            auto nw = oracle::finite_difference([&](const std::vector<double>& v) { return objective(x, v, b0); }, w0, 1e-6);
            auto nb = oracle::finite_difference([&](const std::vector<double>& v) { return objective(x, w0, v); }, b0, 1e-6);
            CHECK(max_rel(g.input.values, nx, 1e-8) < 1e-4);
            CHECK(max_rel(g.weights, nw, 1e-8) < 1e-4);
            CHECK(max_rel(g.bias, nb, 1e-8) < 1e-4);
        }
    }
}

TEST_CASE("rmse loss") {
    SeededRng rng(5);
    Tensor4 x = random_tensor(2, 1, 3, 3, rng, 0.0, 1.0);
    Loss same = rmse_loss(x, x);
    CHECK(same.value == 0.0);
    for (double g : same.grad.values) CHECK(g == 0.0);

    Tensor4 shifted = x;
    for (double& v : shifted.values) v += 0.5;
    CHECK(rmse_loss(shifted, x).value == doctest::Approx(0.5).epsilon(1e-15));

    Tensor4 xhat = random_tensor(2, 1, 3, 3, rng, 0.0, 1.0);
    auto numeric = oracle::finite_difference(
        [&](const std::vector<double>& v) { return rmse_loss(Tensor4(2, 1, 3, 3, v), x).value; }, xhat.values, 1e-6);
    CHECK(max_rel(rmse_loss(xhat, x).grad.values, numeric, 1e-10) < 1e-6);

    CHECK_THROWS_AS(rmse_loss(Tensor4(1, 1, 3, 3), x), InvalidInput);
}

TEST_CASE("default architecture follows the doubling rule") {
    CHECK(default_architecture(64, 8).channels == std::vector<std::size_t>{16, 32, 64});
    CHECK(default_architecture(256, 8).channels == std::vector<std::size_t>{16, 32, 64, 128, 256});
    CHECK(default_architecture(512, 8).channels.size() == 6);
    CHECK(default_architecture(8, 8).channels.empty());
    CHECK_THROWS_AS(default_architecture(60, 8), InvalidInput);
    CHECK_THROWS_AS(default_architecture(24, 8), InvalidInput);

    SeededRng rng(1);
    CaeModel m = build_model(default_architecture(64, 16), rng);
    CHECK(m.encoder.back().spec.kind == LayerKind::dense);
    CHECK(m.encoder.back().spec.width == 16);
    CHECK(m.decoder.back().spec.kind == LayerKind::sigmoid);
    // He-uniform bound on the first conv: fan_in = 1*4*4.
    const double a = std::sqrt(6.0 / 16.0);
    for (double w : m.encoder.front().weights) CHECK(std::abs(w) <= a);
    for (double b : m.encoder.front().bias) CHECK(b == 0.0);
}

TEST_CASE("encode and decode contracts") {
    CaeModel zero = build_zero_model(default_architecture(16, 6, 2));
    Matrix z0 = encode(zero, Tensor4(2, 1, 16, 16));
    CHECK(z0.rows() == 2);
    CHECK(z0.cols() == 6);
    CHECK(z0.max_abs() == 0.0);

    SeededRng rng(9);
    for (std::size_t d : {4u, 2048u}) {
        CaeModel m = build_model(default_architecture(16, d, 2), rng);
        CHECK(encode(m, random_tensor(1, 1, 16, 16, rng, 0.0, 1.0)).cols() == d);
    }

    CaeModel m = build_model(default_architecture(16, 8, 4), rng);
    Tensor4 x = random_tensor(1, 1, 16, 16, rng, 0.0, 1.0);
    Tensor4 xx(2, 1, 16, 16);
    std::copy(x.values.begin(), x.values.end(), xx.values.begin());
    std::copy(x.values.begin(), x.values.end(), xx.values.begin() + 256);
    Matrix zz = encode(m, xx);
    for (std::size_t j = 0; j < 8; ++j) CHECK(zz(0, j) == zz(1, j));
    CHECK(encode(m, x) == encode(m, x));

    Matrix z = oracle::random_matrix(3, 8, rng);
    for (double& v : z.values()) v *= 10.0;
    Tensor4 out = decode(m, z);
    CHECK(out.shape_string() == "(3,1,16,16)");
    for (double v : out.values) CHECK((v >= 0.0 && v <= 1.0));
    CHECK(decode(m, z) == out);

    CHECK_THROWS_AS(encode(m, Tensor4(1, 1, 32, 32)), InvalidInput);
    CHECK_THROWS_AS(decode(m, Matrix(1, 7)), InvalidInput);
}

TEST_CASE("grad check on tiny models") {
    SeededRng rng(31);
    Tensor4 x = random_tensor(1, 1, 8, 8, rng, 0.0, 1.0);
    for (auto channels : {std::vector<std::size_t>{2}, std::vector<std::size_t>{2, 3}}) {
        CaeModel m = build_model(tiny_arch(channels), rng);
        // Nonzero biases so every parameter sees a gradient.
        auto p = m.flat_parameters();
        for (double& v : p) v += rng.uniform(-0.05, 0.05);
        m.set_flat_parameters(p);
        GradCheckReport r = grad_check(m, x, 1e-4);
        INFO("worst parameter " << r.worst_parameter << " error " << r.max_relative_error);
        CHECK(r.passed);
        CHECK(r.max_relative_error < 1e-4);
        CHECK(r.coverage() == 1.0);
        CHECK(r.parameter_count == m.parameter_count());
    }

    // All-zero weights and input: sigmoid(0) = 0.5 against 0 gives a loss, and
    // only the last layer's bias carries gradient.
    CaeModel zero = build_zero_model(tiny_arch({2}));
    GradCheckReport r = grad_check(zero, Tensor4(1, 1, 8, 8), 1e-4);
    CHECK(r.passed);
    CHECK(r.coverage() == 1.0);
}

TEST_CASE("training") {
    SeededRng rng(41);
    Architecture arch = default_architecture(16, 8, 4);
    Tensor4 one = blob_frames(1, 16, rng);
    CaeModel init = build_model(arch, rng);

    SUBCASE("overfits a single image") {
        TrainConfig cfg;
        cfg.epochs = 300;
        cfg.learning_rate = 1e-2;
        cfg.batch_size = 1;
        TrainResult r = train(one, init, cfg);
        CHECK(r.loss_history.size() == 300);
        CHECK(rmse_loss(reconstruct(r.model, one), one).value < 0.05);
    }
    SUBCASE("sgd with a small rate never increases the loss early on") {
        TrainConfig cfg;
        cfg.epochs = 10;
        cfg.learning_rate = 1e-3;
        cfg.optimizer = OptimizerKind::sgd;
        TrainResult r = train(one, init, cfg);
        REQUIRE(r.loss_history.size() == 10);
        for (std::size_t e = 1; e < 10; ++e) CHECK(r.loss_history[e] <= r.loss_history[e - 1] + 1e-9);
    }
    SUBCASE("same seed gives identical history and parameters") {
        Tensor4 frames = blob_frames(10, 16, rng);
        TrainConfig cfg;
        cfg.epochs = 4;
        cfg.batch_size = 3;
        cfg.seed = 77;
        TrainResult a = train(frames, init, cfg), b = train(frames, init, cfg);
        CHECK(a.loss_history == b.loss_history);
        CHECK(a.model == b.model);
        cfg.seed = 78;
        CHECK(train(frames, init, cfg).loss_history != a.loss_history);
    }
    SUBCASE("trained model reconstructs better than at initialization") {
        Tensor4 frames = blob_frames(24, 16, rng);
        TrainConfig cfg;
        cfg.epochs = 15;
        cfg.batch_size = 8;
        cfg.learning_rate = 3e-3;
        TrainResult r = train(frames, init, cfg);
        Tensor4 held = blob_frames(6, 16, rng);
        CHECK(rmse_loss(reconstruct(r.model, held), held).value < rmse_loss(reconstruct(init, held), held).value);
    }
    SUBCASE("rejects bad inputs") {
        TrainConfig cfg;
        CHECK_THROWS_AS(train(Tensor4(0, 1, 16, 16), init, cfg), InvalidInput);
        Tensor4 bad = one;
        bad.values[3] = 1.5;
        CHECK_THROWS_AS(train(bad, init, cfg), RangeError);
        cfg.learning_rate = 0.0;
        CHECK_THROWS_AS(train(one, init, cfg), InvalidInput);
        cfg.learning_rate = 1e-3;
        cfg.batch_size = 0;
        CHECK_THROWS_AS(train(one, init, cfg), InvalidInput);
    }
    SUBCASE("divergence names the epoch") {
        TrainConfig cfg;
        cfg.epochs = 5;
        CaeModel poisoned = init;
        poisoned.decoder.front().weights[0] = std::nan("");
        try {
            train(one, poisoned, cfg);
            FAIL("expected divergence");
        } catch (const TrainingDiverged& e) {
            CHECK(e.epoch() >= 1);
            CHECK(std::string(e.what()).find("epoch") != std::string::npos);
        }
    }
}

TEST_CASE("model file round trip") {
    SeededRng rng(8);
    CaeModel m = build_model(default_architecture(16, 5, 2), rng);
    auto bytes = serialize(m);
    CHECK(std::string(bytes.begin(), bytes.begin() + 6) == "GRCAE1");
    CaeModel back = deserialize(bytes);
    CHECK(back == m);
    CHECK(architecture_text(back).rfind("gridrep-cae/1\nresolution 16\nlatent 5\n", 0) == 0);

    auto path = (std::filesystem::temp_directory_path() / "gridrep_test_model.cae").string();
    save(m, path);
    CHECK(load(path) == m);
    std::remove(path.c_str());

    auto truncated = bytes;
    truncated.resize(truncated.size() - 8);
    CHECK_THROWS_AS(deserialize(truncated), FormatError);
    auto bad = bytes;
    bad[0] = 'X';
    CHECK_THROWS_AS(deserialize(bad), FormatError);
    CHECK_THROWS_AS(load("/nonexistent/dir/model.cae"), IoError);
}
