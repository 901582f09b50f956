#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "adacm/nn.hpp"
#include "adacm/rng.hpp"

using namespace adacm;

namespace {

ModelConfig tiny_config() {
    ModelConfig c;
    c.input_dim = 3;
    c.hidden_dim = 4;
    c.embedding_dim = 2;
    c.classes = 2;
    c.activation = Activation::tanh;
    return c;
}

}  // namespace

TEST_CASE("init_params produces bounded weights and zero biases") {
    ModelConfig cfg = tiny_config();
    RngStream r(5);
    ModelParams p = init_params(cfg, r);

    REQUIRE(p.tensors.size() == 6);
    CHECK(p.tensors[0].name == "enc1.w");
    CHECK(p.tensors[5].name == "head.b");
    CHECK(p.scalar_count() == 3 * 4 + 4 + 4 * 2 + 2 + 2 * 2 + 2);

    double bound1 = std::sqrt(6.0 / (3 + 4));
    for (double v : p.find("enc1.w").values()) {
        CHECK(std::fabs(v) <= bound1);
    }
    for (double v : p.find("enc1.b").values()) CHECK(v == 0.0);
    for (double v : p.find("head.b").values()) CHECK(v == 0.0);

    RngStream r2(5);
    ModelParams q = init_params(cfg, r2);
    CHECK(q.find("enc2.w").values() == p.find("enc2.w").values());  // same key, same init

    CHECK_THROWS_AS(p.find("nosuch"), ConfigError);
}

TEST_CASE("zero parameters give a uniform posterior") {
    ModelConfig cfg = tiny_config();
    cfg.classes = 4;
    RngStream r(1);
    ModelParams p = init_params(cfg, r);
    for (auto& nt : p.tensors)
        for (double& v : nt.tensor.values()) v = 0.0;

    ForwardOutput out = forward(p, Tensor::matrix({{1, 2, 3}, {-1, 0, 1}}));
    REQUIRE(out.probs.shape() == std::vector<std::size_t>{2, 4});
    for (double v : out.probs.values()) CHECK(v == 0.25);
    for (double v : out.logits.values()) CHECK(v == 0.0);
}

TEST_CASE("softmax vector helper") {
    Tensor u = softmax(Tensor::vector({0, 0, 0, 0}));
    for (double v : u.values()) CHECK(v == 0.25);

    Tensor p = softmax(Tensor::vector({1, 0}));
    CHECK(p[0] == Catch::Approx(0.7310585786300049).epsilon(1e-14));
    CHECK(p[1] == Catch::Approx(0.2689414213699951).epsilon(1e-14));

    Tensor big = softmax(Tensor::vector({1000, 1000}));
    CHECK(big[0] == 0.5);
    CHECK(big[1] == 0.5);

    Tensor bad = Tensor::vector({1, 2});
    bad[0] = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(softmax(bad), NumericError);
}

TEST_CASE("forward matches a straight-line recomputation") {
    ModelConfig cfg = tiny_config();
    RngStream r(42);
    ModelParams p = init_params(cfg, r);
    Tensor x = Tensor::matrix({{0.3, -0.7, 1.1}, {0.0, 0.5, -0.2}});

    ForwardOutput out = forward(p, x);

    const Tensor& w1 = p.find("enc1.w");
    const Tensor& b1 = p.find("enc1.b");
    const Tensor& w2 = p.find("enc2.w");
    const Tensor& b2 = p.find("enc2.b");
    const Tensor& w3 = p.find("head.w");
    const Tensor& b3 = p.find("head.b");

    for (std::size_t n = 0; n < 2; ++n) {
        std::vector<double> h(4, 0.0);
        for (std::size_t j = 0; j < 4; ++j) {
            double acc = b1[j];
            for (std::size_t i = 0; i < 3; ++i) acc += x(n, i) * w1(i, j);
            h[j] = std::tanh(acc);
        }
        std::vector<double> emb(2, 0.0);
        for (std::size_t j = 0; j < 2; ++j) {
            double acc = b2[j];
            for (std::size_t i = 0; i < 4; ++i) acc += h[i] * w2(i, j);
            emb[j] = acc;
        }
        std::vector<double> logits(2, 0.0);
        for (std::size_t j = 0; j < 2; ++j) {
            double acc = b3[j];
            for (std::size_t i = 0; i < 2; ++i) acc += emb[i] * w3(i, j);
            logits[j] = acc;
        }
        double mx = std::max(logits[0], logits[1]);
        double e0 = std::exp(logits[0] - mx), e1 = std::exp(logits[1] - mx);
        for (std::size_t j = 0; j < 2; ++j) {
            CHECK(out.embedding(n, j) == Catch::Approx(emb[j]).epsilon(1e-14));
            CHECK(out.logits(n, j) == Catch::Approx(logits[j]).epsilon(1e-14));
        }
        CHECK(out.probs(n, 0) == Catch::Approx(e0 / (e0 + e1)).epsilon(1e-14));
        CHECK(out.probs(n, 1) == Catch::Approx(e1 / (e0 + e1)).epsilon(1e-14));
    }
}

TEST_CASE("forward is pure") {
    ModelConfig cfg = tiny_config();
    cfg.activation = Activation::relu;
    RngStream r(9);
    ModelParams p = init_params(cfg, r);
    Tensor x = Tensor::matrix({{0.1, 0.2, 0.3}});
    ForwardOutput a = forward(p, x);
    ForwardOutput b = forward(p, x);
    CHECK(a.embedding.values() == b.embedding.values());
    CHECK(a.logits.values() == b.logits.values());
    CHECK(a.probs.values() == b.probs.values());
}

TEST_CASE("forward rejects a width mismatch") {
    ModelConfig cfg = tiny_config();
    RngStream r(2);
    ModelParams p = init_params(cfg, r);
    CHECK_THROWS_AS(forward(p, Tensor::matrix({{1, 2}})), ShapeError);
}

TEST_CASE("conv front end") {
    ModelConfig cfg;
    cfg.front_end = FrontEnd::conv;
    cfg.image_height = 8;
    cfg.image_width = 8;
    cfg.hidden_dim = 6;
    cfg.embedding_dim = 3;
    cfg.classes = 4;
    // two valid 3x3 convs shrink 8x8 to 4x4
    CHECK(cfg.dense_input() == 8 * 4 * 4);

    RngStream r(3);
    ModelParams p = init_params(cfg, r);
    REQUIRE(p.tensors.size() == 10);
    CHECK(p.tensors[0].name == "conv1.k");
    CHECK(p.find("conv1.k").shape() == std::vector<std::size_t>{4, 1, 3, 3});
    CHECK(p.find("conv2.k").shape() == std::vector<std::size_t>{8, 4, 3, 3});

    Tensor batch({2, 8, 8}, 0.5);
    ForwardOutput out = forward(p, batch);
    REQUIRE(out.probs.shape() == std::vector<std::size_t>{2, 4});
    for (std::size_t i = 0; i < 2; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < 4; ++j) s += out.probs(i, j);
        CHECK(s == Catch::Approx(1.0).epsilon(1e-12));
    }

    // conv models take [N,H,W] batches, not pre-flattened rows
    CHECK_THROWS_AS(forward(p, Tensor({2, 64}, 0.5)), ShapeError);

    ModelConfig bad = cfg;
    bad.image_height = 0;
    RngStream r2(3);
    CHECK_THROWS_AS(init_params(bad, r2), ConfigError);
}

TEST_CASE("adam leaves parameters alone under zero gradients") {
    ModelConfig cfg = tiny_config();
    RngStream r(7);
    ModelParams p = init_params(cfg, r);
    std::vector<double> before = p.find("enc1.w").values();

    AdamState s = AdamState::create(p);
    std::vector<Tensor> zero;
    for (const auto& nt : p.tensors) zero.emplace_back(nt.tensor.shape(), 0.0);
    adam_update(p, zero, s);
    CHECK(p.find("enc1.w").values() == before);
    CHECK(s.step == 1);
}

TEST_CASE("adam first step moves by about the learning rate") {
    ModelParams p;
    p.tensors.push_back({"w", Tensor::vector({1.0, -2.0})});
    AdamState s = AdamState::create(p, 0.01);
    std::vector<Tensor> g{Tensor::vector({0.3, -0.7})};
    adam_update(p, g, s);
    // bias correction makes the first update lr * g/(|g| + eps) = lr * sign(g)
    CHECK(p.tensors[0].tensor[0] == Catch::Approx(1.0 - 0.01).epsilon(1e-6));
    CHECK(p.tensors[0].tensor[1] == Catch::Approx(-2.0 + 0.01).epsilon(1e-6));
}

TEST_CASE("adam matches a hand-stepped scalar quadratic") {
    // minimize w^2 from w=1 with lr 0.1; reference loop uses plain doubles
    ModelParams p;
    p.tensors.push_back({"w", Tensor::vector({1.0})});
    AdamState s = AdamState::create(p, 0.1);

    double w = 1.0, m = 0.0, v = 0.0;
    const double b1 = 0.9, b2 = 0.999, eps = 1e-8, lr = 0.1;
    for (int step = 1; step <= 3; ++step) {
        double grad = 2.0 * p.tensors[0].tensor[0];
        adam_update(p, {Tensor::vector({grad})}, s);

        double gref = 2.0 * w;
        m = b1 * m + (1 - b1) * gref;
        v = b2 * v + (1 - b2) * gref * gref;
        double mhat = m / (1 - std::pow(b1, step));
        double vhat = v / (1 - std::pow(b2, step));
        w -= lr * mhat / (std::sqrt(vhat) + eps);

        REQUIRE(p.tensors[0].tensor[0] == Catch::Approx(w).epsilon(1e-12));
    }
}

TEST_CASE("adam rejects misaligned gradients") {
    ModelConfig cfg = tiny_config();
    RngStream r(4);
    ModelParams p = init_params(cfg, r);
    AdamState s = AdamState::create(p);

    std::vector<Tensor> too_few{Tensor({3, 4}, 0.0)};
    CHECK_THROWS_AS(adam_update(p, too_few, s), ShapeError);

    std::vector<Tensor> wrong_shape;
    for (const auto& nt : p.tensors) wrong_shape.emplace_back(nt.tensor.shape(), 0.0);
    wrong_shape[0] = Tensor({4, 3}, 0.0);
    CHECK_THROWS_AS(adam_update(p, wrong_shape, s), ShapeError);
}

TEST_CASE("collect_grads covers untouched parameters with zeros") {
    ModelConfig cfg = tiny_config();
    RngStream r(8);
    ModelParams p = init_params(cfg, r);
    Tape t;
    std::vector<Var> vars = params_on_tape(t, p);
    // loss touches only enc1.w (index 0)
    t.backward(t.sum_all(vars[0]));
    std::vector<Tensor> grads = collect_grads(t, vars);
    REQUIRE(grads.size() == p.tensors.size());
    for (double g : grads[0].values()) CHECK(g == 1.0);
    for (std::size_t i = 1; i < grads.size(); ++i) {
        CHECK(grads[i].same_shape(p.tensors[i].tensor));
        for (double g : grads[i].values()) CHECK(g == 0.0);
    }
}
