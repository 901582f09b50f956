#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "adacm/autodiff.hpp"
#include "adacm/errors.hpp"
#include "adacm/rng.hpp"
#include "adacm/tensor.hpp"

namespace adacm {

enum class Activation { tanh, relu };

enum class FrontEnd { none, conv };

/// Architecture of the small encoder + classifier head. The dense stack is
/// flatten -> dense(hidden) -> activation -> dense(embedding) -> dense(classes);
/// the embedding layer output is the feature vector used by the contrastive
/// objective (no projection head). An optional two-layer conv front end can
/// be enabled for image-shaped inputs.
struct ModelConfig {
    std::size_t input_dim = 16;  // flattened sample size (dense path)
    std::size_t hidden_dim = 64;
    std::size_t embedding_dim = 32;
    std::size_t classes = 4;
    Activation activation = Activation::tanh;

    FrontEnd front_end = FrontEnd::none;
    std::size_t image_height = 0;  // required when front_end == conv
    std::size_t image_width = 0;
    std::size_t conv_channels1 = 4;
    std::size_t conv_channels2 = 8;
    std::size_t conv_kernel = 3;

    // Flattened width the dense stack sees.
    std::size_t dense_input() const {
        if (front_end == FrontEnd::none) return input_dim;
        std::size_t h = image_height - 2 * (conv_kernel - 1);
        std::size_t w = image_width - 2 * (conv_kernel - 1);
        return conv_channels2 * h * w;
    }
};

struct NamedTensor {
    std::string name;
    Tensor tensor;
};

/// Ordered parameter list; order is fixed for the life of a run and shared
/// by gradients, Adam moments and checkpoints.
struct ModelParams {
    ModelConfig config;
    std::vector<NamedTensor> tensors;

    Tensor& find(const std::string& name) {
        for (auto& t : tensors)
            if (t.name == name) return t.tensor;
        throw ConfigError("no parameter named " + name);
    }
    const Tensor& find(const std::string& name) const {
        return const_cast<ModelParams*>(this)->find(name);
    }
    std::size_t scalar_count() const {
        std::size_t n = 0;
        for (const auto& t : tensors) n += t.tensor.size();
        return n;
    }
};

/// Glorot-style uniform init, deterministic from the stream.
inline Tensor init_dense(std::size_t in, std::size_t out, RngStream& rng) {
    double bound = std::sqrt(6.0 / static_cast<double>(in + out));
    Tensor w({in, out});
    for (double& v : w.values()) v = rng.uniform(-bound, bound);
    return w;
}

inline ModelParams init_params(const ModelConfig& cfg, RngStream& rng) {
    ModelParams p;
    p.config = cfg;
    if (cfg.front_end == FrontEnd::conv) {
        if (cfg.image_height == 0 || cfg.image_width == 0)
            throw ConfigError("conv front end requires image dimensions");
        std::size_t k = cfg.conv_kernel;
        auto conv_init = [&](std::size_t cout, std::size_t cin) {
            double bound = std::sqrt(6.0 / static_cast<double>(cin * k * k + cout * k * k));
            Tensor t({cout, cin, k, k});
            for (double& v : t.values()) v = rng.uniform(-bound, bound);
            return t;
        };
        p.tensors.push_back({"conv1.k", conv_init(cfg.conv_channels1, 1)});
        p.tensors.push_back({"conv1.b", Tensor({cfg.conv_channels1}, 0.0)});
        p.tensors.push_back({"conv2.k", conv_init(cfg.conv_channels2, cfg.conv_channels1)});
        p.tensors.push_back({"conv2.b", Tensor({cfg.conv_channels2}, 0.0)});
    }
    std::size_t d = cfg.dense_input();
    p.tensors.push_back({"enc1.w", init_dense(d, cfg.hidden_dim, rng)});
    p.tensors.push_back({"enc1.b", Tensor({cfg.hidden_dim}, 0.0)});
    p.tensors.push_back({"enc2.w", init_dense(cfg.hidden_dim, cfg.embedding_dim, rng)});
    p.tensors.push_back({"enc2.b", Tensor({cfg.embedding_dim}, 0.0)});
    p.tensors.push_back({"head.w", init_dense(cfg.embedding_dim, cfg.classes, rng)});
    p.tensors.push_back({"head.b", Tensor({cfg.classes}, 0.0)});
    return p;
}

/// Per-sample embedding, logits and softmax probabilities for one batch.
struct ForwardOutput {
    Tensor embedding;
    Tensor logits;
    Tensor probs;
};

struct ForwardVars {
    Var embedding;
    Var logits;
    Var probs;
};

namespace detail {

inline Var activate(Tape& t, Var x, Activation a) {
    return a == Activation::tanh ? t.tanh_act(x) : t.relu(x);
}

// Flattens [N, ...] into [N, prod(...)], leaves [N, D] alone.
inline Var flatten_batch(Tape& t, Var x) {
    const Tensor& v = t.value(x);
    if (v.rank() == 2) return x;
    std::size_t n = v.shape()[0];
    return t.reshape(x, {n, v.size() / n});
}

}  // namespace detail

/// Builds the model's forward computation on a tape. `params` maps parameter
/// names to leaf Vars in the order of ModelParams::tensors.
inline ForwardVars forward_on_tape(Tape& t, const ModelConfig& cfg,
                                   const std::vector<Var>& params, Var batch) {
    std::size_t i = 0;
    Var x = batch;
    if (cfg.front_end == FrontEnd::conv) {
        const Tensor& v = t.value(batch);
        if (v.rank() != 3 || v.shape()[1] != cfg.image_height || v.shape()[2] != cfg.image_width)
            throw ShapeError("conv front end expects [N," + std::to_string(cfg.image_height) +
                             "," + std::to_string(cfg.image_width) + "] input, got " + v.shape_str());
        x = t.reshape(batch, {v.shape()[0], 1, cfg.image_height, cfg.image_width});
        x = t.relu(t.add_chanvec(t.conv2d(x, params[i]), params[i + 1]));
        i += 2;
        x = t.relu(t.add_chanvec(t.conv2d(x, params[i]), params[i + 1]));
        i += 2;
    }
    x = detail::flatten_batch(t, x);
    if (t.value(x).cols() != cfg.dense_input())
        throw ShapeError("model expects flattened width " + std::to_string(cfg.dense_input()) +
                         ", got " + std::to_string(t.value(x).cols()));
    Var h = detail::activate(t, t.add_rowvec(t.matmul(x, params[i]), params[i + 1]), cfg.activation);
    Var emb = t.add_rowvec(t.matmul(h, params[i + 2]), params[i + 3]);
    Var logits = t.add_rowvec(t.matmul(emb, params[i + 4]), params[i + 5]);
    Var probs = t.softmax_rows(logits);
    return {emb, logits, probs};
}

inline std::vector<Var> params_on_tape(Tape& t, const ModelParams& p) {
    std::vector<Var> vars;
    vars.reserve(p.tensors.size());
    for (const auto& nt : p.tensors) vars.push_back(t.leaf(nt.tensor));
    return vars;
}

/// Pure forward pass: identical (params, batch) give bitwise-identical output.
inline ForwardOutput forward(const ModelParams& p, const Tensor& batch) {
    Tape t;
    std::vector<Var> vars = params_on_tape(t, p);
    Var b = t.leaf(batch);
    ForwardVars f = forward_on_tape(t, p.config, vars, b);
    return {t.value(f.embedding), t.value(f.logits), t.value(f.probs)};
}

/// Stabilized softmax of a single logit vector.
inline Tensor softmax(const Tensor& logits) {
    if (!logits.all_finite()) throw NumericError("softmax input contains non-finite values");
    Tensor out(logits.shape());
    double mx = logits[0];
    for (std::size_t i = 1; i < logits.size(); ++i) mx = std::max(mx, logits[i]);
    double sum = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        out[i] = std::exp(logits[i] - mx);
        sum += out[i];
    }
    for (std::size_t i = 0; i < logits.size(); ++i) out[i] /= sum;
    return out;
}

/// Adam optimizer state; moment tensors mirror the parameter list.
struct AdamState {
    double learning_rate = 5e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    long long step = 0;
    std::vector<Tensor> m;
    std::vector<Tensor> v;

    static AdamState create(const ModelParams& p, double lr = 5e-4, double b1 = 0.9,
                            double b2 = 0.999, double eps = 1e-8) {
        AdamState s;
        s.learning_rate = lr;
        s.beta1 = b1;
        s.beta2 = b2;
        s.epsilon = eps;
        for (const auto& nt : p.tensors) {
            s.m.emplace_back(nt.tensor.shape(), 0.0);
            s.v.emplace_back(nt.tensor.shape(), 0.0);
        }
        return s;
    }
};

/// One Adam update with bias correction. `grads` must align with
/// `params.tensors` element by element.
inline void adam_update(ModelParams& params, const std::vector<Tensor>& grads, AdamState& s) {
    if (grads.size() != params.tensors.size() || s.m.size() != params.tensors.size())
        throw ShapeError("adam_update: gradient list does not align with parameters");
    s.step += 1;
    double bc1 = 1.0 - std::pow(s.beta1, static_cast<double>(s.step));
    double bc2 = 1.0 - std::pow(s.beta2, static_cast<double>(s.step));
    for (std::size_t i = 0; i < params.tensors.size(); ++i) {
        Tensor& w = params.tensors[i].tensor;
        const Tensor& g = grads[i];
        if (!w.same_shape(g))
            throw ShapeError("adam_update: gradient " + std::to_string(i) + " has shape " +
                             g.shape_str() + ", parameter has " + w.shape_str());
        Tensor& m = s.m[i];
        Tensor& v = s.v[i];
        for (std::size_t j = 0; j < w.size(); ++j) {
            m[j] = s.beta1 * m[j] + (1.0 - s.beta1) * g[j];
            v[j] = s.beta2 * v[j] + (1.0 - s.beta2) * g[j] * g[j];
            double mhat = m[j] / bc1;
            double vhat = v[j] / bc2;
            w[j] -= s.learning_rate * mhat / (std::sqrt(vhat) + s.epsilon);
        }
    }
}

/// Computes d(loss)/d(param) for every parameter leaf; parameters the loss
/// does not touch get zero gradients.
inline std::vector<Tensor> collect_grads(const Tape& t, const std::vector<Var>& param_vars) {
    std::vector<Tensor> grads;
    grads.reserve(param_vars.size());
    for (Var v : param_vars) grads.push_back(t.grad(v));
    return grads;
}

}  // namespace adacm
