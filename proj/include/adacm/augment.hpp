#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "adacm/errors.hpp"
#include "adacm/rng.hpp"
#include "adacm/tensor.hpp"

namespace adacm {

// Stochastic input transforms. Weak transforms perturb mildly (small jitter,
// crop/flip); strong transforms chain aggressive edits drawn from a pool.
// Every call is a pure function of (sample, stream), and streams are keyed by
// (global seed, policy stream id, epoch, sample index, view id) so results do
// not depend on batch order or evaluation order.

enum class StrongOp {
    // vector samples
    jitter,
    dropout,
    sign_flip,
    // image samples
    invert,
    contrast,
    brightness,
    cutout,
    translate,
    rotate90,
};

enum class PolicyKind { weak, strong };

struct AugmentPolicy {
    PolicyKind kind = PolicyKind::weak;
    std::uint64_t stream_id = 1;

    // vector path: absolute per-dimension jitter sigma (empty disables jitter)
    std::vector<double> per_dim_sigma;

    // image weak path
    std::size_t pad = 2;
    double flip_prob = 0.5;

    // strong path
    std::vector<StrongOp> pool;
    int ops_per_call = 2;
    double dropout_lo = 0.1, dropout_hi = 0.3;
    double sign_flip_lo = 0.1, sign_flip_hi = 0.3;
    double contrast_lo = 0.5, contrast_hi = 1.5;
    double brightness_max = 0.25;
    double cutout_lo = 0.2, cutout_hi = 0.5;  // fraction of each image side
    double translate_frac = 0.25;
};

inline AugmentPolicy weak_vector_policy(const std::vector<double>& per_dim_std,
                                        double scale = 0.05) {
    AugmentPolicy p;
    p.kind = PolicyKind::weak;
    p.stream_id = 1;
    p.per_dim_sigma.reserve(per_dim_std.size());
    for (double s : per_dim_std) p.per_dim_sigma.push_back(scale * s);
    return p;
}

inline AugmentPolicy strong_vector_policy(const std::vector<double>& per_dim_std,
                                          double scale = 0.25) {
    AugmentPolicy p;
    p.kind = PolicyKind::strong;
    p.stream_id = 2;
    p.per_dim_sigma.reserve(per_dim_std.size());
    for (double s : per_dim_std) p.per_dim_sigma.push_back(scale * s);
    p.pool = {StrongOp::jitter, StrongOp::dropout, StrongOp::sign_flip};
    return p;
}

inline AugmentPolicy weak_image_policy(std::size_t pad = 2, double flip_prob = 0.5) {
    AugmentPolicy p;
    p.kind = PolicyKind::weak;
    p.stream_id = 1;
    p.pad = pad;
    p.flip_prob = flip_prob;
    return p;
}

inline AugmentPolicy strong_image_policy() {
    AugmentPolicy p;
    p.kind = PolicyKind::strong;
    p.stream_id = 2;
    p.pool = {StrongOp::invert,   StrongOp::contrast,  StrongOp::brightness,
              StrongOp::cutout,   StrongOp::translate, StrongOp::rotate90};
    return p;
}

/// Substream for one (sample, view) draw; independent of batch order.
inline RngStream augment_stream(std::uint64_t seed, const AugmentPolicy& policy,
                                std::uint64_t epoch, std::uint64_t sample_index,
                                std::uint64_t view_id) {
    return RngStream(derive_key(seed, {policy.stream_id, epoch, sample_index, view_id}));
}

// ---- image primitives (rank-2 [H,W] tensors, values in [0,1]) ----

/// Zero-pads by `pad` on each side, then crops an HxW window whose top-left
/// corner sits at (off_r, off_c) in the padded image; off in [0, 2*pad].
inline Tensor crop_shift(const Tensor& img, std::size_t pad, std::size_t off_r, std::size_t off_c) {
    std::size_t h = img.rows(), w = img.cols();
    Tensor out({h, w});
    for (std::size_t r = 0; r < h; ++r)
        for (std::size_t c = 0; c < w; ++c) {
            // source pixel in the original image
            long long sr = static_cast<long long>(r + off_r) - static_cast<long long>(pad);
            long long sc = static_cast<long long>(c + off_c) - static_cast<long long>(pad);
            if (sr >= 0 && sr < static_cast<long long>(h) && sc >= 0 && sc < static_cast<long long>(w))
                out(r, c) = img(static_cast<std::size_t>(sr), static_cast<std::size_t>(sc));
        }
    return out;
}

inline Tensor hflip(const Tensor& img) {
    std::size_t h = img.rows(), w = img.cols();
    Tensor out({h, w});
    for (std::size_t r = 0; r < h; ++r)
        for (std::size_t c = 0; c < w; ++c) out(r, c) = img(r, w - 1 - c);
    return out;
}

inline Tensor cutout_at(const Tensor& img, std::size_t r0, std::size_t c0, std::size_t ch,
                        std::size_t cw) {
    Tensor out = img;
    for (std::size_t r = r0; r < std::min(r0 + ch, img.rows()); ++r)
        for (std::size_t c = c0; c < std::min(c0 + cw, img.cols()); ++c) out(r, c) = 0.0;
    return out;
}

inline Tensor translate_img(const Tensor& img, long long dy, long long dx) {
    std::size_t h = img.rows(), w = img.cols();
    Tensor out({h, w});
    for (std::size_t r = 0; r < h; ++r)
        for (std::size_t c = 0; c < w; ++c) {
            long long sr = static_cast<long long>(r) - dy;
            long long sc = static_cast<long long>(c) - dx;
            if (sr >= 0 && sr < static_cast<long long>(h) && sc >= 0 && sc < static_cast<long long>(w))
                out(r, c) = img(static_cast<std::size_t>(sr), static_cast<std::size_t>(sc));
        }
    return out;
}

/// Rotates by k*90 degrees counterclockwise; square images only, others pass
/// through unchanged (rotation would not preserve shape).
inline Tensor rotate90k(const Tensor& img, int k) {
    std::size_t h = img.rows(), w = img.cols();
    if (h != w) return img;
    Tensor cur = img;
    for (int step = 0; step < ((k % 4) + 4) % 4; ++step) {
        Tensor next({h, w});
        for (std::size_t r = 0; r < h; ++r)
            for (std::size_t c = 0; c < w; ++c) next(w - 1 - c, r) = cur(r, c);
        cur = next;
    }
    return cur;
}

namespace aug_detail {

inline double clamp01(double v) { return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v); }

inline void jitter_inplace(Tensor& x, const std::vector<double>& sigma, RngStream& rng) {
    if (sigma.empty()) return;
    if (sigma.size() != 1 && sigma.size() != x.size())
        throw ShapeError("jitter sigma length " + std::to_string(sigma.size()) +
                         " does not match sample size " + std::to_string(x.size()));
    for (std::size_t d = 0; d < x.size(); ++d) {
        double s = sigma.size() == 1 ? sigma[0] : sigma[d];
        x[d] += s * rng.gaussian();
    }
}

inline void apply_strong_op(Tensor& x, StrongOp op, const AugmentPolicy& p, RngStream& rng) {
    switch (op) {
        case StrongOp::jitter:
            jitter_inplace(x, p.per_dim_sigma, rng);
            break;
        case StrongOp::dropout: {
            double rate = rng.uniform(p.dropout_lo, p.dropout_hi);
            for (double& v : x.values())
                if (rng.bernoulli(rate)) v = 0.0;
            break;
        }
        case StrongOp::sign_flip: {
            double rate = rng.uniform(p.sign_flip_lo, p.sign_flip_hi);
            for (double& v : x.values())
                if (rng.bernoulli(rate)) v = -v;
            break;
        }
        case StrongOp::invert:
            for (double& v : x.values()) v = clamp01(1.0 - v);
            break;
        case StrongOp::contrast: {
            double f = rng.uniform(p.contrast_lo, p.contrast_hi);
            double mean = 0.0;
            for (double v : x.values()) mean += v;
            mean /= static_cast<double>(x.size());
            for (double& v : x.values()) v = clamp01(mean + (v - mean) * f);
            break;
        }
        case StrongOp::brightness: {
            double d = rng.uniform(-p.brightness_max, p.brightness_max);
            for (double& v : x.values()) v = clamp01(v + d);
            break;
        }
        case StrongOp::cutout: {
            std::size_t h = x.rows(), w = x.cols();
            auto side = [&](std::size_t n) {
                double frac = rng.uniform(p.cutout_lo, p.cutout_hi);
                std::size_t s = static_cast<std::size_t>(std::llround(frac * static_cast<double>(n)));
                return std::max<std::size_t>(1, std::min(s, n));
            };
            std::size_t ch = side(h), cw = side(w);
            std::size_t r0 = static_cast<std::size_t>(rng.next_below(h - ch + 1));
            std::size_t c0 = static_cast<std::size_t>(rng.next_below(w - cw + 1));
            x = cutout_at(x, r0, c0, ch, cw);
            break;
        }
        case StrongOp::translate: {
            long long max_h = std::max<long long>(1, static_cast<long long>(
                                                         p.translate_frac * static_cast<double>(x.rows())));
            long long max_w = std::max<long long>(1, static_cast<long long>(
                                                         p.translate_frac * static_cast<double>(x.cols())));
            long long dy = static_cast<long long>(rng.next_below(2 * max_h + 1)) - max_h;
            long long dx = static_cast<long long>(rng.next_below(2 * max_w + 1)) - max_w;
            x = translate_img(x, dy, dx);
            break;
        }
        case StrongOp::rotate90: {
            int k = 1 + static_cast<int>(rng.next_below(3));
            x = rotate90k(x, k);
            break;
        }
    }
}

}  // namespace aug_detail

/// Weak transform: image path is pad/random-crop plus optional horizontal
/// flip, vector path is small additive Gaussian jitter. Shape preserved.
inline Tensor weak_augment(const Tensor& sample, const AugmentPolicy& policy, RngStream& rng) {
    Tensor out = sample;
    if (sample.rank() >= 2) {
        if (sample.size() <= 1) return out;  // degenerate 1x1 passes through
        if (policy.pad > 0) {
            std::size_t off_r = static_cast<std::size_t>(rng.next_below(2 * policy.pad + 1));
            std::size_t off_c = static_cast<std::size_t>(rng.next_below(2 * policy.pad + 1));
            out = crop_shift(out, policy.pad, off_r, off_c);
        }
        if (policy.flip_prob > 0.0 && rng.bernoulli(policy.flip_prob)) out = hflip(out);
    } else {
        aug_detail::jitter_inplace(out, policy.per_dim_sigma, rng);
    }
    return out;
}

/// Strong transform: ops_per_call transforms drawn from the pool with
/// replacement, magnitudes drawn per call. Empty pool is identity.
inline Tensor strong_augment(const Tensor& sample, const AugmentPolicy& policy, RngStream& rng) {
    Tensor out = sample;
    if (policy.pool.empty()) return out;
    for (int i = 0; i < policy.ops_per_call; ++i) {
        StrongOp op = policy.pool[rng.next_below(policy.pool.size())];
        aug_detail::apply_strong_op(out, op, policy, rng);
    }
    return out;
}

}  // namespace adacm
