#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "adacm/autodiff.hpp"
#include "adacm/errors.hpp"
#include "adacm/tensor.hpp"

namespace adacm {

// Objective terms: supervised cross-entropy on labeled data, pseudo-label
// cross-entropy on the high-confidence subset (strong views), and an InfoNCE
// contrastive objective on the low-confidence subset (paired weak-view
// embeddings). The weighted sum of the three is the training objective.

constexpr double kLogClampEps = 1e-12;

struct LossWeights {
    double lambda1 = 0.5;
    double lambda2 = 1.0;
    double lambda3 = 0.1;
    double tau = 0.1;  // contrastive temperature, > 0
};

// ---- tape compositions (used by the trainer; gradients flow) ----

/// -(1/N) sum_i sum_c y_ic log p_ic with the log clamped at 1e-12.
inline Var supervised_ce_on_tape(Tape& t, Var probs, const Tensor& onehot) {
    const Tensor& p = t.value(probs);
    if (!p.same_shape(onehot))
        throw ShapeError("cross-entropy: probs " + p.shape_str() + " vs labels " +
                         onehot.shape_str());
    const double n = static_cast<double>(p.rows());
    Var picked = t.mul_const(t.log_clamped(probs, kLogClampEps), onehot);
    return t.scale(t.sum_all(picked), -1.0 / n);
}

/// Same form as the supervised loss, over subset-I strong-view predictions
/// and their hard pseudo labels.
inline Var unsupervised_ce_on_tape(Tape& t, Var strong_probs, const Tensor& pseudo_onehot) {
    return supervised_ce_on_tape(t, strong_probs, pseudo_onehot);
}

/// InfoNCE over paired embeddings (rows of ea and eb are the two weak views
/// of the same sample). For anchor i the positive is (a_i, b_i); negatives
/// are every other a row and every b row including b_i itself, so the log
/// argument is <= 1 and the loss is non-negative. Requires nonzero rows.
inline Var contrastive_on_tape(Tape& t, Var ea, Var eb, double tau) {
    const Tensor& A = t.value(ea);
    const Tensor& B = t.value(eb);
    if (!A.same_shape(B) || A.rank() != 2)
        throw ShapeError("contrastive: embeddings " + A.shape_str() + " vs " + B.shape_str());
    if (tau <= 0.0) throw ConfigError("contrastive temperature must be positive");
    std::size_t n = A.rows();
    for (std::size_t i = 0; i < n; ++i) {
        double na = 0.0, nb = 0.0;
        for (std::size_t j = 0; j < A.cols(); ++j) {
            na += A(i, j) * A(i, j);
            nb += B(i, j) * B(i, j);
        }
        if (na == 0.0 || nb == 0.0)
            throw NumericError("contrastive: zero-norm embedding at row " + std::to_string(i));
    }

    auto normalize = [&](Var e) {
        Var norms = t.sqrt_(t.row_sum(t.mul(e, e)));
        return t.div_colvec(e, norms);
    };
    Var an = normalize(ea);
    Var bn = normalize(eb);
    Var exp_aa = t.exp_(t.scale(t.matmul_nt(an, an), 1.0 / tau));
    Var exp_ab = t.exp_(t.scale(t.matmul_nt(an, bn), 1.0 / tau));

    Tensor eye({n, n});
    Tensor off_diag({n, n}, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
        eye(i, i) = 1.0;
        off_diag(i, i) = 0.0;
    }
    Var numer = t.row_sum(t.mul_const(exp_ab, eye));
    Var denom = t.add(t.row_sum(t.mul_const(exp_aa, off_diag)), t.row_sum(exp_ab));
    Var per_anchor = t.sub(t.log_(denom), t.log_(numer));  // = -log(num/den)
    return t.scale(t.sum_all(per_anchor), 1.0 / static_cast<double>(n));
}

/// lambda1 * l_s + lambda2 * l_u + lambda3 * l_c. Invalid Vars stand for
/// absent terms and contribute nothing.
inline Var total_loss_on_tape(Tape& t, Var ls, Var lu, Var lc, const LossWeights& w) {
    Var total = t.scale(ls, w.lambda1);
    if (lu.valid()) total = t.add(total, t.scale(lu, w.lambda2));
    if (lc.valid()) total = t.add(total, t.scale(lc, w.lambda3));
    return total;
}

// ---- plain values (for evaluation, logging and direct use) ----

inline double supervised_ce(const Tensor& probs, const Tensor& onehot) {
    Tape t;
    return t.value(supervised_ce_on_tape(t, t.leaf(probs), onehot))[0];
}

/// Elementwise mean of the two weak-view distributions.
inline Tensor average_distribution(const Tensor& pa, const Tensor& pb) {
    if (!pa.same_shape(pb))
        throw ShapeError("average_distribution: " + pa.shape_str() + " vs " + pb.shape_str());
    Tensor out = pa;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = 0.5 * (pa[i] + pb[i]);
    return out;
}

/// Pseudo-label cross-entropy; empty inputs (N_h = 0) give 0 by convention.
inline double unsupervised_ce(const Tensor& strong_probs, const Tensor& pseudo_onehot) {
    if (strong_probs.empty() && pseudo_onehot.empty()) return 0.0;
    Tape t;
    return t.value(unsupervised_ce_on_tape(t, t.leaf(strong_probs), pseudo_onehot))[0];
}

inline double cosine_sim(const Tensor& u, const Tensor& v) {
    if (u.size() != v.size())
        throw ShapeError("cosine_sim: " + u.shape_str() + " vs " + v.shape_str());
    double dot = 0.0, nu = 0.0, nv = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        dot += u[i] * v[i];
        nu += u[i] * u[i];
        nv += v[i] * v[i];
    }
    if (nu == 0.0 || nv == 0.0) throw NumericError("cosine_sim: zero-norm vector");
    return dot / (std::sqrt(nu) * std::sqrt(nv));
}

/// Contrastive loss value; N_l <= 1 gives 0 (for N_l = 1 the denominator
/// reduces to the numerator term, for N_l = 0 by convention).
inline double contrastive_loss(const Tensor& ea, const Tensor& eb, double tau) {
    if (ea.empty() && eb.empty()) return 0.0;
    Tape t;
    return t.value(contrastive_on_tape(t, t.leaf(ea), t.leaf(eb), tau))[0];
}

inline double total_loss(double ls, double lu, double lc, const LossWeights& w) {
    return w.lambda1 * ls + w.lambda2 * lu + w.lambda3 * lc;
}

}  // namespace adacm
