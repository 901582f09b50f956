#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "adacm/augment.hpp"
#include "adacm/autodiff.hpp"
#include "adacm/data.hpp"
#include "adacm/errors.hpp"
#include "adacm/losses.hpp"
#include "adacm/margin.hpp"
#include "adacm/metrics.hpp"
#include "adacm/nn.hpp"
#include "adacm/rng.hpp"
#include "adacm/tensor.hpp"

namespace adacm {

// End-to-end training loop. Per epoch: refresh per-class confidence margins
// on the weakly augmented labeled set, then per step pair one labeled batch
// with one unlabeled batch, build two weak views and (for the confident
// subset) one strong view per unlabeled sample, partition by the averaged
// two-view confidence, and take one combined optimizer step on the weighted
// three-term objective. Baseline modes reuse the same loop skeleton so that
// degenerate settings reproduce each other's parameter trajectories exactly.

enum class TrainMode {
    supervised,             // labeled cross-entropy only
    fixed_threshold,        // confident subset by a fixed cutoff, rest discarded
    ada_cm,                 // adaptive margins, all three terms
    ada_cm_no_contrastive,  // adaptive margins without the contrastive term
    contrastive_only,       // adaptive margins without the pseudo-label term
};

inline std::string mode_token(TrainMode m, double ft_value = 0.95) {
    switch (m) {
        case TrainMode::supervised: return "supervised";
        case TrainMode::fixed_threshold: {
            char buf[32];
            std::snprintf(buf, sizeof buf, "ft-%g", ft_value);
            return buf;
        }
        case TrainMode::ada_cm: return "ada-cm";
        case TrainMode::ada_cm_no_contrastive: return "ada-cm-no-contrastive";
        case TrainMode::contrastive_only: return "contrastive-only";
    }
    throw ConfigError("unknown train mode");
}

inline TrainMode mode_from_token(const std::string& tok, double* ft_value = nullptr) {
    if (tok == "supervised") return TrainMode::supervised;
    if (tok == "ada-cm") return TrainMode::ada_cm;
    if (tok == "ada-cm-no-contrastive") return TrainMode::ada_cm_no_contrastive;
    if (tok == "contrastive-only") return TrainMode::contrastive_only;
    if (tok.rfind("ft-", 0) == 0) {
        char* end = nullptr;
        double v = std::strtod(tok.c_str() + 3, &end);
        if (end != tok.c_str() + tok.size() || !(v > 0.0 && v < 1.0))
            throw ConfigError("fixed-threshold token '" + tok + "' needs a value in (0,1)");
        if (ft_value) *ft_value = v;
        return TrainMode::fixed_threshold;
    }
    throw ConfigError("unknown mode '" + tok + "'");
}

struct TrainConfig {
    TrainMode mode = TrainMode::ada_cm;
    double ft_value = 0.95;  // fixed-threshold mode only
    int epochs = 20;
    std::size_t labeled_batch = 16;
    std::size_t unlabeled_batch = 16;

    double learning_rate = 5e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_eps = 1e-8;

    LossWeights weights;       // lambda1..3 and tau
    double margin_cap = 0.97;  // ceiling B of the margin schedule
    double margin_gamma = M_E; // schedule base
    double margin_init = 0.8;  // first-epoch raw margin f

    std::uint64_t seed = 0;
    bool augment = true;        // identity views when off (for traced tests)
    double weak_scale = 0.05;   // vector jitter, fraction of per-dim std
    double strong_scale = 0.25;
    bool sequential_updates = false;  // one optimizer step per loss term

    ModelConfig model;
    std::string config_digest;  // carried into RunMetrics, set by the caller

    void validate() const {
        if (epochs < 1) throw ConfigError("epochs must be >= 1");
        if (labeled_batch < 1 || unlabeled_batch < 1)
            throw ConfigError("batch sizes must be >= 1");
        if (mode == TrainMode::fixed_threshold && !(ft_value > 0.0 && ft_value < 1.0))
            throw ConfigError("fixed threshold must lie in (0,1)");
        if (!(learning_rate > 0.0)) throw ConfigError("learning rate must be positive");
        if (!(weights.tau > 0.0)) throw ConfigError("temperature must be positive");
        if (!(margin_cap > 0.0 && margin_cap <= 1.0))
            throw ConfigError("margin cap must lie in (0,1]");
        if (!(margin_gamma > 1.0)) throw ConfigError("margin schedule base must exceed 1");
        if (!(margin_init > 0.0 && margin_init <= 1.0))
            throw ConfigError("initial margin must lie in (0,1]");
        if (weights.lambda1 < 0.0 || weights.lambda2 < 0.0 || weights.lambda3 < 0.0)
            throw ConfigError("loss weights must be non-negative");
    }

    /// Per-mode forced weights: baselines are exact weight degenerations of
    /// the full objective, so they share one code path.
    LossWeights effective_weights() const {
        LossWeights w = weights;
        switch (mode) {
            case TrainMode::supervised: w.lambda2 = 0.0; w.lambda3 = 0.0; break;
            case TrainMode::fixed_threshold: w.lambda3 = 0.0; break;
            case TrainMode::ada_cm_no_contrastive: w.lambda3 = 0.0; break;
            case TrainMode::contrastive_only: w.lambda2 = 0.0; break;
            case TrainMode::ada_cm: break;
        }
        return w;
    }
};

/// Confident subset by a fixed cutoff on max p̃, uniform across classes;
/// the remainder is reported as subset II but the fixed-threshold mode
/// discards it (no contrastive term).
inline Partition fixed_threshold_partition(const Tensor& avg_probs, double ft) {
    if (!(ft > 0.0 && ft < 1.0)) throw ConfigError("fixed threshold must lie in (0,1)");
    if (avg_probs.rank() != 2) throw ShapeError("expected [N,C] probabilities");
    Partition part;
    for (std::size_t i = 0; i < avg_probs.rows(); ++i) {
        std::size_t best = argmax_row(avg_probs, i);
        if (avg_probs(i, best) >= ft)
            part.subset1.push_back({i, static_cast<int>(best)});
        else
            part.subset2.push_back(i);
    }
    return part;
}

struct EvalResult {
    double accuracy = 0.0;
    std::vector<double> per_class;
};

/// Plain argmax accuracy on raw (never augmented) samples; ties break toward
/// the lowest class index. Classes absent from the test set score 0.
inline EvalResult evaluate(const ModelParams& params, const LabeledSet& test) {
    if (test.size() == 0) throw ConfigError("evaluate: empty test set");
    std::size_t classes = params.config.classes;
    ForwardOutput out = forward(params, stack(test.samples));
    EvalResult r;
    r.per_class.assign(classes, 0.0);
    std::vector<std::size_t> count(classes, 0), hit(classes, 0);
    for (std::size_t i = 0; i < test.size(); ++i) {
        int label = test.labels[i];
        if (label < 0 || static_cast<std::size_t>(label) >= classes)
            throw ShapeError("test label " + std::to_string(label) + " outside 0.." +
                             std::to_string(classes - 1));
        ++count[static_cast<std::size_t>(label)];
        if (argmax_row(out.probs, i) == static_cast<std::size_t>(label))
            ++hit[static_cast<std::size_t>(label)];
    }
    std::size_t total_hit = 0;
    for (std::size_t c = 0; c < classes; ++c) {
        total_hit += hit[c];
        r.per_class[c] = count[c] ? static_cast<double>(hit[c]) / static_cast<double>(count[c]) : 0.0;
    }
    r.accuracy = static_cast<double>(total_hit) / static_cast<double>(test.size());
    return r;
}

/// Frozen per-step inputs for one combined update: everything the loss needs
/// after augmentation and partitioning are done. Gradient checks reuse this
/// so the non-differentiable selection stays fixed while parameters move.
struct StepInputs {
    Tensor labeled_x;       // stacked weak labeled views
    Tensor labeled_onehot;  // [N, C]
    Tensor strong_x;        // stacked strong views of subset I (may be empty)
    Tensor pseudo_onehot;   // [N_h, C]
    Tensor contrast_a;      // stacked weak-a views of subset II (may be empty)
    Tensor contrast_b;      // stacked weak-b views of subset II
};

struct StepValues {
    double l_s = 0.0;
    std::optional<double> l_u;
    std::optional<double> l_c;
    double l_total = 0.0;
    std::vector<Tensor> grads;  // aligned with ModelParams::tensors
};

/// Builds the weighted objective on a fresh tape and (optionally) runs the
/// backward pass. Terms with zero weight are skipped entirely; an empty
/// subset contributes an exact zero with no gradient.
inline StepValues assemble_step(const ModelParams& params, const StepInputs& in,
                                const LossWeights& w, bool want_grads = true) {
    Tape tape;
    std::vector<Var> pv = params_on_tape(tape, params);
    StepValues out;

    ForwardVars lab = forward_on_tape(tape, params.config, pv, tape.leaf(in.labeled_x));
    Var ls = supervised_ce_on_tape(tape, lab.probs, in.labeled_onehot);
    out.l_s = tape.value(ls)[0];

    Var lu{}, lc{};
    if (w.lambda2 != 0.0) {
        if (!in.strong_x.empty()) {
            ForwardVars st = forward_on_tape(tape, params.config, pv, tape.leaf(in.strong_x));
            lu = unsupervised_ce_on_tape(tape, st.probs, in.pseudo_onehot);
            out.l_u = tape.value(lu)[0];
        } else {
            out.l_u = 0.0;
        }
    }
    if (w.lambda3 != 0.0) {
        std::size_t n2 = in.contrast_a.empty() ? 0 : in.contrast_a.rows();
        if (n2 >= 2) {
            ForwardVars fa = forward_on_tape(tape, params.config, pv, tape.leaf(in.contrast_a));
            ForwardVars fb = forward_on_tape(tape, params.config, pv, tape.leaf(in.contrast_b));
            lc = contrastive_on_tape(tape, fa.embedding, fb.embedding, w.tau);
            out.l_c = tape.value(lc)[0];
        } else {
            out.l_c = 0.0;  // a single pair scores zero by the formula
        }
    }

    Var total = total_loss_on_tape(tape, ls, lu, lc, w);
    out.l_total = tape.value(total)[0];
    if (want_grads) {
        tape.backward(total);
        out.grads = collect_grads(tape, pv);
    }
    return out;
}

/// Per-step trace for audits and traced-oracle tests. Indices are global
/// positions in the labeled/unlabeled pools; the partition is batch-local.
struct StepTrace {
    int epoch = 0;
    int step = 0;
    std::vector<std::size_t> labeled_batch;
    std::vector<std::size_t> unlabeled_batch;
    Partition partition;
    std::vector<Partition::PseudoLabeled> pseudo_global;
    double l_s = 0.0;
    std::optional<double> l_u;
    std::optional<double> l_c;
    double l_total = 0.0;
};

class TrainObserver {
public:
    virtual ~TrainObserver() = default;
    virtual void on_init(const ModelParams&) {}
    virtual void on_margins(int /*epoch*/, const std::vector<double>& /*raw*/,
                            const std::vector<double>& /*effective*/) {}
    virtual void on_step(const StepTrace&, const ModelParams& /*after*/) {}
    virtual void on_epoch(const EpochRecord&, const ModelParams&) {}
};

struct TrainResult {
    ModelParams params;
    RunMetrics metrics;
};

namespace trainer_detail {

constexpr std::uint64_t kTagInit = 0x494e4954ULL;      // model init stream
constexpr std::uint64_t kTagShuffleL = 0x5348464cULL;  // labeled order
constexpr std::uint64_t kTagShuffleU = 0x53484655ULL;  // unlabeled order

inline Tensor stack_rows(const std::vector<Tensor>& pool, const std::vector<std::size_t>& idx) {
    std::vector<Tensor> rows;
    rows.reserve(idx.size());
    for (std::size_t i : idx) rows.push_back(pool[i]);
    return stack(rows);
}

}  // namespace trainer_detail

/// Runs the full loop. The unlabeled pool drives the epoch length whenever it
/// is non-empty (every unlabeled sample is visited once per epoch; the
/// labeled stream reshuffles and recycles), so weight-degenerate modes walk
/// identical step grids. `initial` overrides the seeded parameter init.
inline TrainResult train(const TrainConfig& cfg, const LabeledSet& S, const UnlabeledSet& U,
                         const LabeledSet& test, TrainObserver* obs = nullptr,
                         const ModelParams* initial = nullptr) {
    using namespace trainer_detail;
    cfg.validate();
    if (S.size() == 0) throw ConfigError("training needs at least one labeled sample");
    if (S.size() != S.labels.size()) throw ConfigError("labeled set: samples/labels mismatch");
    if (test.size() == 0) throw ConfigError("training needs a non-empty test set");
    const std::size_t classes = cfg.model.classes;
    for (int l : S.labels)
        if (l < 0 || static_cast<std::size_t>(l) >= classes)
            throw ConfigError("labeled class " + std::to_string(l) + " outside model range");

    LossWeights w = cfg.effective_weights();
    const bool margin_modes = cfg.mode == TrainMode::ada_cm ||
                              cfg.mode == TrainMode::ada_cm_no_contrastive ||
                              cfg.mode == TrainMode::contrastive_only;
    const bool uses_unlabeled = cfg.mode != TrainMode::supervised && U.size() > 0;

    ModelParams params;
    if (initial) {
        if (initial->config.classes != classes)
            throw ConfigError("initial parameters disagree with the model config");
        params = *initial;
    } else {
        RngStream init_rng(derive_key(cfg.seed, {kTagInit}));
        params = init_params(cfg.model, init_rng);
    }
    AdamState adam = AdamState::create(params, cfg.learning_rate, cfg.beta1, cfg.beta2,
                                       cfg.adam_eps);
    if (obs) obs->on_init(params);

    // augmentation policies; vector policies scale the pooled per-dim std
    const bool image_samples = S.samples.front().rank() >= 2;
    AugmentPolicy weak_pol, strong_pol;
    if (image_samples) {
        weak_pol = weak_image_policy();
        strong_pol = strong_image_policy();
    } else {
        std::vector<Tensor> pool = S.samples;
        pool.insert(pool.end(), U.samples.begin(), U.samples.end());
        std::vector<double> sd = per_dim_std(pool);
        weak_pol = weak_vector_policy(sd, cfg.weak_scale);
        strong_pol = strong_vector_policy(sd, cfg.strong_scale);
    }
    auto view = [&](const std::vector<Tensor>& pool, std::size_t idx, int epoch,
                    const AugmentPolicy& pol, std::uint64_t view_id) {
        if (!cfg.augment) return pool[idx];
        RngStream rng = augment_stream(cfg.seed, pol, static_cast<std::uint64_t>(epoch), idx,
                                       view_id);
        return pol.kind == PolicyKind::weak ? weak_augment(pool[idx], pol, rng)
                                            : strong_augment(pool[idx], pol, rng);
    };

    ConfidenceMargin margin =
        ConfidenceMargin::create(classes, cfg.margin_init, cfg.margin_cap, cfg.margin_gamma);

    RunMetrics metrics;
    metrics.classes = classes;
    metrics.mode = mode_token(cfg.mode, cfg.ft_value);
    metrics.seed = cfg.seed;
    metrics.config_digest = cfg.config_digest;

    const std::size_t steps_per_epoch =
        uses_unlabeled || (cfg.mode == TrainMode::supervised && U.size() > 0)
            ? (U.size() + cfg.unlabeled_batch - 1) / cfg.unlabeled_batch
            : (S.size() + cfg.labeled_batch - 1) / cfg.labeled_batch;

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        // one weak view per labeled sample; serves the margin pass and every
        // labeled training batch this epoch
        std::vector<Tensor> weak_labeled(S.size());
        for (std::size_t i = 0; i < S.size(); ++i)
            weak_labeled[i] = view(S.samples, i, epoch, weak_pol, 0);

        std::vector<double> eff;
        if (margin_modes) {
            ForwardOutput mp = forward(params, stack(weak_labeled));
            margin.raw = compute_raw_margins(collect_correct(mp.probs, S.labels), classes,
                                             margin.raw);
            eff = effective_margins(margin, epoch);
            if (obs) obs->on_margins(epoch, margin.raw, eff);
        }

        std::vector<std::size_t> labeled_order(S.size());
        for (std::size_t i = 0; i < S.size(); ++i) labeled_order[i] = i;
        RngStream shuffle_l(derive_key(cfg.seed, {kTagShuffleL, static_cast<std::uint64_t>(epoch)}));
        shuffle_l.shuffle(labeled_order);
        std::size_t cursor = 0;
        auto next_labeled = [&]() {
            if (cursor == labeled_order.size()) {
                shuffle_l.shuffle(labeled_order);
                cursor = 0;
            }
            return labeled_order[cursor++];
        };

        std::vector<std::size_t> unlabeled_order(U.size());
        for (std::size_t i = 0; i < U.size(); ++i) unlabeled_order[i] = i;
        RngStream shuffle_u(derive_key(cfg.seed, {kTagShuffleU, static_cast<std::uint64_t>(epoch)}));
        shuffle_u.shuffle(unlabeled_order);

        double sum_ls = 0.0, sum_lu = 0.0, sum_lc = 0.0, sum_total = 0.0;
        bool any_lu = false, any_lc = false;
        std::size_t seen_unlabeled = 0, seen_subset1 = 0, pseudo_hits_denom = 0;
        double pseudo_hits = 0.0;

        for (std::size_t step = 0; step < steps_per_epoch; ++step) {
            StepTrace trace;
            trace.epoch = epoch;
            trace.step = static_cast<int>(step);

            trace.labeled_batch.resize(cfg.labeled_batch);
            for (std::size_t i = 0; i < cfg.labeled_batch; ++i)
                trace.labeled_batch[i] = next_labeled();

            StepInputs in;
            in.labeled_x = stack_rows(weak_labeled, trace.labeled_batch);
            std::vector<int> batch_labels;
            for (std::size_t i : trace.labeled_batch) batch_labels.push_back(S.labels[i]);
            in.labeled_onehot = one_hot_rows(batch_labels, classes);

            if (uses_unlabeled) {
                std::size_t lo = step * cfg.unlabeled_batch;
                std::size_t hi = std::min(lo + cfg.unlabeled_batch, U.size());
                trace.unlabeled_batch.assign(unlabeled_order.begin() + lo,
                                             unlabeled_order.begin() + hi);

                std::vector<Tensor> va, vb;
                for (std::size_t gi : trace.unlabeled_batch) {
                    va.push_back(view(U.samples, gi, epoch, weak_pol, 1));
                    vb.push_back(view(U.samples, gi, epoch, weak_pol, 2));
                }
                Tensor pa = forward(params, stack(va)).probs;
                Tensor pb = forward(params, stack(vb)).probs;
                Tensor avg = average_distribution(pa, pb);

                trace.partition = cfg.mode == TrainMode::fixed_threshold
                                      ? fixed_threshold_partition(avg, cfg.ft_value)
                                      : partition_batch(avg, margin, epoch);
                for (const auto& p : trace.partition.subset1)
                    trace.pseudo_global.push_back({trace.unlabeled_batch[p.index], p.label});

                seen_unlabeled += trace.unlabeled_batch.size();
                seen_subset1 += trace.partition.high_count();
                if (!trace.pseudo_global.empty()) {
                    pseudo_hits += pseudo_label_precision(trace.pseudo_global, U.sealed) *
                                   static_cast<double>(trace.pseudo_global.size());
                    pseudo_hits_denom += trace.pseudo_global.size();
                }

                if (w.lambda2 != 0.0 && trace.partition.high_count() > 0) {
                    std::vector<Tensor> vs;
                    std::vector<int> pseudo;
                    for (const auto& p : trace.partition.subset1) {
                        vs.push_back(view(U.samples, trace.unlabeled_batch[p.index], epoch,
                                          strong_pol, 3));
                        pseudo.push_back(p.label);
                    }
                    in.strong_x = stack(vs);
                    in.pseudo_onehot = one_hot_rows(pseudo, classes);
                }
                if (w.lambda3 != 0.0 && trace.partition.low_count() >= 2) {
                    std::vector<Tensor> ca, cb;
                    for (std::size_t local : trace.partition.subset2) {
                        ca.push_back(va[local]);
                        cb.push_back(vb[local]);
                    }
                    in.contrast_a = stack(ca);
                    in.contrast_b = stack(cb);
                }
            }

            StepValues vals;
            if (!cfg.sequential_updates) {
                vals = assemble_step(params, in, w);
                if (!std::isfinite(vals.l_total))
                    throw TrainingDiverged(epoch, static_cast<int>(step),
                                           "l_s=" + std::to_string(vals.l_s) +
                                               " l_u=" + std::to_string(vals.l_u.value_or(0.0)) +
                                               " l_c=" + std::to_string(vals.l_c.value_or(0.0)));
                adam_update(params, vals.grads, adam);
            } else {
                // one optimizer step per term, in objective order, each on the
                // unweighted term with the partition frozen from the pre-step
                // parameters
                LossWeights only;
                only.tau = w.tau;
                only.lambda1 = 1.0;
                only.lambda2 = 0.0;
                only.lambda3 = 0.0;
                StepValues s1 = assemble_step(params, in, only);
                adam_update(params, s1.grads, adam);
                vals.l_s = s1.l_s;
                if (w.lambda2 != 0.0) {
                    only.lambda1 = 0.0;
                    only.lambda2 = 1.0;
                    StepValues s2 = assemble_step(params, in, only);
                    adam_update(params, s2.grads, adam);
                    vals.l_u = s2.l_u;
                    only.lambda2 = 0.0;
                }
                if (w.lambda3 != 0.0) {
                    only.lambda1 = 0.0;
                    only.lambda3 = 1.0;
                    StepValues s3 = assemble_step(params, in, only);
                    adam_update(params, s3.grads, adam);
                    vals.l_c = s3.l_c;
                }
                vals.l_total = w.lambda1 * vals.l_s + w.lambda2 * vals.l_u.value_or(0.0) +
                               w.lambda3 * vals.l_c.value_or(0.0);
                if (!std::isfinite(vals.l_total))
                    throw TrainingDiverged(epoch, static_cast<int>(step),
                                           "l_s=" + std::to_string(vals.l_s) +
                                               " l_u=" + std::to_string(vals.l_u.value_or(0.0)) +
                                               " l_c=" + std::to_string(vals.l_c.value_or(0.0)));
            }

            sum_ls += vals.l_s;
            sum_total += vals.l_total;
            if (vals.l_u) {
                sum_lu += *vals.l_u;
                any_lu = true;
            }
            if (vals.l_c) {
                sum_lc += *vals.l_c;
                any_lc = true;
            }

            trace.l_s = vals.l_s;
            trace.l_u = vals.l_u;
            trace.l_c = vals.l_c;
            trace.l_total = vals.l_total;
            if (obs) obs->on_step(trace, params);
        }

        EpochRecord row;
        row.epoch = epoch;
        double n_steps = static_cast<double>(steps_per_epoch);
        row.l_s = sum_ls / n_steps;
        row.l_total = sum_total / n_steps;
        if (any_lu) row.l_u = sum_lu / n_steps;
        if (any_lc) row.l_c = sum_lc / n_steps;
        if (margin_modes) {
            row.margin_raw = margin.raw;
            row.margin_eff = eff;
        }
        if (seen_unlabeled > 0) {
            row.subset1_frac =
                static_cast<double>(seen_subset1) / static_cast<double>(seen_unlabeled);
            if (cfg.mode == TrainMode::fixed_threshold) row.discard_frac = 1.0 - *row.subset1_frac;
            if (pseudo_hits_denom > 0)
                row.pseudo_precision = pseudo_hits / static_cast<double>(pseudo_hits_denom);
        }
        EvalResult ev = evaluate(params, test);
        row.test_acc = ev.accuracy;
        row.acc_class = ev.per_class;
        metrics.epochs.push_back(row);
        if (obs) obs->on_epoch(metrics.epochs.back(), params);
    }

    return TrainResult{std::move(params), std::move(metrics)};
}

}  // namespace adacm
