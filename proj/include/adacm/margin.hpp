#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "adacm/errors.hpp"
#include "adacm/tensor.hpp"

namespace adacm {

// Adaptive confidence margin: per-class thresholds learned from the labeled
// samples the model currently predicts correctly, ramped over epochs, and
// used to split every unlabeled batch into a pseudo-labeled subset and a
// contrastive subset.

/// A labeled sample whose predicted class matched its ground truth.
/// `confidence` is the predicted probability of that class (the row max).
struct CorrectPrediction {
    std::size_t sample_id = 0;
    int predicted = 0;
    double confidence = 0.0;
};

/// Per-class raw margins plus the schedule constants. The effective margin
/// at epoch t is cap * raw / (1 + gamma^-t): half the capped raw value at
/// t = 0, approaching cap * raw from below as t grows.
struct ConfidenceMargin {
    std::vector<double> raw;     // one entry per class
    double cap = 0.97;           // B
    double gamma = M_E;          // schedule base, > 1
    double initial = 0.8;        // raw margin before any class has evidence

    static ConfidenceMargin create(std::size_t classes, double initial = 0.8, double cap = 0.97,
                                   double gamma = M_E) {
        ConfidenceMargin m;
        m.raw.assign(classes, initial);
        m.cap = cap;
        m.gamma = gamma;
        m.initial = initial;
        return m;
    }
    std::size_t classes() const { return raw.size(); }
};

/// Batch partition: subset I carries hard pseudo labels (argmax of the
/// averaged two-view distribution), subset II is everything below margin.
struct Partition {
    struct PseudoLabeled {
        std::size_t index = 0;  // position in the batch (or a global id when
                                // accumulated across batches)
        int label = 0;
    };
    std::vector<PseudoLabeled> subset1;
    std::vector<std::size_t> subset2;

    std::size_t high_count() const { return subset1.size(); }
    std::size_t low_count() const { return subset2.size(); }
};

/// Filters a batch of labeled predictions down to the correctly predicted
/// ones. Argmax ties break toward the lowest class index, so a tie counts as
/// correct only when the true class wins the tie-break.
inline std::vector<CorrectPrediction> collect_correct(const Tensor& probs,
                                                      const std::vector<int>& labels) {
    if (probs.rank() != 2 || probs.rows() != labels.size())
        throw ShapeError("collect_correct: " + std::to_string(labels.size()) +
                         " labels for probability rows " + probs.shape_str());
    std::vector<CorrectPrediction> out;
    for (std::size_t i = 0; i < probs.rows(); ++i) {
        int pred = static_cast<int>(argmax_row(probs, i));
        if (pred == labels[i])
            out.push_back({i, pred, probs(i, static_cast<std::size_t>(labels[i]))});
    }
    return out;
}

/// Mean confidence per predicted class. Classes with no correct predictions
/// keep their previous raw margin (the mean is undefined there, and holding
/// avoids collapsing the threshold to an admit-everything or admit-nothing
/// extreme).
inline std::vector<double> compute_raw_margins(const std::vector<CorrectPrediction>& correct,
                                               std::size_t classes,
                                               const std::vector<double>& previous) {
    if (previous.size() != classes)
        throw ShapeError("compute_raw_margins: previous margins size " +
                         std::to_string(previous.size()) + " != classes " + std::to_string(classes));
    std::vector<double> sum(classes, 0.0);
    std::vector<std::size_t> count(classes, 0);
    for (const auto& cp : correct) {
        if (cp.predicted < 0 || static_cast<std::size_t>(cp.predicted) >= classes)
            throw ShapeError("correct prediction class out of range");
        sum[static_cast<std::size_t>(cp.predicted)] += cp.confidence;
        count[static_cast<std::size_t>(cp.predicted)] += 1;
    }
    std::vector<double> raw(classes);
    for (std::size_t c = 0; c < classes; ++c)
        raw[c] = count[c] > 0 ? sum[c] / static_cast<double>(count[c]) : previous[c];
    return raw;
}

/// Effective threshold for one class at epoch t (0-based).
inline double effective_margin(const ConfidenceMargin& m, std::size_t cls, int epoch) {
    if (cls >= m.raw.size()) throw ShapeError("effective_margin: class index out of range");
    if (epoch < 0) throw ConfigError("effective_margin: epoch must be >= 0");
    return m.cap * m.raw[cls] / (1.0 + std::pow(m.gamma, -static_cast<double>(epoch)));
}

inline std::vector<double> effective_margins(const ConfidenceMargin& m, int epoch) {
    std::vector<double> out(m.classes());
    for (std::size_t c = 0; c < m.classes(); ++c) out[c] = effective_margin(m, c, epoch);
    return out;
}

/// Splits an unlabeled batch by comparing each sample's confidence score
/// (max of its averaged distribution) against the effective margin of its
/// argmax class. The boundary is inclusive: score == margin joins subset I.
inline Partition partition_batch(const Tensor& avg_probs, const ConfidenceMargin& m, int epoch) {
    if (avg_probs.rank() != 2 || avg_probs.cols() != m.classes())
        throw ShapeError("partition_batch: rows " + avg_probs.shape_str() + " vs " +
                         std::to_string(m.classes()) + " classes");
    Partition part;
    for (std::size_t i = 0; i < avg_probs.rows(); ++i) {
        std::size_t cls = argmax_row(avg_probs, i);
        double score = avg_probs(i, cls);
        if (score >= effective_margin(m, cls, epoch))
            part.subset1.push_back({i, static_cast<int>(cls)});
        else
            part.subset2.push_back(i);
    }
    return part;
}

}  // namespace adacm
