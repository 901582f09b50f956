#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "adacm/errors.hpp"
#include "adacm/margin.hpp"
#include "adacm/rng.hpp"
#include "adacm/tensor.hpp"

namespace adacm {

// Dataset ingestion, deterministic train/test + labeled/unlabeled splitting,
// and a synthetic Gaussian-cluster benchmark for fast end-to-end runs.

/// Raw dataset as loaded: labels use the external 1..C convention. Internal
/// training structures below switch to 0-based class indices at split time.
struct Dataset {
    std::vector<Tensor> samples;
    std::vector<int> labels;  // 1..classes
    std::size_t classes = 0;
    std::string tag;

    std::size_t size() const { return samples.size(); }

    void validate() const {
        if (samples.size() != labels.size())
            throw FormatError("dataset has " + std::to_string(samples.size()) + " samples but " +
                              std::to_string(labels.size()) + " labels");
        if (classes < 2) throw FormatError("dataset needs at least 2 classes");
        for (std::size_t i = 0; i < labels.size(); ++i) {
            if (labels[i] < 1 || static_cast<std::size_t>(labels[i]) > classes)
                throw FormatError("label " + std::to_string(labels[i]) + " at record " +
                                  std::to_string(i) + " outside 1.." + std::to_string(classes));
            if (!samples[i].same_shape(samples.front()))
                throw FormatError("sample " + std::to_string(i) + " has shape " +
                                  samples[i].shape_str() + ", expected " +
                                  samples.front().shape_str());
        }
    }
};

struct SplitSpec {
    std::size_t labeled_count = 0;  // N_s
    double test_fraction = 0.0;
    std::uint64_t seed = 0;
    bool class_balanced = true;
};

class SealedLabels;
double pseudo_label_precision(const std::vector<Partition::PseudoLabeled>& pseudo,
                              const SealedLabels& truth);

/// Ground truth of the unlabeled pool, reachable only through the precision
/// metric. The trainer receives an UnlabeledSet and has no typed way to read
/// these values.
class SealedLabels {
public:
    SealedLabels() = default;
    explicit SealedLabels(std::vector<int> zero_based) : labels_(std::move(zero_based)) {}

    std::size_t size() const { return labels_.size(); }

private:
    std::vector<int> labels_;  // 0-based

    friend double pseudo_label_precision(const std::vector<Partition::PseudoLabeled>& pseudo,
                                         const SealedLabels& truth);
};

/// Fraction of pseudo labels matching the sealed ground truth; NaN when the
/// pseudo-labeled set is empty. Indices are positions in the unlabeled pool.
inline double pseudo_label_precision(const std::vector<Partition::PseudoLabeled>& pseudo,
                                     const SealedLabels& truth) {
    if (pseudo.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::size_t hit = 0;
    for (const auto& p : pseudo) {
        if (p.index >= truth.labels_.size())
            throw AuditError("pseudo-label index " + std::to_string(p.index) +
                             " outside unlabeled pool of " + std::to_string(truth.labels_.size()));
        if (p.label == truth.labels_[p.index]) ++hit;
    }
    return static_cast<double>(hit) / static_cast<double>(pseudo.size());
}

struct LabeledSet {
    std::vector<Tensor> samples;
    std::vector<int> labels;  // 0-based
    std::size_t size() const { return samples.size(); }
};

struct UnlabeledSet {
    std::vector<Tensor> samples;
    SealedLabels sealed;
    std::size_t size() const { return samples.size(); }
};

struct SplitResult {
    LabeledSet labeled;
    UnlabeledSet unlabeled;
    LabeledSet test;
    std::size_t classes = 0;

    // original dataset positions, for audit tests
    std::vector<std::size_t> labeled_indices;
    std::vector<std::size_t> unlabeled_indices;
    std::vector<std::size_t> test_indices;
};

/// Deterministic split: shuffles indices with a stream derived from the spec
/// seed, carves off the test slice, then picks the labeled subset (optionally
/// class-balanced) from the remaining pool. Everything else becomes the
/// unlabeled pool with its labels sealed.
inline SplitResult split(const Dataset& d, const SplitSpec& spec) {
    d.validate();
    if (spec.test_fraction < 0.0 || spec.test_fraction >= 1.0)
        throw ConfigError("test fraction must lie in [0, 1)");
    std::size_t n = d.size();
    std::size_t n_test = static_cast<std::size_t>(spec.test_fraction * static_cast<double>(n) + 0.5);
    if (n_test >= n && spec.labeled_count > 0) throw ConfigError("test slice consumes every sample");
    std::size_t n_train = n - n_test;
    if (spec.labeled_count > n_train)
        throw ConfigError("labeled count " + std::to_string(spec.labeled_count) +
                          " exceeds training pool of " + std::to_string(n_train));
    if (spec.class_balanced && spec.labeled_count % d.classes != 0)
        throw ConfigError("class-balanced labeled count " + std::to_string(spec.labeled_count) +
                          " is not divisible by " + std::to_string(d.classes) + " classes");

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    RngStream rng(derive_key(spec.seed, {0x53504c4954ULL}));  // "SPLIT"
    rng.shuffle(order);

    SplitResult r;
    r.classes = d.classes;
    r.test_indices.assign(order.begin(), order.begin() + n_test);
    std::vector<std::size_t> pool(order.begin() + n_test, order.end());

    std::vector<char> picked(n, 0);
    if (spec.class_balanced) {
        std::size_t quota = spec.labeled_count / d.classes;
        std::vector<std::size_t> have(d.classes, 0);
        for (std::size_t idx : pool) {
            std::size_t c = static_cast<std::size_t>(d.labels[idx] - 1);
            if (have[c] < quota) {
                ++have[c];
                picked[idx] = 1;
                r.labeled_indices.push_back(idx);
            }
        }
        for (std::size_t c = 0; c < d.classes; ++c)
            if (have[c] < quota)
                throw ConfigError("class " + std::to_string(c + 1) + " has only " +
                                  std::to_string(have[c]) + " training samples, quota " +
                                  std::to_string(quota));
    } else {
        for (std::size_t i = 0; i < spec.labeled_count; ++i) {
            picked[pool[i]] = 1;
            r.labeled_indices.push_back(pool[i]);
        }
    }
    for (std::size_t idx : pool)
        if (!picked[idx]) r.unlabeled_indices.push_back(idx);

    std::vector<int> sealed;
    for (std::size_t idx : r.labeled_indices) {
        r.labeled.samples.push_back(d.samples[idx]);
        r.labeled.labels.push_back(d.labels[idx] - 1);
    }
    for (std::size_t idx : r.unlabeled_indices) {
        r.unlabeled.samples.push_back(d.samples[idx]);
        sealed.push_back(d.labels[idx] - 1);
    }
    for (std::size_t idx : r.test_indices) {
        r.test.samples.push_back(d.samples[idx]);
        r.test.labels.push_back(d.labels[idx] - 1);
    }
    r.unlabeled.sealed = SealedLabels(std::move(sealed));
    return r;
}

/// Per-dimension population standard deviation over flattened samples.
inline std::vector<double> per_dim_std(const std::vector<Tensor>& samples) {
    if (samples.empty()) return {};
    std::size_t d = samples.front().size();
    std::vector<double> mean(d, 0.0), var(d, 0.0);
    for (const Tensor& s : samples)
        for (std::size_t j = 0; j < d; ++j) mean[j] += s[j];
    for (double& m : mean) m /= static_cast<double>(samples.size());
    for (const Tensor& s : samples)
        for (std::size_t j = 0; j < d; ++j) {
            double c = s[j] - mean[j];
            var[j] += c * c;
        }
    std::vector<double> out(d);
    for (std::size_t j = 0; j < d; ++j)
        out[j] = std::sqrt(var[j] / static_cast<double>(samples.size()));
    return out;
}

// ---- synthetic benchmark ----

struct SynthSpec {
    std::uint64_t seed = 0;
    std::size_t classes = 4;
    std::size_t per_class = 600;
    std::size_t dim = 16;
    double difficulty = 0.6;  // in (0, 1]; smaller = farther-apart clusters
};

namespace synth_detail {

/// Fixed cluster geometry, scaled by 1/difficulty. Classes sit on distinct
/// coordinate pairs; the last class leans toward its neighbour so the two
/// overlap more, and noise scale grows with the class index. Both effects
/// make per-class difficulty (and so model confidence) intentionally unequal.
inline std::vector<std::vector<double>> centroids(const SynthSpec& s) {
    std::vector<std::vector<double>> c(s.classes, std::vector<double>(s.dim, 0.0));
    double sep = 2.2 / s.difficulty;
    for (std::size_t k = 0; k < s.classes; ++k) {
        std::size_t a = (2 * k) % s.dim;
        std::size_t b = (2 * k + 1) % s.dim;
        c[k][a] += sep * M_SQRT1_2;
        c[k][b] += sep * M_SQRT1_2;
        if (k + 1 == s.classes && s.classes >= 2) {
            // pull the hardest class toward the previous one
            std::size_t pa = (2 * (k - 1)) % s.dim;
            std::size_t pb = (2 * (k - 1) + 1) % s.dim;
            c[k][pa] += 0.55 * sep * M_SQRT1_2;
            c[k][pb] += 0.55 * sep * M_SQRT1_2;
        }
    }
    return c;
}

inline std::vector<std::vector<double>> noise_scales(const SynthSpec& s) {
    std::vector<std::vector<double>> sig(s.classes, std::vector<double>(s.dim, 1.0));
    for (std::size_t k = 0; k < s.classes; ++k) {
        double base = 0.8 + 0.45 * static_cast<double>(k);  // harder classes are noisier
        for (std::size_t j = 0; j < s.dim; ++j) {
            double aniso = 0.6 + 0.8 * static_cast<double>((j + k) % 4) / 3.0;
            sig[k][j] = base * aniso;
        }
    }
    return sig;
}

}  // namespace synth_detail

/// Gaussian class clusters with per-class anisotropic noise and unequal
/// overlap. Samples are drawn from per-class streams, so the layout depends
/// only on (seed, spec), and appear grouped by class (callers shuffle via
/// split()). Labels are 1..C.
inline Dataset synth_benchmark(const SynthSpec& spec) {
    if (spec.difficulty <= 0.0 || spec.difficulty > 1.0)
        throw ConfigError("difficulty must lie in (0, 1]");
    if (spec.classes < 2 || spec.dim == 0 || spec.per_class == 0)
        throw ConfigError("synth benchmark needs >= 2 classes and nonzero dim/per_class");
    auto mu = synth_detail::centroids(spec);
    auto sig = synth_detail::noise_scales(spec);
    Dataset d;
    d.classes = spec.classes;
    d.tag = "synth";
    for (std::size_t k = 0; k < spec.classes; ++k) {
        RngStream rng(derive_key(spec.seed, {0x53594e5448ULL, k}));  // "SYNTH", class
        for (std::size_t i = 0; i < spec.per_class; ++i) {
            Tensor x({spec.dim});
            for (std::size_t j = 0; j < spec.dim; ++j)
                x[j] = mu[k][j] + sig[k][j] * rng.gaussian();
            d.samples.push_back(std::move(x));
            d.labels.push_back(static_cast<int>(k) + 1);
        }
    }
    return d;
}

// ---- file formats ----

enum class DatasetFormat { idx, manifest, delimited };

namespace data_detail {

struct ByteReader {
    const std::string& buf;
    std::size_t pos = 0;

    std::uint8_t u8(const char* what) {
        if (pos >= buf.size())
            throw FormatError(std::string("unexpected end of file reading ") + what +
                              " at byte " + std::to_string(pos));
        return static_cast<std::uint8_t>(buf[pos++]);
    }

    std::uint32_t u32be(const char* what) {
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v = (v << 8) | u8(what);
        return v;
    }

    std::int32_t i32be(const char* what) { return static_cast<std::int32_t>(u32be(what)); }

    double f64be(const char* what) {
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v = (v << 8) | u8(what);
        double d;
        static_assert(sizeof(d) == sizeof(v));
        std::memcpy(&d, &v, sizeof(d));
        return d;
    }
};

inline void put_u32be(std::string& out, std::uint32_t v) {
    for (int i = 3; i >= 0; --i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline void put_f64be(std::string& out, double d) {
    std::uint64_t v;
    std::memcpy(&v, &d, sizeof(v));
    for (int i = 7; i >= 0; --i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline std::string slurp(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

inline std::vector<std::string> tokenize(const std::string& line) {
    std::vector<std::string> toks;
    std::string cur;
    for (char ch : line) {
        if (ch == ' ' || ch == '\t' || ch == ',' || ch == ';' || ch == '\r') {
            if (!cur.empty()) toks.push_back(std::move(cur)), cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    if (!cur.empty()) toks.push_back(std::move(cur));
    return toks;
}

inline bool is_number(const std::string& s) {
    if (s.empty()) return false;
    char* end = nullptr;
    std::strtod(s.c_str(), &end);
    return end == s.c_str() + s.size();
}

inline double parse_num(const std::string& s, std::size_t line_no) {
    char* end = nullptr;
    double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size())
        throw FormatError("line " + std::to_string(line_no) + ": cannot parse number '" + s + "'");
    return v;
}

inline int parse_label(const std::string& s, std::size_t line_no) {
    double v = parse_num(s, line_no);
    int i = static_cast<int>(v);
    if (static_cast<double>(i) != v || i < 1)
        throw FormatError("line " + std::to_string(line_no) + ": label '" + s +
                          "' is not a positive integer");
    return i;
}

/// Standardizes flattened vector samples in place: per-dimension zero mean,
/// unit population std (constant dims are only centered).
inline void standardize(std::vector<Tensor>& rows) {
    if (rows.empty()) return;
    std::vector<double> sd = per_dim_std(rows);
    std::size_t d = rows.front().size();
    std::vector<double> mean(d, 0.0);
    for (const Tensor& r : rows)
        for (std::size_t j = 0; j < d; ++j) mean[j] += r[j];
    for (double& m : mean) m /= static_cast<double>(rows.size());
    for (Tensor& r : rows)
        for (std::size_t j = 0; j < d; ++j)
            r[j] = (r[j] - mean[j]) / (sd[j] > 0.0 ? sd[j] : 1.0);
}

/// Minimal PGM reader (P2 ASCII / P5 binary, maxval <= 65535), normalized
/// to [0,1], shape [H,W].
inline Tensor load_pgm(const std::string& path) {
    std::string buf = slurp(path);
    std::size_t pos = 0;
    auto skip_ws = [&] {
        while (pos < buf.size()) {
            if (std::isspace(static_cast<unsigned char>(buf[pos]))) {
                ++pos;
            } else if (buf[pos] == '#') {
                while (pos < buf.size() && buf[pos] != '\n') ++pos;
            } else {
                break;
            }
        }
    };
    auto next_int = [&](const char* what) -> long {
        skip_ws();
        std::size_t start = pos;
        while (pos < buf.size() && std::isdigit(static_cast<unsigned char>(buf[pos]))) ++pos;
        if (pos == start)
            throw FormatError(path + ": expected " + std::string(what) + " at byte " +
                              std::to_string(start));
        return std::strtol(buf.substr(start, pos - start).c_str(), nullptr, 10);
    };
    if (buf.size() < 2 || buf[0] != 'P' || (buf[1] != '2' && buf[1] != '5'))
        throw FormatError(path + ": not a P2/P5 raster (byte 0)");
    bool binary = buf[1] == '5';
    pos = 2;
    long w = next_int("width"), h = next_int("height"), maxv = next_int("maxval");
    if (w <= 0 || h <= 0 || maxv <= 0 || maxv > 65535)
        throw FormatError(path + ": bad raster geometry " + std::to_string(w) + "x" +
                          std::to_string(h) + " maxval " + std::to_string(maxv));
    Tensor img({static_cast<std::size_t>(h), static_cast<std::size_t>(w)});
    if (binary) {
        ++pos;  // single whitespace after maxval
        int bytes = maxv > 255 ? 2 : 1;
        for (std::size_t i = 0; i < img.size(); ++i) {
            if (pos + bytes > buf.size())
                throw FormatError(path + ": truncated pixel data at byte " + std::to_string(pos));
            long v = static_cast<std::uint8_t>(buf[pos++]);
            if (bytes == 2) v = (v << 8) | static_cast<std::uint8_t>(buf[pos++]);
            img[i] = static_cast<double>(v) / static_cast<double>(maxv);
        }
    } else {
        for (std::size_t i = 0; i < img.size(); ++i)
            img[i] = static_cast<double>(next_int("pixel")) / static_cast<double>(maxv);
    }
    return img;
}

}  // namespace data_detail

/// Writes the dataset as two back-to-back idx-style records (float64 samples,
/// then int32 labels); all integers and payload bytes are big-endian.
inline void write_idx(const Dataset& d, const std::string& path) {
    d.validate();
    using namespace data_detail;
    std::string out;
    out.push_back(0);
    out.push_back(0);
    out.push_back(0x0e);  // float64
    const auto& shape = d.samples.front().shape();
    out.push_back(static_cast<char>(shape.size() + 1));
    put_u32be(out, static_cast<std::uint32_t>(d.size()));
    for (std::size_t e : shape) put_u32be(out, static_cast<std::uint32_t>(e));
    for (const Tensor& s : d.samples)
        for (double v : s.values()) put_f64be(out, v);
    out.push_back(0);
    out.push_back(0);
    out.push_back(0x0c);  // int32
    out.push_back(1);
    put_u32be(out, static_cast<std::uint32_t>(d.size()));
    for (int l : d.labels) put_u32be(out, static_cast<std::uint32_t>(l));

    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open " + path + " for writing");
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!f) throw IoError("write failed for " + path);
}

inline Dataset load_idx(const std::string& path) {
    using namespace data_detail;
    std::string buf = slurp(path);
    ByteReader r{buf};
    Dataset d;
    d.tag = "idx:" + std::filesystem::path(path).filename().string();

    if (r.u8("magic") != 0 || r.u8("magic") != 0)
        throw FormatError(path + ": bad magic at byte 0");
    if (r.u8("dtype") != 0x0e)
        throw FormatError(path + ": sample record is not float64 (byte 2)");
    int ndim = r.u8("rank");
    if (ndim < 2 || ndim > 4) throw FormatError(path + ": sample rank " + std::to_string(ndim));
    std::vector<std::size_t> extents(static_cast<std::size_t>(ndim));
    for (auto& e : extents) e = r.u32be("extent");
    std::size_t n = extents[0];
    std::vector<std::size_t> sample_shape(extents.begin() + 1, extents.end());
    std::size_t per = 1;
    for (std::size_t e : sample_shape) per *= e;
    if (n == 0 || per == 0) throw FormatError(path + ": zero extent in sample record");
    for (std::size_t i = 0; i < n; ++i) {
        Tensor t(sample_shape);
        for (std::size_t j = 0; j < per; ++j) t[j] = r.f64be("sample payload");
        d.samples.push_back(std::move(t));
    }

    if (r.u8("magic") != 0 || r.u8("magic") != 0)
        throw FormatError(path + ": bad label magic at byte " + std::to_string(r.pos - 1));
    if (r.u8("dtype") != 0x0c)
        throw FormatError(path + ": label record is not int32 (byte " + std::to_string(r.pos - 1) + ")");
    if (r.u8("rank") != 1)
        throw FormatError(path + ": label record must be rank 1 (byte " + std::to_string(r.pos - 1) + ")");
    std::size_t nl = r.u32be("label count");
    if (nl != n)
        throw FormatError(path + ": " + std::to_string(n) + " samples but " + std::to_string(nl) +
                          " labels");
    int max_label = 0;
    for (std::size_t i = 0; i < nl; ++i) {
        int l = r.i32be("label payload");
        max_label = std::max(max_label, l);
        d.labels.push_back(l);
    }
    if (r.pos != buf.size())
        throw FormatError(path + ": " + std::to_string(buf.size() - r.pos) +
                          " trailing bytes at byte " + std::to_string(r.pos));
    d.classes = static_cast<std::size_t>(max_label);
    d.validate();
    return d;
}

/// Delimited numeric text: one sample per line, feature values then an
/// integer label (1..C); separators are spaces, tabs, commas or semicolons.
/// Vector features are standardized per dimension.
inline Dataset load_delimited(const std::string& path) {
    using namespace data_detail;
    std::ifstream f(path);
    if (!f) throw IoError("cannot open " + path);
    Dataset d;
    d.tag = "delimited:" + std::filesystem::path(path).filename().string();
    std::string line;
    std::size_t line_no = 0, width = 0;
    int max_label = 0;
    while (std::getline(f, line)) {
        ++line_no;
        auto toks = tokenize(line);
        if (toks.empty() || toks.front().front() == '#') continue;
        if (toks.size() < 2)
            throw FormatError("line " + std::to_string(line_no) + ": need features and a label");
        if (width == 0)
            width = toks.size() - 1;
        else if (toks.size() - 1 != width)
            throw FormatError("line " + std::to_string(line_no) + ": " +
                              std::to_string(toks.size() - 1) + " features, expected " +
                              std::to_string(width));
        Tensor x({width});
        for (std::size_t j = 0; j < width; ++j) x[j] = parse_num(toks[j], line_no);
        int label = parse_label(toks.back(), line_no);
        max_label = std::max(max_label, label);
        d.samples.push_back(std::move(x));
        d.labels.push_back(label);
    }
    if (d.samples.empty()) throw FormatError(path + ": no samples");
    standardize(d.samples);
    d.classes = static_cast<std::size_t>(max_label);
    d.validate();
    return d;
}

/// Manifest: one record per line, either `<relative-raster-path> <label>` or
/// an inline numeric row `<v1> ... <vD> <label>`. Raster paths resolve
/// relative to the manifest location; a manifest mixes only one style.
inline Dataset load_manifest(const std::string& path) {
    using namespace data_detail;
    std::ifstream f(path);
    if (!f) throw IoError("cannot open " + path);
    std::filesystem::path base = std::filesystem::path(path).parent_path();
    Dataset d;
    d.tag = "manifest:" + std::filesystem::path(path).filename().string();
    std::string line;
    std::size_t line_no = 0;
    int max_label = 0;
    int style = 0;  // 1 = raster paths, 2 = inline rows
    while (std::getline(f, line)) {
        ++line_no;
        auto toks = tokenize(line);
        if (toks.empty() || toks.front().front() == '#') continue;
        if (toks.size() < 2)
            throw FormatError("line " + std::to_string(line_no) + ": need a record and a label");
        bool inline_row = is_number(toks.front());
        int want = inline_row ? 2 : 1;
        if (style == 0)
            style = want;
        else if (style != want)
            throw FormatError("line " + std::to_string(line_no) +
                              ": manifest mixes raster and inline records");
        int label = parse_label(toks.back(), line_no);
        if (inline_row) {
            Tensor x({toks.size() - 1});
            for (std::size_t j = 0; j + 1 < toks.size(); ++j) x[j] = parse_num(toks[j], line_no);
            d.samples.push_back(std::move(x));
        } else {
            if (toks.size() != 2)
                throw FormatError("line " + std::to_string(line_no) +
                                  ": raster record must be `path label`");
            std::filesystem::path p = base / toks.front();
            if (!std::filesystem::exists(p))
                throw FormatError("line " + std::to_string(line_no) + ": missing file " +
                                  p.string());
            d.samples.push_back(load_pgm(p.string()));
        }
        d.labels.push_back(label);
        max_label = std::max(max_label, label);
    }
    if (d.samples.empty()) throw FormatError(path + ": no records");
    if (style == 2) standardize(d.samples);
    d.classes = static_cast<std::size_t>(max_label);
    d.validate();
    return d;
}

inline Dataset load_dataset(const std::string& path, DatasetFormat format) {
    switch (format) {
        case DatasetFormat::idx: return load_idx(path);
        case DatasetFormat::manifest: return load_manifest(path);
        case DatasetFormat::delimited: return load_delimited(path);
    }
    throw ConfigError("unknown dataset format");
}

}  // namespace adacm
