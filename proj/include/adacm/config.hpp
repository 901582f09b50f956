#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "adacm/data.hpp"
#include "adacm/errors.hpp"
#include "adacm/trainer.hpp"

namespace adacm {

// Experiment configuration: a single archivable JSON file drives every run.
// Parsing is strict (unknown keys are errors, messages name the field), and
// a stable digest of the canonicalized content is recorded in all outputs.

struct DatasetSource {
    bool synthetic = true;
    SynthSpec synth;
    bool synth_seed_set = false;  // explicit seed in the file vs derived per run
    std::string path;
    DatasetFormat format = DatasetFormat::idx;
};

struct RunConfig {
    int schema = 1;
    DatasetSource dataset;
    SplitSpec split;
    bool split_seed_set = false;
    TrainConfig train;
    std::string output_dir = "out";
    std::vector<std::uint64_t> seeds{1};
    std::vector<std::string> modes{
        "supervised", "ft-0.5", "ft-0.8", "ft-0.95", "ada-cm-no-contrastive",
        "contrastive-only", "ada-cm",
    };
};

namespace config_detail {

constexpr std::uint64_t kTagDatasetSeed = 0x44534554ULL;  // "DSET"
constexpr std::uint64_t kTagSplitSeed = 0x53504c54ULL;    // "SPLT"

inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

inline void check_keys(const nlohmann::json& j, const std::string& ctx,
                       std::initializer_list<const char*> allowed) {
    if (!j.is_object()) throw ConfigError(ctx + ": expected an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* a : allowed)
            if (it.key() == a) {
                ok = true;
                break;
            }
        if (!ok) throw ConfigError(ctx + ": unknown key '" + it.key() + "'");
    }
}

template <typename T>
T require(const nlohmann::json& j, const std::string& ctx, const char* key) {
    if (!j.contains(key)) throw ConfigError(ctx + ": missing required field '" + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(ctx + "." + key + ": " + e.what());
    }
}

template <typename T>
T optional_of(const nlohmann::json& j, const std::string& ctx, const char* key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(ctx + "." + key + ": " + e.what());
    }
}

}  // namespace config_detail

inline RunConfig parse_run_config(const nlohmann::json& j) {
    using namespace config_detail;
    check_keys(j, "config",
               {"schema", "dataset", "split", "train", "output_dir", "seeds", "modes"});
    RunConfig cfg;
    cfg.schema = require<int>(j, "config", "schema");
    if (cfg.schema != 1)
        throw ConfigError("config.schema: version " + std::to_string(cfg.schema) +
                          " is not supported (expected 1)");

    if (!j.contains("dataset")) throw ConfigError("config: missing required field 'dataset'");
    const auto& jd = j.at("dataset");
    std::string kind = require<std::string>(jd, "dataset", "kind");
    if (kind == "synth") {
        check_keys(jd, "dataset", {"kind", "seed", "classes", "per_class", "dim", "difficulty"});
        cfg.dataset.synthetic = true;
        cfg.dataset.synth_seed_set = jd.contains("seed");
        if (cfg.dataset.synth_seed_set)
            cfg.dataset.synth.seed = require<std::uint64_t>(jd, "dataset", "seed");
        cfg.dataset.synth.classes = optional_of<std::size_t>(jd, "dataset", "classes", 4);
        cfg.dataset.synth.per_class = optional_of<std::size_t>(jd, "dataset", "per_class", 600);
        cfg.dataset.synth.dim = optional_of<std::size_t>(jd, "dataset", "dim", 16);
        cfg.dataset.synth.difficulty = optional_of<double>(jd, "dataset", "difficulty", 0.6);
    } else if (kind == "file") {
        check_keys(jd, "dataset", {"kind", "path", "format"});
        cfg.dataset.synthetic = false;
        cfg.dataset.path = require<std::string>(jd, "dataset", "path");
        std::string fmt = require<std::string>(jd, "dataset", "format");
        if (fmt == "idx")
            cfg.dataset.format = DatasetFormat::idx;
        else if (fmt == "manifest")
            cfg.dataset.format = DatasetFormat::manifest;
        else if (fmt == "delimited")
            cfg.dataset.format = DatasetFormat::delimited;
        else
            throw ConfigError("dataset.format: unknown format '" + fmt + "'");
    } else {
        throw ConfigError("dataset.kind: expected 'synth' or 'file', got '" + kind + "'");
    }

    if (!j.contains("split")) throw ConfigError("config: missing required field 'split'");
    const auto& js = j.at("split");
    check_keys(js, "split", {"labeled_count", "test_fraction", "seed", "class_balanced"});
    cfg.split.labeled_count = require<std::size_t>(js, "split", "labeled_count");
    cfg.split.test_fraction = optional_of<double>(js, "split", "test_fraction", 0.1);
    cfg.split_seed_set = js.contains("seed");
    if (cfg.split_seed_set) cfg.split.seed = require<std::uint64_t>(js, "split", "seed");
    cfg.split.class_balanced = optional_of<bool>(js, "split", "class_balanced", true);

    const auto jt = j.contains("train") ? j.at("train") : nlohmann::json::object();
    check_keys(jt, "train",
               {"mode", "epochs", "labeled_batch", "unlabeled_batch", "learning_rate", "beta1",
                "beta2", "adam_eps", "lambda1", "lambda2", "lambda3", "tau", "margin_cap",
                "margin_gamma", "margin_init", "augment", "weak_scale", "strong_scale",
                "sequential_updates", "model"});
    std::string mode_tok = optional_of<std::string>(jt, "train", "mode", "ada-cm");
    cfg.train.mode = mode_from_token(mode_tok, &cfg.train.ft_value);
    cfg.train.epochs = optional_of<int>(jt, "train", "epochs", 20);
    cfg.train.labeled_batch = optional_of<std::size_t>(jt, "train", "labeled_batch", 16);
    cfg.train.unlabeled_batch = optional_of<std::size_t>(jt, "train", "unlabeled_batch", 16);
    cfg.train.learning_rate = optional_of<double>(jt, "train", "learning_rate", 5e-4);
    cfg.train.beta1 = optional_of<double>(jt, "train", "beta1", 0.9);
    cfg.train.beta2 = optional_of<double>(jt, "train", "beta2", 0.999);
    cfg.train.adam_eps = optional_of<double>(jt, "train", "adam_eps", 1e-8);
    cfg.train.weights.lambda1 = optional_of<double>(jt, "train", "lambda1", 0.5);
    cfg.train.weights.lambda2 = optional_of<double>(jt, "train", "lambda2", 1.0);
    cfg.train.weights.lambda3 = optional_of<double>(jt, "train", "lambda3", 0.1);
    cfg.train.weights.tau = optional_of<double>(jt, "train", "tau", 0.1);
    cfg.train.margin_cap = optional_of<double>(jt, "train", "margin_cap", 0.97);
    cfg.train.margin_gamma = optional_of<double>(jt, "train", "margin_gamma", M_E);
    cfg.train.margin_init = optional_of<double>(jt, "train", "margin_init", 0.8);
    cfg.train.augment = optional_of<bool>(jt, "train", "augment", true);
    cfg.train.weak_scale = optional_of<double>(jt, "train", "weak_scale", 0.05);
    cfg.train.strong_scale = optional_of<double>(jt, "train", "strong_scale", 0.25);
    cfg.train.sequential_updates = optional_of<bool>(jt, "train", "sequential_updates", false);

    const auto jm = jt.contains("model") ? jt.at("model") : nlohmann::json::object();
    check_keys(jm, "train.model",
               {"hidden_dim", "embedding_dim", "activation", "front_end", "conv_channels1",
                "conv_channels2", "conv_kernel"});
    cfg.train.model.hidden_dim = optional_of<std::size_t>(jm, "train.model", "hidden_dim", 64);
    cfg.train.model.embedding_dim =
        optional_of<std::size_t>(jm, "train.model", "embedding_dim", 32);
    std::string act = optional_of<std::string>(jm, "train.model", "activation", "tanh");
    if (act == "tanh")
        cfg.train.model.activation = Activation::tanh;
    else if (act == "relu")
        cfg.train.model.activation = Activation::relu;
    else
        throw ConfigError("train.model.activation: expected 'tanh' or 'relu', got '" + act + "'");
    std::string fe = optional_of<std::string>(jm, "train.model", "front_end", "none");
    if (fe == "none")
        cfg.train.model.front_end = FrontEnd::none;
    else if (fe == "conv")
        cfg.train.model.front_end = FrontEnd::conv;
    else
        throw ConfigError("train.model.front_end: expected 'none' or 'conv', got '" + fe + "'");
    cfg.train.model.conv_channels1 =
        optional_of<std::size_t>(jm, "train.model", "conv_channels1", 4);
    cfg.train.model.conv_channels2 =
        optional_of<std::size_t>(jm, "train.model", "conv_channels2", 8);
    cfg.train.model.conv_kernel = optional_of<std::size_t>(jm, "train.model", "conv_kernel", 3);

    cfg.output_dir = optional_of<std::string>(j, "config", "output_dir", "out");
    cfg.seeds = optional_of<std::vector<std::uint64_t>>(j, "config", "seeds", {1});
    if (cfg.seeds.empty()) throw ConfigError("config.seeds: need at least one seed");
    if (j.contains("modes")) {
        cfg.modes = require<std::vector<std::string>>(j, "config", "modes");
        if (cfg.modes.empty()) throw ConfigError("config.modes: need at least one mode");
        for (const std::string& m : cfg.modes) mode_from_token(m);  // validate tokens
    }
    cfg.train.validate();
    return cfg;
}

inline RunConfig load_run_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open " + path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(f);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(path + ": " + e.what());
    }
    return parse_run_config(j);
}

struct CliOverrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::string> mode;
    std::optional<std::string> out;
    std::optional<int> epochs;
};

/// Overrides apply before any digest is taken, so archived outputs always
/// reflect what actually ran.
inline void apply_overrides(RunConfig& cfg, const CliOverrides& o) {
    if (o.seed) cfg.seeds = {*o.seed};
    if (o.mode) {
        cfg.train.mode = mode_from_token(*o.mode, &cfg.train.ft_value);
        cfg.modes = {*o.mode};
    }
    if (o.out) cfg.output_dir = *o.out;
    if (o.epochs) {
        if (*o.epochs < 1) throw ConfigError("--epochs must be >= 1");
        cfg.train.epochs = *o.epochs;
    }
}

/// Canonical JSON of the sweep-level config: every field explicit, fixed key
/// order, derived seeds marked rather than resolved. `modulo_seed_mode`
/// blanks the seed list and mode so runs of one sweep share a digest.
inline nlohmann::ordered_json canonical_json(const RunConfig& cfg, bool modulo_seed_mode = false) {
    nlohmann::ordered_json j;
    j["schema"] = cfg.schema;
    auto& jd = j["dataset"];
    if (cfg.dataset.synthetic) {
        jd["kind"] = "synth";
        if (cfg.dataset.synth_seed_set)
            jd["seed"] = cfg.dataset.synth.seed;
        else
            jd["seed"] = "derived";
        jd["classes"] = cfg.dataset.synth.classes;
        jd["per_class"] = cfg.dataset.synth.per_class;
        jd["dim"] = cfg.dataset.synth.dim;
        jd["difficulty"] = cfg.dataset.synth.difficulty;
    } else {
        jd["kind"] = "file";
        jd["path"] = cfg.dataset.path;
        jd["format"] = cfg.dataset.format == DatasetFormat::idx        ? "idx"
                       : cfg.dataset.format == DatasetFormat::manifest ? "manifest"
                                                                       : "delimited";
    }
    auto& js = j["split"];
    js["labeled_count"] = cfg.split.labeled_count;
    js["test_fraction"] = cfg.split.test_fraction;
    if (cfg.split_seed_set)
        js["seed"] = cfg.split.seed;
    else
        js["seed"] = "derived";
    js["class_balanced"] = cfg.split.class_balanced;

    auto& jt = j["train"];
    jt["mode"] = modulo_seed_mode ? "" : mode_token(cfg.train.mode, cfg.train.ft_value);
    jt["epochs"] = cfg.train.epochs;
    jt["labeled_batch"] = cfg.train.labeled_batch;
    jt["unlabeled_batch"] = cfg.train.unlabeled_batch;
    jt["learning_rate"] = cfg.train.learning_rate;
    jt["beta1"] = cfg.train.beta1;
    jt["beta2"] = cfg.train.beta2;
    jt["adam_eps"] = cfg.train.adam_eps;
    jt["lambda1"] = cfg.train.weights.lambda1;
    jt["lambda2"] = cfg.train.weights.lambda2;
    jt["lambda3"] = cfg.train.weights.lambda3;
    jt["tau"] = cfg.train.weights.tau;
    jt["margin_cap"] = cfg.train.margin_cap;
    jt["margin_gamma"] = cfg.train.margin_gamma;
    jt["margin_init"] = cfg.train.margin_init;
    jt["augment"] = cfg.train.augment;
    jt["weak_scale"] = cfg.train.weak_scale;
    jt["strong_scale"] = cfg.train.strong_scale;
    jt["sequential_updates"] = cfg.train.sequential_updates;
    auto& jm = jt["model"];
    jm["hidden_dim"] = cfg.train.model.hidden_dim;
    jm["embedding_dim"] = cfg.train.model.embedding_dim;
    jm["activation"] = cfg.train.model.activation == Activation::tanh ? "tanh" : "relu";
    jm["front_end"] = cfg.train.model.front_end == FrontEnd::none ? "none" : "conv";
    jm["conv_channels1"] = cfg.train.model.conv_channels1;
    jm["conv_channels2"] = cfg.train.model.conv_channels2;
    jm["conv_kernel"] = cfg.train.model.conv_kernel;

    j["output_dir"] = cfg.output_dir;
    j["seeds"] = modulo_seed_mode ? std::vector<std::uint64_t>{} : cfg.seeds;
    j["modes"] = modulo_seed_mode ? std::vector<std::string>{} : cfg.modes;
    return j;
}

/// Digest of the full resolved sweep config (reflects CLI overrides).
inline std::string config_digest(const RunConfig& cfg) {
    return config_detail::hex64(config_detail::fnv1a64(canonical_json(cfg, false).dump()));
}

/// Digest shared by every run of a sweep (seed list and mode blanked);
/// aggregation uses it to refuse mixing runs from different sweeps.
inline std::string group_digest(const RunConfig& cfg) {
    return config_detail::hex64(config_detail::fnv1a64(canonical_json(cfg, true).dump()));
}

/// Concrete seeds for one run: explicit file values win, otherwise derived
/// from the run seed so different seeds get independent data and splits.
inline std::uint64_t resolve_dataset_seed(const RunConfig& cfg, std::uint64_t run_seed) {
    return cfg.dataset.synth_seed_set ? cfg.dataset.synth.seed
                                      : derive_key(run_seed, {config_detail::kTagDatasetSeed});
}

inline std::uint64_t resolve_split_seed(const RunConfig& cfg, std::uint64_t run_seed) {
    return cfg.split_seed_set ? cfg.split.seed
                              : derive_key(run_seed, {config_detail::kTagSplitSeed});
}

}  // namespace adacm
