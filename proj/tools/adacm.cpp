// Experiment front end: single runs, multi-seed sweeps and the mode
// comparison table, all driven by one JSON config file.

#include <atomic>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "adacm/adacm.hpp"
#include "adacm/checkpoint.hpp"

namespace fs = std::filesystem;
using namespace adacm;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

struct PreparedRun {
    std::string mode_token;
    std::uint64_t seed = 0;
    TrainConfig train;
    SplitResult data;
    fs::path dir;
};

/// Builds the dataset and split for one run seed and specializes the model
/// geometry to the samples.
PreparedRun prepare_run(const RunConfig& cfg, const std::string& mode_tok, std::uint64_t seed,
                        const fs::path& dir) {
    PreparedRun run;
    run.mode_token = mode_tok;
    run.seed = seed;
    run.dir = dir;
    run.train = cfg.train;
    run.train.mode = mode_from_token(mode_tok, &run.train.ft_value);
    run.train.seed = seed;
    run.train.config_digest = group_digest(cfg);

    Dataset dataset;
    if (cfg.dataset.synthetic) {
        SynthSpec spec = cfg.dataset.synth;
        spec.seed = resolve_dataset_seed(cfg, seed);
        dataset = synth_benchmark(spec);
    } else {
        dataset = load_dataset(cfg.dataset.path, cfg.dataset.format);
    }
    SplitSpec split_spec = cfg.split;
    split_spec.seed = resolve_split_seed(cfg, seed);
    run.data = split(dataset, split_spec);

    const Tensor& sample = dataset.samples.front();
    run.train.model.classes = dataset.classes;
    run.train.model.input_dim = sample.size();
    if (sample.rank() == 2) {
        run.train.model.image_height = sample.shape()[0];
        run.train.model.image_width = sample.shape()[1];
    } else if (run.train.model.front_end == FrontEnd::conv) {
        throw ConfigError("train.model.front_end: conv needs rank-2 samples, got " +
                          sample.shape_str());
    }
    return run;
}

/// Archives what actually ran: digests plus the fully resolved config.
void write_resolved_config(const RunConfig& cfg, const PreparedRun& run) {
    RunConfig resolved = cfg;
    resolved.seeds = {run.seed};
    resolved.modes = {run.mode_token};
    resolved.train = run.train;
    if (resolved.dataset.synthetic) {
        resolved.dataset.synth.seed = resolve_dataset_seed(cfg, run.seed);
        resolved.dataset.synth_seed_set = true;
    }
    resolved.split.seed = resolve_split_seed(cfg, run.seed);
    resolved.split_seed_set = true;

    nlohmann::ordered_json j;
    j["config_digest"] = config_digest(cfg);
    j["group_digest"] = group_digest(cfg);
    j["resolved"] = canonical_json(resolved);
    write_text_file((run.dir / "config.json").string(), j.dump(2) + "\n");
}

RunMetrics execute_run(const RunConfig& cfg, const PreparedRun& run) {
    fs::create_directories(run.dir);
    write_resolved_config(cfg, run);
    TrainResult res = train(run.train, run.data.labeled, run.data.unlabeled, run.data.test);
    write_text_file((run.dir / "metrics.csv").string(), run_to_csv(res.metrics));
    write_text_file((run.dir / "metrics.json").string(), run_to_json(res.metrics).dump(2) + "\n");
    save_checkpoint(res.params, (run.dir / "checkpoint.bin").string());
    return res.metrics;
}

std::size_t sweep_threads() {
    const char* env = std::getenv("ADACM_THREADS");
    if (!env) return 1;
    long v = std::strtol(env, nullptr, 10);
    return v < 1 ? 1 : static_cast<std::size_t>(v);
}

/// Runs every prepared job, at most ADACM_THREADS at a time. Each job owns
/// its output directory, so parallel seeds cannot interfere; results land in
/// job order regardless of completion order.
std::vector<RunMetrics> run_all(const RunConfig& cfg, const std::vector<PreparedRun>& jobs) {
    std::vector<RunMetrics> results(jobs.size());
    std::vector<std::string> failures;
    std::exception_ptr diverged;
    std::mutex mu;
    std::atomic<std::size_t> next{0};
    std::size_t workers = std::min(sweep_threads(), jobs.size());

    auto worker = [&] {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= jobs.size()) return;
            try {
                RunMetrics m = execute_run(cfg, jobs[i]);
                std::lock_guard<std::mutex> lock(mu);
                std::cout << "[" << jobs[i].mode_token << " seed " << jobs[i].seed
                          << "] final test accuracy " << m.epochs.back().test_acc << "\n";
                results[i] = std::move(m);
            } catch (...) {
                std::lock_guard<std::mutex> lock(mu);
                if (!diverged) diverged = std::current_exception();
            }
        }
    };
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < workers; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (diverged) std::rethrow_exception(diverged);
    return results;
}

int cmd_train(const RunConfig& cfg) {
    std::vector<PreparedRun> jobs;
    std::string mode_tok = mode_token(cfg.train.mode, cfg.train.ft_value);
    for (std::uint64_t seed : cfg.seeds)
        jobs.push_back(prepare_run(cfg, mode_tok, seed,
                                   fs::path(cfg.output_dir) / ("seed-" + std::to_string(seed))));
    std::vector<RunMetrics> runs = run_all(cfg, jobs);
    if (runs.size() >= 2) {
        AggregateReport rep = aggregate(runs);
        write_text_file((fs::path(cfg.output_dir) / "aggregate.json").string(),
                        aggregate_to_json(rep).dump(2) + "\n");
        write_text_file((fs::path(cfg.output_dir) / "aggregate.csv").string(),
                        aggregate_to_csv(rep));
        std::cout << mode_tok << ": mean " << rep.modes.front().mean << " std "
                  << rep.modes.front().stddev << " over " << runs.size() << " seeds\n";
    } else {
        std::cout << "single seed; skipping aggregate report (needs >= 2 runs)\n";
    }
    return kExitOk;
}

int cmd_compare(const RunConfig& cfg) {
    if (cfg.seeds.size() < 2)
        throw ConfigError("compare needs at least 2 seeds for mean/std reporting");
    std::vector<PreparedRun> jobs;
    for (const std::string& mode_tok : cfg.modes)
        for (std::uint64_t seed : cfg.seeds)
            jobs.push_back(prepare_run(cfg, mode_tok, seed,
                                       fs::path(cfg.output_dir) / mode_tok /
                                           ("seed-" + std::to_string(seed))));
    std::vector<RunMetrics> runs = run_all(cfg, jobs);
    AggregateReport rep = aggregate(runs);  // mode rows follow config order
    write_text_file((fs::path(cfg.output_dir) / "compare.json").string(),
                    aggregate_to_json(rep).dump(2) + "\n");
    write_text_file((fs::path(cfg.output_dir) / "compare.csv").string(), aggregate_to_csv(rep));
    for (const ModeSummary& m : rep.modes)
        std::cout << m.mode << ": mean " << m.mean << " std " << m.stddev << "\n";
    return kExitOk;
}

int cmd_eval(const RunConfig& cfg, const std::string& checkpoint_path) {
    ModelParams params = load_checkpoint(checkpoint_path);
    std::uint64_t seed = cfg.seeds.front();
    PreparedRun run = prepare_run(cfg, mode_token(cfg.train.mode, cfg.train.ft_value), seed,
                                  fs::path(cfg.output_dir));
    if (params.config.input_dim != run.train.model.input_dim ||
        params.config.classes != run.train.model.classes)
        throw ConfigError("checkpoint geometry [" + std::to_string(params.config.input_dim) +
                          " -> " + std::to_string(params.config.classes) +
                          "] does not match the dataset [" +
                          std::to_string(run.train.model.input_dim) + " -> " +
                          std::to_string(run.train.model.classes) + "]");
    EvalResult ev = evaluate(params, run.data.test);
    std::cout.precision(17);
    std::cout << "accuracy " << ev.accuracy << "\n";
    for (std::size_t c = 0; c < ev.per_class.size(); ++c)
        std::cout << "class " << (c + 1) << " accuracy " << ev.per_class[c] << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"adaptive-confidence-margin semi-supervised training"};
    app.require_subcommand(1);

    std::string config_path, checkpoint_path;
    CliOverrides over;
    std::uint64_t seed_arg = 0;
    std::string mode_arg, out_arg;
    int epochs_arg = 0;

    auto add_common = [&](CLI::App* sub, bool needs_config) {
        auto* c = sub->add_option("--config", config_path, "experiment config file (JSON)");
        if (needs_config) c->required();
        sub->add_option("--seed", seed_arg, "override: run only this seed");
        sub->add_option("--mode", mode_arg, "override: run only this mode token");
        sub->add_option("--out", out_arg, "override: output directory");
        sub->add_option("--epochs", epochs_arg, "override: number of epochs");
    };

    CLI::App* train_cmd = app.add_subcommand("train", "train once per configured seed");
    add_common(train_cmd, true);
    CLI::App* compare_cmd =
        app.add_subcommand("compare", "run every configured mode over the shared seeds");
    add_common(compare_cmd, true);
    CLI::App* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint on the test split");
    add_common(eval_cmd, true);
    eval_cmd->add_option("--checkpoint", checkpoint_path, "checkpoint file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        RunConfig cfg = load_run_config(config_path);
        CLI::App* sub = app.get_subcommands().front();
        if (sub->count("--seed")) over.seed = seed_arg;
        if (sub->count("--mode")) over.mode = mode_arg;
        if (sub->count("--out")) over.out = out_arg;
        if (sub->count("--epochs")) over.epochs = epochs_arg;
        apply_overrides(cfg, over);

        if (sub == train_cmd) return cmd_train(cfg);
        if (sub == compare_cmd) return cmd_compare(cfg);
        return cmd_eval(cfg, checkpoint_path);
    } catch (const TrainingDiverged& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const FormatError& e) {
        std::cerr << "format error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
}
