#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "adacm/data.hpp"
#include "adacm/errors.hpp"

namespace adacm {

// Per-run metric rows, CSV/JSON export with exact round-trip at float64
// precision, and multi-seed aggregation (mean and sample std of final-epoch
// test accuracy per mode).

/// One row per completed epoch. Optional fields stay empty when the mode
/// does not produce them (e.g. margins under the supervised baseline, the
/// discard fraction outside fixed-threshold mode, precision when no sample
/// was pseudo-labeled that epoch); they serialize as blank CSV cells and
/// absent JSON keys.
struct EpochRecord {
    int epoch = 0;  // 0-based
    double l_s = 0.0;
    std::optional<double> l_u;
    std::optional<double> l_c;
    double l_total = 0.0;
    std::vector<double> margin_raw;  // empty, or one entry per class
    std::vector<double> margin_eff;
    std::optional<double> subset1_frac;
    std::optional<double> pseudo_precision;
    std::optional<double> discard_frac;
    double test_acc = 0.0;
    std::vector<double> acc_class;  // one entry per class

    bool operator==(const EpochRecord&) const = default;
};

struct RunMetrics {
    std::size_t classes = 0;
    std::string mode;
    std::uint64_t seed = 0;
    std::string config_digest;  // hex digest of the config modulo seed/mode
    std::vector<EpochRecord> epochs;
};

struct ModeSummary {
    std::string mode;
    std::vector<std::uint64_t> seeds;   // ascending
    std::vector<double> final_acc;      // aligned with seeds
    double mean = 0.0;
    double stddev = 0.0;                // sample (n-1) std

    bool operator==(const ModeSummary&) const = default;
};

struct AggregateReport {
    std::string config_digest;
    std::vector<ModeSummary> modes;  // first-appearance order

    bool operator==(const AggregateReport&) const = default;
};

namespace metrics_detail {

inline std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string fmt_opt(const std::optional<double>& v) {
    return v ? fmt(*v) : std::string();
}

inline double parse_double(const std::string& s, std::size_t line_no) {
    char* end = nullptr;
    double v = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size())
        throw FormatError("metrics line " + std::to_string(line_no) + ": bad number '" + s + "'");
    return v;
}

inline std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            cells.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur.push_back(ch);
        }
    }
    cells.push_back(cur);
    return cells;
}

}  // namespace metrics_detail

/// The documented run-CSV schema for C classes.
inline std::string csv_header(std::size_t classes) {
    std::string h = "epoch,l_s,l_u,l_c,l_total";
    for (std::size_t c = 1; c <= classes; ++c) h += ",margin_raw_" + std::to_string(c);
    for (std::size_t c = 1; c <= classes; ++c) h += ",margin_eff_" + std::to_string(c);
    h += ",subset1_frac,pseudo_precision,discard_frac,test_acc";
    for (std::size_t c = 1; c <= classes; ++c) h += ",acc_class_" + std::to_string(c);
    return h;
}

inline std::string run_to_csv(const RunMetrics& run) {
    using namespace metrics_detail;
    std::string out = csv_header(run.classes) + "\n";
    for (const EpochRecord& e : run.epochs) {
        if (!e.margin_raw.empty() && e.margin_raw.size() != run.classes)
            throw FormatError("epoch " + std::to_string(e.epoch) + ": margin vector size " +
                              std::to_string(e.margin_raw.size()) + " vs " +
                              std::to_string(run.classes) + " classes");
        if (e.acc_class.size() != run.classes)
            throw FormatError("epoch " + std::to_string(e.epoch) + ": per-class accuracy size " +
                              std::to_string(e.acc_class.size()) + " vs " +
                              std::to_string(run.classes) + " classes");
        out += std::to_string(e.epoch);
        out += ',' + fmt(e.l_s) + ',' + fmt_opt(e.l_u) + ',' + fmt_opt(e.l_c) + ',' + fmt(e.l_total);
        for (std::size_t c = 0; c < run.classes; ++c)
            out += ',' + (e.margin_raw.empty() ? std::string() : fmt(e.margin_raw[c]));
        for (std::size_t c = 0; c < run.classes; ++c)
            out += ',' + (e.margin_eff.empty() ? std::string() : fmt(e.margin_eff[c]));
        out += ',' + fmt_opt(e.subset1_frac) + ',' + fmt_opt(e.pseudo_precision) + ',' +
               fmt_opt(e.discard_frac) + ',' + fmt(e.test_acc);
        for (std::size_t c = 0; c < run.classes; ++c) out += ',' + fmt(e.acc_class[c]);
        out += '\n';
    }
    return out;
}

/// Parses a run CSV; the class count is recovered from the header, which
/// must match csv_header() exactly. mode/seed/digest are not part of the
/// CSV and stay default.
inline RunMetrics run_from_csv(const std::string& text) {
    using namespace metrics_detail;
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw FormatError("metrics CSV is empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();

    std::size_t classes = 0;
    while (line != csv_header(classes)) {
        ++classes;
        if (classes > 4096) throw FormatError("metrics CSV header does not match the schema");
    }

    RunMetrics run;
    run.classes = classes;
    std::size_t line_no = 1;
    std::size_t expect = 9 + 3 * classes;  // five loss cells, four scalar cells, 3C per-class cells
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || (line.size() == 1 && line[0] == '\r')) continue;
        auto cells = split_csv(line);
        if (cells.size() != expect)
            throw FormatError("metrics line " + std::to_string(line_no) + ": " +
                              std::to_string(cells.size()) + " cells, expected " +
                              std::to_string(expect));
        EpochRecord e;
        std::size_t i = 0;
        e.epoch = static_cast<int>(parse_double(cells[i++], line_no));
        e.l_s = parse_double(cells[i++], line_no);
        if (!cells[i].empty()) e.l_u = parse_double(cells[i], line_no);
        ++i;
        if (!cells[i].empty()) e.l_c = parse_double(cells[i], line_no);
        ++i;
        e.l_total = parse_double(cells[i++], line_no);
        bool have_raw = !cells[i].empty();
        for (std::size_t c = 0; c < classes; ++c, ++i)
            if (have_raw) e.margin_raw.push_back(parse_double(cells[i], line_no));
        bool have_eff = !cells[i].empty();
        for (std::size_t c = 0; c < classes; ++c, ++i)
            if (have_eff) e.margin_eff.push_back(parse_double(cells[i], line_no));
        if (!cells[i].empty()) e.subset1_frac = parse_double(cells[i], line_no);
        ++i;
        if (!cells[i].empty()) e.pseudo_precision = parse_double(cells[i], line_no);
        ++i;
        if (!cells[i].empty()) e.discard_frac = parse_double(cells[i], line_no);
        ++i;
        e.test_acc = parse_double(cells[i++], line_no);
        for (std::size_t c = 0; c < classes; ++c, ++i)
            e.acc_class.push_back(parse_double(cells[i], line_no));
        run.epochs.push_back(std::move(e));
    }
    return run;
}

inline nlohmann::ordered_json run_to_json(const RunMetrics& run) {
    nlohmann::ordered_json j;
    j["schema"] = 1;
    j["kind"] = "run";
    j["mode"] = run.mode;
    j["seed"] = run.seed;
    j["config_digest"] = run.config_digest;
    j["classes"] = run.classes;
    j["epochs"] = nlohmann::ordered_json::array();
    for (const EpochRecord& e : run.epochs) {
        nlohmann::ordered_json r;
        r["epoch"] = e.epoch;
        r["l_s"] = e.l_s;
        if (e.l_u) r["l_u"] = *e.l_u;
        if (e.l_c) r["l_c"] = *e.l_c;
        r["l_total"] = e.l_total;
        if (!e.margin_raw.empty()) r["margin_raw"] = e.margin_raw;
        if (!e.margin_eff.empty()) r["margin_eff"] = e.margin_eff;
        if (e.subset1_frac) r["subset1_frac"] = *e.subset1_frac;
        if (e.pseudo_precision) r["pseudo_precision"] = *e.pseudo_precision;
        if (e.discard_frac) r["discard_frac"] = *e.discard_frac;
        r["test_acc"] = e.test_acc;
        r["acc_class"] = e.acc_class;
        j["epochs"].push_back(std::move(r));
    }
    return j;
}

inline RunMetrics run_from_json(const nlohmann::json& j) {
    if (j.value("kind", "") != "run") throw FormatError("not a run metrics document");
    RunMetrics run;
    run.mode = j.value("mode", "");
    run.seed = j.value("seed", std::uint64_t{0});
    run.config_digest = j.value("config_digest", "");
    run.classes = j.value("classes", std::size_t{0});
    for (const auto& r : j.at("epochs")) {
        EpochRecord e;
        e.epoch = r.at("epoch").get<int>();
        e.l_s = r.at("l_s").get<double>();
        if (r.contains("l_u")) e.l_u = r["l_u"].get<double>();
        if (r.contains("l_c")) e.l_c = r["l_c"].get<double>();
        e.l_total = r.at("l_total").get<double>();
        if (r.contains("margin_raw")) e.margin_raw = r["margin_raw"].get<std::vector<double>>();
        if (r.contains("margin_eff")) e.margin_eff = r["margin_eff"].get<std::vector<double>>();
        if (r.contains("subset1_frac")) e.subset1_frac = r["subset1_frac"].get<double>();
        if (r.contains("pseudo_precision")) e.pseudo_precision = r["pseudo_precision"].get<double>();
        if (r.contains("discard_frac")) e.discard_frac = r["discard_frac"].get<double>();
        e.test_acc = r.at("test_acc").get<double>();
        e.acc_class = r.at("acc_class").get<std::vector<double>>();
        run.epochs.push_back(std::move(e));
    }
    return run;
}

/// Groups runs by mode and reduces final-epoch test accuracy to mean and
/// sample std per mode. All runs must share a config digest; each mode needs
/// at least two runs. Values are ordered by seed so the report is invariant
/// under run permutation.
inline AggregateReport aggregate(const std::vector<RunMetrics>& runs) {
    if (runs.size() < 2) throw AggregationError("aggregation needs at least 2 runs");
    AggregateReport rep;
    rep.config_digest = runs.front().config_digest;
    for (const RunMetrics& r : runs) {
        if (r.config_digest != rep.config_digest)
            throw AggregationError("config digest mismatch: " + r.config_digest + " vs " +
                                   rep.config_digest);
        if (r.epochs.empty()) throw AggregationError("run with no completed epochs");
        auto it = std::find_if(rep.modes.begin(), rep.modes.end(),
                               [&](const ModeSummary& m) { return m.mode == r.mode; });
        if (it == rep.modes.end()) {
            rep.modes.push_back(ModeSummary{r.mode, {}, {}, 0.0, 0.0});
            it = rep.modes.end() - 1;
        }
        double acc = r.epochs.back().test_acc;
        auto pos = std::upper_bound(it->seeds.begin(), it->seeds.end(), r.seed);
        std::size_t at = static_cast<std::size_t>(pos - it->seeds.begin());
        it->seeds.insert(pos, r.seed);
        it->final_acc.insert(it->final_acc.begin() + static_cast<std::ptrdiff_t>(at), acc);
    }
    for (ModeSummary& m : rep.modes) {
        if (m.final_acc.size() < 2)
            throw AggregationError("mode '" + m.mode + "' has " +
                                   std::to_string(m.final_acc.size()) + " runs, need >= 2");
        double n = static_cast<double>(m.final_acc.size());
        double sum = 0.0;
        for (double v : m.final_acc) sum += v;
        m.mean = sum / n;
        double ss = 0.0;
        for (double v : m.final_acc) ss += (v - m.mean) * (v - m.mean);
        m.stddev = std::sqrt(ss / (n - 1.0));
    }
    return rep;
}

inline nlohmann::ordered_json aggregate_to_json(const AggregateReport& rep) {
    nlohmann::ordered_json j;
    j["schema"] = 1;
    j["kind"] = "aggregate";
    j["config_digest"] = rep.config_digest;
    j["modes"] = nlohmann::ordered_json::array();
    for (const ModeSummary& m : rep.modes) {
        nlohmann::ordered_json e;
        e["mode"] = m.mode;
        e["seeds"] = m.seeds;
        e["final_acc"] = m.final_acc;
        e["mean"] = m.mean;
        e["stddev"] = m.stddev;
        j["modes"].push_back(std::move(e));
    }
    return j;
}

inline AggregateReport aggregate_from_json(const nlohmann::json& j) {
    if (j.value("kind", "") != "aggregate") throw FormatError("not an aggregate document");
    AggregateReport rep;
    rep.config_digest = j.value("config_digest", "");
    for (const auto& e : j.at("modes")) {
        ModeSummary m;
        m.mode = e.at("mode").get<std::string>();
        m.seeds = e.at("seeds").get<std::vector<std::uint64_t>>();
        m.final_acc = e.at("final_acc").get<std::vector<double>>();
        m.mean = e.at("mean").get<double>();
        m.stddev = e.at("stddev").get<double>();
        rep.modes.push_back(std::move(m));
    }
    return rep;
}

/// Aggregate CSV: one row per (mode, seed) with the mode summary repeated;
/// import regroups rows and recomputes nothing.
inline std::string aggregate_to_csv(const AggregateReport& rep) {
    using namespace metrics_detail;
    std::string out = "mode,seed,final_acc,mean,stddev\n";
    for (const ModeSummary& m : rep.modes)
        for (std::size_t i = 0; i < m.seeds.size(); ++i)
            out += m.mode + ',' + std::to_string(m.seeds[i]) + ',' + fmt(m.final_acc[i]) + ',' +
                   fmt(m.mean) + ',' + fmt(m.stddev) + '\n';
    return out;
}

inline AggregateReport aggregate_from_csv(const std::string& text) {
    using namespace metrics_detail;
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || split_csv(line) != split_csv("mode,seed,final_acc,mean,stddev"))
        throw FormatError("aggregate CSV header does not match the schema");
    AggregateReport rep;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || (line.size() == 1 && line[0] == '\r')) continue;
        auto cells = split_csv(line);
        if (cells.size() != 5)
            throw FormatError("aggregate line " + std::to_string(line_no) + ": expected 5 cells");
        auto it = std::find_if(rep.modes.begin(), rep.modes.end(),
                               [&](const ModeSummary& m) { return m.mode == cells[0]; });
        if (it == rep.modes.end()) {
            rep.modes.push_back(ModeSummary{cells[0], {}, {}, 0.0, 0.0});
            it = rep.modes.end() - 1;
        }
        it->seeds.push_back(static_cast<std::uint64_t>(
            std::strtoull(cells[1].c_str(), nullptr, 10)));
        it->final_acc.push_back(parse_double(cells[2], line_no));
        it->mean = parse_double(cells[3], line_no);
        it->stddev = parse_double(cells[4], line_no);
    }
    return rep;
}

inline void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open " + path + " for writing");
    f.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!f) throw IoError("write failed for " + path);
}

inline std::string read_text_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

}  // namespace adacm
