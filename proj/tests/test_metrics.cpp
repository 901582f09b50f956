#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <string>
#include <vector>

#include "adacm/metrics.hpp"

using namespace adacm;

namespace {

EpochRecord full_record(int epoch) {
    EpochRecord e;
    e.epoch = epoch;
    e.l_s = 1.0 / 3.0;
    e.l_u = 0.125;
    e.l_c = 2.0 / 7.0;
    e.l_total = e.l_s + *e.l_u + *e.l_c;
    e.margin_raw = {0.8, 0.81, 0.79, 0.8};
    e.margin_eff = {0.4, 0.405, 0.395, 0.4};
    e.subset1_frac = 0.5;
    e.pseudo_precision = 0.9;
    e.test_acc = 0.75;
    e.acc_class = {0.7, 0.8, 0.75, 0.75};
    return e;
}

EpochRecord sparse_record(int epoch) {
    EpochRecord e;
    e.epoch = epoch;
    e.l_s = 2.25;
    e.l_total = 1.125;
    e.test_acc = 0.5;
    e.acc_class = {0.5, 0.5, 0.5, 0.5};
    return e;
}

RunMetrics sample_run() {
    RunMetrics run;
    run.classes = 4;
    run.mode = "ada-cm";
    run.seed = 3;
    run.config_digest = "0123456789abcdef";
    run.epochs = {sparse_record(0), full_record(1)};
    return run;
}

}  // namespace

TEST_CASE("csv header spells out the documented schema") {
    CHECK(csv_header(4) ==
          "epoch,l_s,l_u,l_c,l_total,"
          "margin_raw_1,margin_raw_2,margin_raw_3,margin_raw_4,"
          "margin_eff_1,margin_eff_2,margin_eff_3,margin_eff_4,"
          "subset1_frac,pseudo_precision,discard_frac,test_acc,"
          "acc_class_1,acc_class_2,acc_class_3,acc_class_4");
    CHECK(csv_header(2) ==
          "epoch,l_s,l_u,l_c,l_total,margin_raw_1,margin_raw_2,margin_eff_1,margin_eff_2,"
          "subset1_frac,pseudo_precision,discard_frac,test_acc,acc_class_1,acc_class_2");
}

TEST_CASE("run CSV round-trips exactly, including blanks") {
    RunMetrics run = sample_run();
    std::string csv = run_to_csv(run);

    // blank cells where optionals are absent: epoch 0 row has empty l_u/l_c,
    // margins, subset cells
    std::istringstream in(csv);
    std::string header, row0;
    std::getline(in, header);
    std::getline(in, row0);
    CHECK(header == csv_header(4));
    auto cells = metrics_detail::split_csv(row0);
    REQUIRE(cells.size() == 9 + 3 * 4);
    CHECK(cells[0] == "0");
    CHECK(cells[2].empty());   // l_u
    CHECK(cells[3].empty());   // l_c
    CHECK(cells[5].empty());   // margin_raw_1
    CHECK(cells[13].empty());  // subset1_frac
    CHECK(cells[15].empty());  // discard_frac

    RunMetrics back = run_from_csv(csv);
    CHECK(back.classes == 4);
    REQUIRE(back.epochs.size() == 2);
    CHECK(back.epochs[0] == run.epochs[0]);  // float64-exact round trip
    CHECK(back.epochs[1] == run.epochs[1]);
    CHECK(run_to_csv(back).substr(run_to_csv(back).find('\n')) ==
          csv.substr(csv.find('\n')));
}

TEST_CASE("seventeen significant digits survive the CSV") {
    RunMetrics run;
    run.classes = 2;
    EpochRecord e;
    e.epoch = 0;
    e.l_s = 1.0 / 3.0;
    e.l_total = 0.1 + 0.2;  // famously not 0.3
    e.test_acc = 2.0 / 3.0;
    e.acc_class = {1.0 / 7.0, 1e-17};
    run.epochs = {e};
    RunMetrics back = run_from_csv(run_to_csv(run));
    CHECK(back.epochs[0].l_s == 1.0 / 3.0);
    CHECK(back.epochs[0].l_total == 0.1 + 0.2);
    CHECK(back.epochs[0].acc_class[0] == 1.0 / 7.0);
    CHECK(back.epochs[0].acc_class[1] == 1e-17);
}

TEST_CASE("run CSV parse errors") {
    CHECK_THROWS_AS(run_from_csv(""), FormatError);
    CHECK_THROWS_AS(run_from_csv("not,a,header\n"), FormatError);

    std::string csv = csv_header(2) + "\n0,1.0\n";  // too few cells
    CHECK_THROWS_WITH(run_from_csv(csv), Catch::Matchers::ContainsSubstring("cells"));

    std::string bad_num = csv_header(2) + "\n0,x,,,1,,,,,,,,0.5,0.5,0.5\n";
    CHECK_THROWS_AS(run_from_csv(bad_num), FormatError);
}

TEST_CASE("run CSV export validates vector sizes") {
    RunMetrics run = sample_run();
    run.epochs[1].margin_raw = {0.8};  // wrong length
    CHECK_THROWS_AS(run_to_csv(run), FormatError);

    run = sample_run();
    run.epochs[0].acc_class = {0.5};
    CHECK_THROWS_AS(run_to_csv(run), FormatError);
}

TEST_CASE("run JSON round-trips with absent keys for empty optionals") {
    RunMetrics run = sample_run();
    nlohmann::ordered_json j = run_to_json(run);
    CHECK(j["schema"] == 1);
    CHECK(j["kind"] == "run");
    CHECK(j["mode"] == "ada-cm");
    CHECK(j["seed"] == 3);
    CHECK_FALSE(j["epochs"][0].contains("l_u"));
    CHECK_FALSE(j["epochs"][0].contains("margin_raw"));
    CHECK_FALSE(j["epochs"][0].contains("discard_frac"));
    CHECK(j["epochs"][1].contains("l_u"));
    CHECK(j["epochs"][1]["margin_raw"].size() == 4);

    RunMetrics back = run_from_json(j);
    CHECK(back.mode == run.mode);
    CHECK(back.seed == run.seed);
    CHECK(back.config_digest == run.config_digest);
    CHECK(back.classes == run.classes);
    REQUIRE(back.epochs.size() == 2);
    CHECK(back.epochs[0] == run.epochs[0]);
    CHECK(back.epochs[1] == run.epochs[1]);

    nlohmann::json wrong;
    wrong["kind"] = "aggregate";
    CHECK_THROWS_AS(run_from_json(wrong), FormatError);
}

TEST_CASE("aggregate computes per-mode mean and sample std ordered by seed") {
    auto make_run = [](const std::string& mode, std::uint64_t seed, double final_acc) {
        RunMetrics r;
        r.classes = 2;
        r.mode = mode;
        r.seed = seed;
        r.config_digest = "d";
        EpochRecord e = sparse_record(0);
        e.acc_class = {final_acc, final_acc};
        e.test_acc = final_acc;
        r.epochs = {e};
        return r;
    };

    // runs arrive in scrambled seed order and interleaved modes
    std::vector<RunMetrics> runs{
        make_run("b", 5, 0.8), make_run("a", 2, 0.6), make_run("b", 1, 0.6),
        make_run("a", 1, 0.8), make_run("a", 3, 0.7),
    };
    AggregateReport rep = aggregate(runs);
    REQUIRE(rep.modes.size() == 2);
    CHECK(rep.modes[0].mode == "b");  // first appearance wins
    CHECK(rep.modes[1].mode == "a");

    const ModeSummary& b = rep.modes[0];
    CHECK(b.seeds == std::vector<std::uint64_t>{1, 5});
    CHECK(b.final_acc == std::vector<double>{0.6, 0.8});
    CHECK(b.mean == Catch::Approx(0.7).epsilon(1e-15));
    CHECK(b.stddev == Catch::Approx(std::sqrt(0.02)).epsilon(1e-12));  // sample std of {.6,.8}

    const ModeSummary& a = rep.modes[1];
    CHECK(a.seeds == std::vector<std::uint64_t>{1, 2, 3});
    CHECK(a.final_acc == std::vector<double>{0.8, 0.6, 0.7});
    CHECK(a.mean == Catch::Approx(0.7).epsilon(1e-15));

    // permuting the input reorders the mode list (first appearance) but
    // leaves each mode's seed-sorted content untouched
    std::vector<RunMetrics> shuffled{runs[4], runs[0], runs[3], runs[1], runs[2]};
    AggregateReport rep2 = aggregate(shuffled);
    REQUIRE(rep2.modes.size() == 2);
    CHECK(rep2.modes[0].mode == "a");  // "a" arrives first this time
    CHECK(rep2.modes[1].seeds == b.seeds);
    CHECK(rep2.modes[1].final_acc == b.final_acc);
    CHECK(rep2.modes[0].final_acc == a.final_acc);

    // identical accuracies give exactly zero spread
    AggregateReport same = aggregate({make_run("a", 1, 0.5), make_run("a", 2, 0.5)});
    CHECK(same.modes[0].stddev == 0.0);

    SECTION("failure paths") {
        CHECK_THROWS_AS(aggregate({runs[0]}), AggregationError);
        CHECK_THROWS_AS(aggregate({}), AggregationError);

        auto mismatched = runs;
        mismatched[1].config_digest = "other";
        CHECK_THROWS_WITH(aggregate(mismatched),
                          Catch::Matchers::ContainsSubstring("digest"));

        // mode with a single run
        CHECK_THROWS_AS(aggregate({make_run("a", 1, 0.5), make_run("a", 2, 0.5),
                                   make_run("c", 1, 0.5)}),
                        AggregationError);

        auto hollow = runs;
        hollow[0].epochs.clear();
        CHECK_THROWS_AS(aggregate(hollow), AggregationError);
    }
}

TEST_CASE("aggregate JSON and CSV round-trips") {
    AggregateReport rep;
    rep.config_digest = "cafe";
    rep.modes.push_back({"supervised", {1, 2}, {0.5, 0.25}, 0.375, 0.17677669529663689});
    rep.modes.push_back({"ada-cm", {1, 2, 7}, {0.7, 1.0 / 3.0, 0.9}, 0.6444, 0.1});

    nlohmann::ordered_json j = aggregate_to_json(rep);
    CHECK(j["kind"] == "aggregate");
    AggregateReport backj = aggregate_from_json(j);
    CHECK(backj == rep);

    std::string csv = aggregate_to_csv(rep);
    CHECK(csv.substr(0, csv.find('\n')) == "mode,seed,final_acc,mean,stddev");
    AggregateReport backc = aggregate_from_csv(csv);
    CHECK(backc.modes == rep.modes);  // the CSV carries no digest column
    CHECK(backc.config_digest.empty());

    CHECK_THROWS_AS(aggregate_from_csv("who,knows\n"), FormatError);
    CHECK_THROWS_AS(aggregate_from_csv("mode,seed,final_acc,mean,stddev\nada-cm,1,0.5\n"),
                    FormatError);
    nlohmann::json wrong;
    wrong["kind"] = "run";
    CHECK_THROWS_AS(aggregate_from_json(wrong), FormatError);
}

TEST_CASE("text file helpers") {
    std::string path = "metrics_tmp.txt";
    write_text_file(path, "hello\n");
    CHECK(read_text_file(path) == "hello\n");
    std::remove(path.c_str());
    CHECK_THROWS_AS(read_text_file("no_such_file.txt"), IoError);
    CHECK_THROWS_AS(write_text_file("no_dir/x.txt", "x"), IoError);
}
