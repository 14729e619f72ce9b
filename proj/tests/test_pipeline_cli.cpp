#include "doctest.h"

#include "survbal/cli.hpp"
#include "survbal/numio.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

using namespace survbal;
namespace fs = std::filesystem;

namespace {

// fresh working directory per test case, removed on destruction
struct TempDir {
    fs::path root;
    explicit TempDir(const std::string& tag) {
        root = fs::temp_directory_path() / ("survbal_test_" + tag);
        fs::remove_all(root);
        fs::create_directories(root);
    }
    ~TempDir() { fs::remove_all(root); }
    std::string path(const std::string& name) const { return (root / name).string(); }
};

void write_file(const std::string& path, const std::string& body) {
    std::ofstream out(path);
    out << body;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// small fast cohort + model shared by the flow tests
std::string base_config() {
    return "[simulate]\n"
           "scheme = ls\n"
           "n = 150\n"
           "p = 4\n"
           "p_wd = 0.5\n"
           "seed = 11\n"
           "\n"
           "[model]\n"
           "hidden = 8\n"
           "phi_layers = 1\n"
           "psi_layers = 1\n"
           "n_durations = 6\n"
           "batch_size = 64\n"
           "max_epochs = 3\n"
           "patience = 3\n"
           "gamma_wd = 0.05\n"
           "seed = 3\n"
           "\n"
           "[split]\n"
           "seed = 5\n";
}

double col_value(const CsvTable& tab, size_t row, const std::string& name) {
    for (size_t c = 0; c < tab.header.size(); ++c) {
        if (tab.header[c] == name) return parse_double(tab.rows[row][c]);
    }
    throw std::runtime_error("column not found: " + name);
}

}  // namespace

TEST_CASE("simulate, train and evaluate produce the full artifact set") {
    TempDir tmp("flow");
    const std::string cfg = tmp.path("cfg.ini");
    write_file(cfg, base_config());
    const std::string out = tmp.path("run");

    REQUIRE(run_cli({"simulate", "--config", cfg, "--out", out}) == 0);
    CHECK(fs::exists(out + "/dataset.csv"));
    CHECK(fs::exists(out + "/truth_params.csv"));

    REQUIRE(run_cli({"train", "--config", cfg, "--out", out}) == 0);
    CHECK(fs::exists(out + "/checkpoint.txt"));
    CsvTable hist = read_csv(out + "/history.csv");
    CHECK(hist.header == std::vector<std::string>({"epoch", "train_obj", "val_obj",
                                                   "balance_term", "seconds"}));
    CHECK(hist.rows.size() >= 2);

    REQUIRE(run_cli({"evaluate", "--config", cfg, "--out", out}) == 0);
    CsvTable metrics = read_csv(out + "/metrics.csv");
    REQUIRE(metrics.header == std::vector<std::string>({"run_id", "seed", "gamma_wd", "p_wd",
                                                        "d_wd_init", "MCATE", "MPEHE", "FSM"}));
    REQUIRE(metrics.rows.size() == 1);
    CHECK(metrics.rows[0][0] == "run0");
    CHECK(metrics.rows[0][1] == "11");
    CHECK(col_value(metrics, 0, "gamma_wd") == 0.05);
    CHECK(col_value(metrics, 0, "p_wd") == 0.5);
    CHECK(col_value(metrics, 0, "d_wd_init") > 0.0);
    CHECK(col_value(metrics, 0, "FSM") > 0.0);

    CsvTable preds = read_csv(out + "/predictions.csv");
    REQUIRE(preds.header == std::vector<std::string>({"i", "tau", "surv0", "surv1", "cate"}));
    CHECK(preds.rows.size() % 150 == 0);
    const size_t grid_len = preds.rows.size() / 150;
    CHECK(grid_len >= 3);
    // every row: cate == surv1 - surv0, survivals inside [0, 1], tau 0 first
    CHECK(parse_double(preds.rows[0][1]) == 0.0);
    CHECK(parse_double(preds.rows[0][2]) == 1.0);
    for (size_t r = 0; r < preds.rows.size(); r += 97) {
        const double s0 = parse_double(preds.rows[r][2]);
        const double s1 = parse_double(preds.rows[r][3]);
        CHECK(s0 >= 0.0);
        CHECK(s0 <= 1.0);
        CHECK(std::abs(parse_double(preds.rows[r][4]) - (s1 - s0)) < 1e-12);
    }

    CsvTable scores = read_csv(out + "/scores.csv");
    REQUIRE(scores.header == std::vector<std::string>({"i", "mise_surv0", "mise_surv1",
                                                       "mise_cate", "fsmise"}));
    CHECK(scores.rows.size() == 150);
}

TEST_CASE("the oracle predictor scores exactly zero") {
    TempDir tmp("oracle");
    const std::string cfg = tmp.path("cfg.ini");
    write_file(cfg, base_config());
    const std::string out = tmp.path("run");
    REQUIRE(run_cli({"simulate", "--config", cfg, "--out", out}) == 0);

    const std::string ecfg = tmp.path("eval.ini");
    write_file(ecfg, "[paths]\n"
                     "dataset = " + out + "/dataset.csv\n"
                     "truth = " + out + "/truth_params.csv\n"
                     "\n"
                     "[evaluate]\n"
                     "predictor = oracle\n"
                     "grid_bins = 10\n");
    const std::string eout = tmp.path("eval");
    REQUIRE(run_cli({"evaluate", "--config", ecfg, "--out", eout}) == 0);

    CsvTable metrics = read_csv(eout + "/metrics.csv");
    CHECK(col_value(metrics, 0, "MCATE") < 1e-12);
    CHECK(col_value(metrics, 0, "MPEHE") < 1e-24);
    CHECK(col_value(metrics, 0, "FSM") < 1e-12);
    CsvTable scores = read_csv(eout + "/scores.csv");
    REQUIRE(scores.rows.size() == 150);
    for (size_t r = 0; r < scores.rows.size(); ++r) {
        CHECK(parse_double(scores.rows[r][1]) < 1e-12);
        CHECK(parse_double(scores.rows[r][2]) < 1e-12);
        CHECK(parse_double(scores.rows[r][3]) < 1e-12);
        CHECK(parse_double(scores.rows[r][4]) < 1e-12);
    }
}

TEST_CASE("the shifted-truth predictor matches its closed form") {
    TempDir tmp("shift");
    const std::string cfg = tmp.path("cfg.ini");
    write_file(cfg, base_config());
    const std::string out = tmp.path("run");
    REQUIRE(run_cli({"simulate", "--config", cfg, "--out", out}) == 0);

    // tau_min is recorded in the truth parameter table
    double tau_min = -1.0;
    CsvTable tp = read_csv(out + "/truth_params.csv");
    for (const auto& row : tp.rows) {
        if (row[1] == "tau_min") tau_min = parse_double(row[2]);
    }
    REQUIRE(tau_min > 0.0);

    const double shift = 0.1;
    const std::string ecfg = tmp.path("eval.ini");
    write_file(ecfg, "[paths]\n"
                     "dataset = " + out + "/dataset.csv\n"
                     "truth = " + out + "/truth_params.csv\n"
                     "\n"
                     "[evaluate]\n"
                     "predictor = truth_shift\n"
                     "shift = 0.1\n"
                     "grid_bins = 10\n");
    const std::string eout = tmp.path("eval");
    REQUIRE(run_cli({"evaluate", "--config", ecfg, "--out", eout}) == 0);

    // a constant gap on both arms: per-arm error shift*sqrt(tau), no cate error
    const double expect_surv = shift * std::sqrt(tau_min);
    const double expect_fsm = shift * std::sqrt(2.0 * tau_min);
    CsvTable scores = read_csv(eout + "/scores.csv");
    REQUIRE(scores.rows.size() == 150);
    for (size_t r = 0; r < scores.rows.size(); r += 13) {
        CHECK(std::abs(parse_double(scores.rows[r][1]) - expect_surv) < 1e-9);
        CHECK(std::abs(parse_double(scores.rows[r][2]) - expect_surv) < 1e-9);
        CHECK(parse_double(scores.rows[r][3]) < 1e-9);
        CHECK(std::abs(parse_double(scores.rows[r][4]) - expect_fsm) < 1e-9);
    }
    CsvTable metrics = read_csv(eout + "/metrics.csv");
    CHECK(std::abs(col_value(metrics, 0, "FSM") - expect_fsm) < 1e-9);
    CHECK(col_value(metrics, 0, "MPEHE") < 1e-18);
}

TEST_CASE("invalid inputs exit with code one") {
    TempDir tmp("bad");
    const std::string bad = tmp.path("bad.ini");
    write_file(bad, "[simulate]\nn = 100\np = 5\nrho = 1.5\n");
    CHECK(run_cli({"simulate", "--config", bad, "--out", tmp.path("o1")}) == 1);

    CHECK(run_cli({"simulate", "--config", tmp.path("missing.ini"), "--out", tmp.path("o2")}) == 1);

    const std::string cfg = tmp.path("cfg.ini");
    write_file(cfg, base_config());
    const std::string out = tmp.path("run");
    REQUIRE(run_cli({"simulate", "--config", cfg, "--out", out}) == 0);
    const std::string ecfg = tmp.path("eval.ini");
    write_file(ecfg, "[paths]\n"
                     "dataset = " + out + "/dataset.csv\n"
                     "truth = " + out + "/truth_params.csv\n"
                     "\n[evaluate]\npredictor = psychic\n");
    CHECK(run_cli({"evaluate", "--config", ecfg, "--out", tmp.path("o3")}) == 1);

    // evaluating without a checkpoint fails cleanly
    CHECK(run_cli({"evaluate", "--config", cfg, "--out", out}) == 1);

    CHECK(run_cli({"frobnicate", "--config", cfg}) == 1);
    CHECK(run_cli({"--help"}) == 0);
}

TEST_CASE("training divergence exits with code two and keeps a finite checkpoint") {
    TempDir tmp("div");
    const std::string cfg = tmp.path("cfg.ini");
    write_file(cfg, base_config());
    const std::string out = tmp.path("run");
    REQUIRE(run_cli({"simulate", "--config", cfg, "--out", out}) == 0);

    const std::string dcfg = tmp.path("diverge.ini");
    write_file(dcfg, "[simulate]\nscheme = ls\nn = 150\np = 4\nseed = 11\n"
                     "[model]\nhidden = 8\nphi_layers = 1\npsi_layers = 1\n"
                     "n_durations = 6\nbatch_size = 64\nmax_epochs = 5\nlr = 1e160\nseed = 3\n"
                     "[paths]\ndataset = " + out + "/dataset.csv\n");
    CHECK(run_cli({"train", "--config", dcfg, "--out", tmp.path("dout")}) == 2);
    CHECK(fs::exists(tmp.path("dout") + "/checkpoint.txt"));
}

TEST_CASE("repeated runs write byte-identical artifacts") {
    TempDir tmp("det");
    const std::string cfg = tmp.path("cfg.ini");
    write_file(cfg, base_config());
    for (const std::string run : {"a", "b"}) {
        const std::string out = tmp.path(run);
        REQUIRE(run_cli({"simulate", "--config", cfg, "--out", out}) == 0);
        REQUIRE(run_cli({"train", "--config", cfg, "--out", out}) == 0);
        REQUIRE(run_cli({"evaluate", "--config", cfg, "--out", out}) == 0);
    }
    for (const std::string name :
         {"dataset.csv", "truth_params.csv", "checkpoint.txt", "metrics.csv", "predictions.csv",
          "scores.csv"}) {
        INFO(name);
        CHECK(slurp(tmp.path("a") + "/" + name) == slurp(tmp.path("b") + "/" + name));
    }
    // the history differs only in wall-clock seconds
    CsvTable ha = read_csv(tmp.path("a") + "/history.csv");
    CsvTable hb = read_csv(tmp.path("b") + "/history.csv");
    REQUIRE(ha.rows.size() == hb.rows.size());
    for (size_t r = 0; r < ha.rows.size(); ++r) {
        for (size_t c = 0; c + 1 < ha.header.size(); ++c) {
            CHECK(ha.rows[r][c] == hb.rows[r][c]);
        }
    }
}

TEST_CASE("theory command verifies bounds and flags injected violations") {
    TempDir tmp("theory");
    const std::string cfg = tmp.path("cfg.ini");
    write_file(cfg, "[simulate]\nscheme = ls\nn = 60\np = 4\nseed = 9\n"
                    "[theory]\npairs = 3\nx_per_pair = 2\ntheorem_pairs = 2\n"
                    "theorem_x = 5\ncells = 400\nseed = 13\n");
    const std::string out = tmp.path("rep");
    REQUIRE(run_cli({"theory", "--config", cfg, "--out", out}) == 0);
    for (const std::string name : {"pinsker_report.csv", "cate_tv_report.csv", "theorem1_report.csv"}) {
        CsvTable tab = read_csv(out + "/" + name);
        REQUIRE(tab.header == std::vector<std::string>({"pair_id", "x_id", "lhs", "rhs",
                                                        "slack", "holds"}));
        CHECK(!tab.rows.empty());
        for (const auto& row : tab.rows) CHECK(row[5] == "true");
    }
    CsvTable pins = read_csv(out + "/pinsker_report.csv");
    CHECK(pins.rows.size() == 6);
    CsvTable t1 = read_csv(out + "/theorem1_report.csv");
    CHECK(t1.rows.size() == 2);
    CHECK(t1.rows[0][1] == "-1");

    const std::string vcfg = tmp.path("violate.ini");
    write_file(vcfg, "[simulate]\nscheme = ls\nn = 60\np = 4\nseed = 9\n"
                     "[theory]\npairs = 2\nx_per_pair = 2\ntheorem_pairs = 1\n"
                     "theorem_x = 5\ncells = 400\nseed = 13\ninject_violation = true\n");
    CHECK(run_cli({"theory", "--config", vcfg, "--out", tmp.path("vrep")}) == 3);
    CsvTable vp = read_csv(tmp.path("vrep") + "/pinsker_report.csv");
    bool any_false = false;
    for (const auto& row : vp.rows) any_false = any_false || row[5] == "false";
    CHECK(any_false);
}

TEST_CASE("gamma sweep emits the replicate grid and a recomputable summary") {
    TempDir tmp("sweep");
    const std::string cfg = tmp.path("cfg.ini");
    write_file(cfg, "[simulate]\nscheme = ls\nn = 120\np = 4\np_wd = 1.0\n"
                    "[model]\nhidden = 8\nphi_layers = 1\npsi_layers = 1\nn_durations = 5\n"
                    "batch_size = 64\nmax_epochs = 2\npatience = 2\n"
                    "[sweep]\nkind = gamma\ngamma_values = 0, 0.05\nreplicates = 2\nseed = 7\n");
    const std::string out = tmp.path("out");
    REQUIRE(run_cli({"sweep", "--config", cfg, "--out", out}) == 0);

    CsvTable runs = read_csv(out + "/sweep_runs.csv");
    REQUIRE(runs.header.size() == 16);
    CHECK(runs.header[0] == "run_id");
    REQUIRE(runs.rows.size() == 4);  // 2 gamma values x 2 replicates
    CsvTable summary = read_csv(out + "/sweep_summary.csv");
    REQUIRE(summary.rows.size() == 2);

    for (size_t s = 0; s < summary.rows.size(); ++s) {
        const double g = col_value(summary, s, "grid_value");
        double fsm_sum = 0.0, gap_sum = 0.0;
        int cnt = 0;
        for (size_t r = 0; r < runs.rows.size(); ++r) {
            if (col_value(runs, r, "grid_value") != g) continue;
            if (runs.rows[r][15] == "true") continue;
            fsm_sum += col_value(runs, r, "FSM");
            gap_sum += col_value(runs, r, "FSM_ablation") - col_value(runs, r, "FSM");
            ++cnt;
        }
        REQUIRE(cnt == 2);
        CHECK(col_value(summary, s, "n_ok") == cnt);
        CHECK(std::abs(col_value(summary, s, "fsm_mean") - fsm_sum / cnt) < 1e-12);
        CHECK(std::abs(col_value(summary, s, "gap_mean") - gap_sum / cnt) < 1e-12);
    }
}

TEST_CASE("random search ranks a leaderboard on disk") {
    TempDir tmp("search");
    const std::string cfg = tmp.path("cfg.ini");
    write_file(cfg, base_config());
    const std::string out = tmp.path("run");
    REQUIRE(run_cli({"simulate", "--config", cfg, "--out", out}) == 0);

    const std::string scfg = tmp.path("search.ini");
    write_file(scfg, "[paths]\ndataset = " + out + "/dataset.csv\n"
                     "[model]\nhidden = 8\nphi_layers = 1\npsi_layers = 1\nn_durations = 5\n"
                     "batch_size = 64\nmax_epochs = 2\npatience = 2\n"
                     "[search]\nbudget = 3\nhidden = 8, 16\nlr = 0.001, 0.01\nseed = 21\n");
    REQUIRE(run_cli({"search", "--config", scfg, "--out", out}) == 0);
    CsvTable lb = read_csv(out + "/leaderboard.csv");
    REQUIRE(lb.header.size() == 12);
    REQUIRE(lb.rows.size() == 3);
    for (size_t r = 1; r < lb.rows.size(); ++r) {
        CHECK(col_value(lb, r - 1, "val_obj") <= col_value(lb, r, "val_obj"));
    }
    for (size_t r = 0; r < lb.rows.size(); ++r) {
        const double hidden = col_value(lb, r, "hidden");
        CHECK((hidden == 8.0 || hidden == 16.0));
    }
}

TEST_CASE("the installed binary answers help and rejects nonsense") {
    const std::string bin = SURVBAL_BIN;
    REQUIRE(fs::exists(bin));
    auto run = [&bin](const std::string& args) {
        const int raw = std::system((bin + " " + args + " > /dev/null 2>&1").c_str());
        return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    };
    CHECK(run("--help") == 0);
    CHECK(run("frobnicate") == 1);
    CHECK(run("train") == 1);  // missing required --config
}
