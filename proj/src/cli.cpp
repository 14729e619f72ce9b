#include "survbal/cli.hpp"

#include "survbal/config.hpp"
#include "survbal/discretize.hpp"
#include "survbal/numio.hpp"
#include "survbal/pipeline.hpp"
#include "survbal/theory.hpp"

#include "CLI11.hpp"

#include <cmath>
#include <filesystem>
#include <iostream>
#include <random>
#include <sstream>

namespace survbal {

namespace {

struct CommonArgs {
    std::string config;
    std::string out = "out";
    long long seed = -1;  // <0: no override
};

std::string join_path(const std::string& dir, const std::string& name) {
    return (std::filesystem::path(dir) / name).string();
}

Scheme parse_scheme(const std::string& v) {
    if (v == "ls") return Scheme::LS;
    if (v == "nls") return Scheme::NLS;
    throw ValidationError("unknown scheme: " + v + " (expected ls|nls)");
}

AssignMode parse_assign(const std::string& v) {
    if (v == "index") return AssignMode::IndexBased;
    if (v == "logistic") return AssignMode::Logistic;
    throw ValidationError("unknown assignment mode: " + v + " (expected index|logistic)");
}

GridType parse_grid_type(const std::string& v) {
    if (v == "km_quantile") return GridType::KMQuantile;
    if (v == "equidistant") return GridType::Equidistant;
    throw ValidationError("unknown grid type: " + v + " (expected km_quantile|equidistant)");
}

Interp parse_interp(const std::string& v) {
    if (v == "linear") return Interp::Linear;
    if (v == "step") return Interp::Step;
    throw ValidationError("unknown interpolation: " + v + " (expected linear|step)");
}

WeightMode parse_weight_mode(const std::string& v) {
    if (v == "uniform") return WeightMode::Uniform;
    if (v == "propensity") return WeightMode::Propensity;
    if (v == "learned") return WeightMode::Learned;
    throw ValidationError("unknown weight mode: " + v + " (expected uniform|propensity|learned)");
}

CensorBeyond parse_censor_beyond(const std::string& v) {
    if (v == "zero") return CensorBeyond::Zero;
    if (v == "last_bin") return CensorBeyond::LastBin;
    throw ValidationError("unknown censor_beyond: " + v + " (expected zero|last_bin)");
}

EsMetric parse_es_metric(const std::string& v) {
    if (v == "full") return EsMetric::FullObjective;
    if (v == "nll") return EsMetric::NllOnly;
    throw ValidationError("unknown es_metric: " + v + " (expected full|nll)");
}

SimConfig sim_from_config(const Config& c, const CommonArgs& a) {
    SimConfig s;
    s.n = static_cast<int>(c.get_int("simulate", "n", s.n));
    s.p = static_cast<int>(c.get_int("simulate", "p", s.p));
    s.rho = c.get_double("simulate", "rho", s.rho);
    s.p_wd = c.get_double("simulate", "p_wd", s.p_wd);
    s.scheme = parse_scheme(c.get_str("simulate", "scheme", "ls"));
    s.assign = parse_assign(c.get_str("simulate", "assign", "index"));
    s.alpha = c.get_double("simulate", "alpha", s.alpha);
    s.lambda = c.get_double("simulate", "lambda", s.lambda);
    s.eps_treat = c.get_double("simulate", "eps_treat", s.eps_treat);
    s.censor_target = c.get_double("simulate", "censor_target", s.censor_target);
    s.tau_quantile = c.get_double("simulate", "tau_quantile", s.tau_quantile);
    s.seed = static_cast<std::uint64_t>(c.get_int("simulate", "seed", 1));
    if (a.seed >= 0) s.seed = static_cast<std::uint64_t>(a.seed);
    return s;
}

HyperParams hp_from_config(const Config& c, const CommonArgs& a) {
    HyperParams h;
    h.n_durations = static_cast<int>(c.get_int("model", "n_durations", h.n_durations));
    h.phi_layers = static_cast<int>(c.get_int("model", "phi_layers", h.phi_layers));
    h.psi_layers = static_cast<int>(c.get_int("model", "psi_layers", h.psi_layers));
    h.hidden = static_cast<int>(c.get_int("model", "hidden", h.hidden));
    h.embed_dim = static_cast<int>(c.get_int("model", "embed_dim", h.embed_dim));
    h.lr = c.get_double("model", "lr", h.lr);
    h.batch_size = static_cast<int>(c.get_int("model", "batch_size", h.batch_size));
    h.max_epochs = static_cast<int>(c.get_int("model", "max_epochs", h.max_epochs));
    h.patience = static_cast<int>(c.get_int("model", "patience", h.patience));
    h.min_improvement = c.get_double("model", "min_improvement", h.min_improvement);
    h.lambda_r = c.get_double("model", "lambda_r", h.lambda_r);
    h.lambda_w = c.get_double("model", "lambda_w", h.lambda_w);
    h.gamma_wd = c.get_double("model", "gamma_wd", h.gamma_wd);
    h.sinkhorn_eps = c.get_double("model", "sinkhorn_eps", h.sinkhorn_eps);
    h.sinkhorn_max_iter = static_cast<int>(c.get_int("model", "sinkhorn_max_iter", h.sinkhorn_max_iter));
    h.sinkhorn_tol = c.get_double("model", "sinkhorn_tol", h.sinkhorn_tol);
    h.grid_type = parse_grid_type(c.get_str("model", "grid", "km_quantile"));
    h.interp = parse_interp(c.get_str("model", "interp", "linear"));
    h.weight_mode = parse_weight_mode(c.get_str("model", "weights", "uniform"));
    h.censor_beyond = parse_censor_beyond(c.get_str("model", "censor_beyond", "zero"));
    h.es_metric = parse_es_metric(c.get_str("model", "es_metric", "full"));
    h.grad_clip = c.get_double("model", "grad_clip", h.grad_clip);
    h.grid_quantile = c.get_double("model", "grid_quantile", h.grid_quantile);
    h.seed = static_cast<std::uint64_t>(c.get_int("model", "seed", 1));
    if (a.seed >= 0) h.seed = static_cast<std::uint64_t>(a.seed);
    return h;
}

struct SplitSpec {
    double f_train = 0.6, f_val = 0.2, f_test = 0.2;
    std::uint64_t seed = 1;
};

SplitSpec split_from_config(const Config& c) {
    SplitSpec s;
    s.f_train = c.get_double("split", "f_train", s.f_train);
    s.f_val = c.get_double("split", "f_val", s.f_val);
    s.f_test = c.get_double("split", "f_test", s.f_test);
    s.seed = static_cast<std::uint64_t>(c.get_int("split", "seed", 1));
    return s;
}

void ensure_out_dir(const std::string& out) {
    std::error_code ec;
    std::filesystem::create_directories(out, ec);
    if (ec) throw ValidationError("cannot create output directory: " + out);
}

int cmd_simulate(const CommonArgs& a) {
    Config c = Config::parse_file(a.config);
    SimConfig sim = sim_from_config(c, a);
    ensure_out_dir(a.out);
    std::pair<Dataset, SimTruth> made;
    if (c.has("paths", "covariates")) {
        const MatrixXd x = read_covariates_csv(c.get_str("paths", "covariates", ""));
        if (!c.has("simulate", "p")) sim.p = static_cast<int>(x.cols());
        made = make_semisynthetic(x, sim);
    } else {
        made = make_synthetic(sim);
    }
    auto& [ds, truth] = made;
    const double dwd = initial_wasserstein(ds);
    write_dataset_csv(ds, join_path(a.out, "dataset.csv"));
    write_truth_params_csv(truth, join_path(a.out, "truth_params.csv"));
    std::cout << "n=" << ds.n() << " p=" << ds.d() << " censored_frac=" << fmt_double(truth.censored_frac)
              << " treated_frac=" << fmt_double(truth.treated_frac)
              << " d_wd_init=" << fmt_double(dwd) << " tau_min=" << fmt_double(truth.tau_min) << "\n";
    std::cout << "wrote " << join_path(a.out, "dataset.csv") << " and "
              << join_path(a.out, "truth_params.csv") << "\n";
    return 0;
}

int cmd_train(const CommonArgs& a) {
    Config c = Config::parse_file(a.config);
    HyperParams hp = hp_from_config(c, a);
    SplitSpec sp = split_from_config(c);
    const std::string ds_path = c.get_str("paths", "dataset", join_path(a.out, "dataset.csv"));
    Dataset ds = read_dataset_csv(ds_path);
    SplitResult splits = split_dataset(ds, sp.f_train, sp.f_val, sp.f_test, sp.seed);
    ensure_out_dir(a.out);
    FitResult fr = fit(splits.train, splits.val, hp);
    save_checkpoint(fr.params, join_path(a.out, "checkpoint.txt"));
    write_history_csv(fr.report, join_path(a.out, "history.csv"));
    std::cout << "best_epoch=" << fr.report.best_epoch << " best_val=" << fmt_double(fr.report.best_val)
              << " stop=" << fr.report.stop_reason
              << " single_arm_batches=" << fr.report.single_arm_batches << "\n";
    std::cout << "wrote " << join_path(a.out, "checkpoint.txt") << " and "
              << join_path(a.out, "history.csv") << "\n";
    if (fr.report.stop_reason == "divergence") {
        std::cerr << "training diverged; kept the best finite checkpoint\n";
        return 2;
    }
    return 0;
}

int cmd_evaluate(const CommonArgs& a) {
    Config c = Config::parse_file(a.config);
    const std::string ds_path = c.get_str("paths", "dataset", join_path(a.out, "dataset.csv"));
    const std::string truth_path = c.get_str("paths", "truth", join_path(a.out, "truth_params.csv"));
    const std::string ckpt_path = c.get_str("paths", "checkpoint", join_path(a.out, "checkpoint.txt"));
    const std::string predictor = c.get_str("evaluate", "predictor", "checkpoint");
    Dataset ds = read_dataset_csv(ds_path);
    SimTruth truth = read_truth_params_csv(truth_path);
    if (truth.s.size() != ds.n()) {
        throw ValidationError("truth rows do not match dataset rows");
    }
    std::vector<int> rows(static_cast<size_t>(ds.n()));
    for (int i = 0; i < ds.n(); ++i) rows[static_cast<size_t>(i)] = i;

    EvalResult ev;
    if (predictor == "checkpoint") {
        ModelParams params = load_checkpoint(ckpt_path);
        if (params.d() != ds.d()) throw ValidationError("checkpoint feature width does not match dataset");
        if (params.grid.horizon() <= 0.0 || truth.tau_min <= 0.0) {
            throw ValidationError("grid mismatch between checkpoint and truth window");
        }
        ev = evaluate_model(params, ds.x, rows, truth);
    } else if (predictor == "oracle" || predictor == "truth_shift") {
        const double shift = predictor == "oracle" ? 0.0 : c.get_double("evaluate", "shift", 0.1);
        const int m = static_cast<int>(c.get_int("evaluate", "grid_bins", 20));
        ev = evaluate_oracle(rows, truth, grid_equidistant(truth.tau_min, m), shift);
    } else {
        throw ValidationError("unknown predictor: " + predictor + " (expected checkpoint|oracle|truth_shift)");
    }

    ensure_out_dir(a.out);
    MetricsRow row;
    row.run_id = c.get_str("run", "id", "run0");
    row.seed = static_cast<std::uint64_t>(c.get_int("simulate", "seed", 1));
    row.gamma_wd = c.get_double("model", "gamma_wd", 0.0);
    row.p_wd = c.get_double("simulate", "p_wd", 0.0);
    row.d_wd_init = initial_wasserstein(ds);
    row.summary = ev.summary;
    write_metrics_csv({row}, join_path(a.out, "metrics.csv"));
    write_predictions_csv(ev, rows, join_path(a.out, "predictions.csv"));
    {
        CsvTable tab;
        tab.header = {"i", "mise_surv0", "mise_surv1", "mise_cate", "fsmise"};
        for (Eigen::Index i = 0; i < ev.mise_cate_per_x.size(); ++i) {
            tab.rows.push_back({fmt_int(i), fmt_double(ev.mise_surv0(i)), fmt_double(ev.mise_surv1(i)),
                                fmt_double(ev.mise_cate_per_x(i)), fmt_double(ev.fsmise_per_x(i))});
        }
        write_csv(tab, join_path(a.out, "scores.csv"));
    }
    std::cout << "MCATE=" << fmt_double(ev.summary.mcate) << " MPEHE=" << fmt_double(ev.summary.mpehe)
              << " FSM=" << fmt_double(ev.summary.fsm) << "\n";
    std::cout << "wrote " << join_path(a.out, "metrics.csv") << ", "
              << join_path(a.out, "predictions.csv") << ", " << join_path(a.out, "scores.csv") << "\n";
    return 0;
}

struct SweepRow {
    std::string run_id;
    std::string sweep;
    double grid_value = 0.0;
    int replicate = 0;
    std::uint64_t data_seed = 0, train_seed = 0;
    double gamma_wd = 0.0, p_wd = 0.0, d_wd_init = 0.0;
    MetricsSummary summary;
    double fsm_ablation = 0.0;
    bool failed = false;
};

void write_sweep_rows(const std::vector<SweepRow>& rows, const std::string& path) {
    CsvTable tab;
    tab.header = {"run_id", "sweep", "grid_value", "replicate", "data_seed", "train_seed",
                  "gamma_wd", "p_wd", "d_wd_init", "MCATE", "MPEHE", "FSM",
                  "MCATE_sq", "FSM_sq", "FSM_ablation", "failed"};
    for (const auto& r : rows) {
        tab.rows.push_back({r.run_id, r.sweep, fmt_double(r.grid_value), fmt_int(r.replicate),
                            fmt_u64(r.data_seed), fmt_u64(r.train_seed), fmt_double(r.gamma_wd),
                            fmt_double(r.p_wd), fmt_double(r.d_wd_init), fmt_double(r.summary.mcate),
                            fmt_double(r.summary.mpehe), fmt_double(r.summary.fsm),
                            fmt_double(r.summary.mcate_sq), fmt_double(r.summary.fsm_sq),
                            fmt_double(r.fsm_ablation), r.failed ? "true" : "false"});
    }
    write_csv(tab, path);
}

void write_sweep_summary(const std::vector<SweepRow>& rows, const std::vector<double>& grid,
                         const std::string& sweep, const std::string& path) {
    CsvTable tab;
    tab.header = {"sweep", "grid_value", "n_ok", "d_wd_mean", "fsm_mean", "fsm_sd",
                  "fsm_ablation_mean", "fsm_ablation_sd", "gap_mean", "gap_se",
                  "mcate_mean", "mpehe_mean"};
    for (double g : grid) {
        std::vector<double> fsm, abl, gap, dwd, mcate, mp;
        for (const auto& r : rows) {
            if (r.failed || r.grid_value != g) continue;
            fsm.push_back(r.summary.fsm);
            abl.push_back(r.fsm_ablation);
            gap.push_back(r.fsm_ablation - r.summary.fsm);
            dwd.push_back(r.d_wd_init);
            mcate.push_back(r.summary.mcate);
            mp.push_back(r.summary.mpehe);
        }
        auto mean = [](const std::vector<double>& v) {
            double s = 0.0;
            for (double x : v) s += x;
            return v.empty() ? 0.0 : s / static_cast<double>(v.size());
        };
        auto sd = [&mean](const std::vector<double>& v) {
            if (v.size() < 2) return 0.0;
            const double mu = mean(v);
            double s = 0.0;
            for (double x : v) s += (x - mu) * (x - mu);
            return std::sqrt(s / static_cast<double>(v.size() - 1));
        };
        const double n = static_cast<double>(fsm.size());
        tab.rows.push_back({sweep, fmt_double(g), fmt_int(static_cast<long long>(fsm.size())),
                            fmt_double(mean(dwd)), fmt_double(mean(fsm)), fmt_double(sd(fsm)),
                            fmt_double(mean(abl)), fmt_double(sd(abl)), fmt_double(mean(gap)),
                            fmt_double(n > 0 ? sd(gap) / std::sqrt(n) : 0.0), fmt_double(mean(mcate)),
                            fmt_double(mean(mp))});
    }
    write_csv(tab, path);
}

int cmd_sweep(const CommonArgs& a) {
    Config c = Config::parse_file(a.config);
    const CommonArgs no_override{a.config, a.out, -1};
    SimConfig base_sim = sim_from_config(c, no_override);
    HyperParams base_hp = hp_from_config(c, no_override);
    SplitSpec sp = split_from_config(c);
    const std::string kind = c.get_str("sweep", "kind", "gamma");
    const int reps = static_cast<int>(c.get_int("sweep", "replicates", 20));
    std::uint64_t master = static_cast<std::uint64_t>(c.get_int("sweep", "seed", 1));
    if (a.seed >= 0) master = static_cast<std::uint64_t>(a.seed);
    if (reps < 1) throw ValidationError("sweep needs at least one replicate");

    std::vector<SweepRow> rows;
    std::vector<double> grid;
    if (kind == "gamma") {
        grid = c.get_list("sweep", "gamma_values", {0.0, 0.01, 1.0});
        if (grid.empty()) throw ValidationError("empty gamma grid");
        for (int r = 0; r < reps; ++r) {
            SimConfig sim = base_sim;
            sim.seed = mix_seed(master, {21, static_cast<std::uint64_t>(r)});
            const std::uint64_t split_seed = mix_seed(master, {22, static_cast<std::uint64_t>(r)});
            HyperParams abl = base_hp;
            abl.gamma_wd = 0.0;
            abl.seed = mix_seed(master, {23, 9999, static_cast<std::uint64_t>(r)});
            RunResult abl_run = run_single(sim, abl, sp.f_train, sp.f_val, sp.f_test, split_seed);
            for (size_t gi = 0; gi < grid.size(); ++gi) {
                HyperParams hp = base_hp;
                hp.gamma_wd = grid[gi];
                hp.seed = mix_seed(master, {23, static_cast<std::uint64_t>(gi), static_cast<std::uint64_t>(r)});
                RunResult run = run_single(sim, hp, sp.f_train, sp.f_val, sp.f_test, split_seed);
                SweepRow row;
                row.run_id = "g" + fmt_int(static_cast<long long>(gi)) + "_r" + fmt_int(r);
                row.sweep = kind;
                row.grid_value = grid[gi];
                row.replicate = r;
                row.data_seed = sim.seed;
                row.train_seed = hp.seed;
                row.gamma_wd = grid[gi];
                row.p_wd = sim.p_wd;
                row.d_wd_init = run.d_wd_init;
                row.summary = run.summary;
                row.fsm_ablation = abl_run.failed ? 0.0 : abl_run.summary.fsm;
                row.failed = run.failed || abl_run.failed;
                if (run.failed) std::cerr << "replicate " << r << " gamma " << grid[gi] << " failed: " << run.error << "\n";
                rows.push_back(row);
            }
        }
    } else if (kind == "pwd") {
        grid = c.get_list("sweep", "pwd_values", {0.0, 1.0, 2.0, 4.0});
        if (grid.empty()) throw ValidationError("empty p_wd grid");
        const double gamma_star = c.get_double("sweep", "gamma_star", 0.01);
        for (size_t gi = 0; gi < grid.size(); ++gi) {
            for (int r = 0; r < reps; ++r) {
                SimConfig sim = base_sim;
                sim.p_wd = grid[gi];
                sim.seed = mix_seed(master, {21, static_cast<std::uint64_t>(gi), static_cast<std::uint64_t>(r)});
                const std::uint64_t split_seed =
                    mix_seed(master, {22, static_cast<std::uint64_t>(gi), static_cast<std::uint64_t>(r)});
                HyperParams tuned = base_hp;
                tuned.gamma_wd = gamma_star;
                tuned.seed = mix_seed(master, {23, static_cast<std::uint64_t>(gi), static_cast<std::uint64_t>(r)});
                HyperParams abl = base_hp;
                abl.gamma_wd = 0.0;
                abl.seed = mix_seed(master, {24, static_cast<std::uint64_t>(gi), static_cast<std::uint64_t>(r)});
                RunResult run = run_single(sim, tuned, sp.f_train, sp.f_val, sp.f_test, split_seed);
                RunResult abl_run = run_single(sim, abl, sp.f_train, sp.f_val, sp.f_test, split_seed);
                SweepRow row;
                row.run_id = "p" + fmt_int(static_cast<long long>(gi)) + "_r" + fmt_int(r);
                row.sweep = kind;
                row.grid_value = grid[gi];
                row.replicate = r;
                row.data_seed = sim.seed;
                row.train_seed = tuned.seed;
                row.gamma_wd = gamma_star;
                row.p_wd = grid[gi];
                row.d_wd_init = run.d_wd_init;
                row.summary = run.summary;
                row.fsm_ablation = abl_run.failed ? 0.0 : abl_run.summary.fsm;
                row.failed = run.failed || abl_run.failed;
                if (run.failed) std::cerr << "replicate " << r << " p_wd " << grid[gi] << " failed: " << run.error << "\n";
                rows.push_back(row);
            }
        }
    } else {
        throw ValidationError("unknown sweep kind: " + kind + " (expected gamma|pwd)");
    }

    ensure_out_dir(a.out);
    write_sweep_rows(rows, join_path(a.out, "sweep_runs.csv"));
    write_sweep_summary(rows, grid, kind, join_path(a.out, "sweep_summary.csv"));
    int ok = 0;
    for (const auto& r : rows)
        if (!r.failed) ++ok;
    std::cout << "sweep rows=" << rows.size() << " ok=" << ok << "\n";
    std::cout << "wrote " << join_path(a.out, "sweep_runs.csv") << " and "
              << join_path(a.out, "sweep_summary.csv") << "\n";
    return ok > 0 ? 0 : 2;
}

int cmd_theory(const CommonArgs& a) {
    Config c = Config::parse_file(a.config);
    SimConfig sim = sim_from_config(c, a);
    const int pairs = static_cast<int>(c.get_int("theory", "pairs", 50));
    const int x_per_pair = static_cast<int>(c.get_int("theory", "x_per_pair", 10));
    const int t1_pairs = static_cast<int>(c.get_int("theory", "theorem_pairs", 20));
    const int t1_x = static_cast<int>(c.get_int("theory", "theorem_x", 50));
    const int cells = static_cast<int>(c.get_int("theory", "cells", 2000));
    const bool inject = c.get_bool("theory", "inject_violation", false);
    std::uint64_t master = static_cast<std::uint64_t>(c.get_int("theory", "seed", 1));
    if (a.seed >= 0) master = static_cast<std::uint64_t>(a.seed);
    if (pairs < 1 || x_per_pair < 1 || t1_pairs < 1 || t1_x < 1) {
        throw ValidationError("theory suite sizes must be positive");
    }

    auto [ds, truth] = make_synthetic(sim);
    (void)ds;
    std::mt19937_64 rng(mix_seed(master, {31}));
    std::uniform_real_distribution<double> unif_u(-0.5, 0.5);
    std::uniform_int_distribution<int> unif_x(0, static_cast<int>(truth.s.size()) - 1);

    auto emit = [inject](std::vector<BoundRow>& rows, int pair_id, int x_id, const BoundCheck& b) {
        BoundRow row;
        row.pair_id = pair_id;
        row.x_id = x_id;
        row.lhs = inject ? b.rhs : b.lhs;
        row.rhs = inject ? b.lhs : b.rhs;
        row.slack = row.rhs - row.lhs;
        row.holds = row.lhs <= row.rhs + 1e-6;
        rows.push_back(row);
    };

    std::vector<BoundRow> pinsker_rows, cate_rows, t1_rows;
    for (int p = 0; p < pairs; ++p) {
        const double u0 = unif_u(rng);
        const double u1 = unif_u(rng);
        for (int j = 0; j < x_per_pair; ++j) {
            const int xi = unif_x(rng);
            DensityPair arm[2];
            for (int t = 0; t < 2; ++t) {
                WeibullCurve tc = truth_curve(truth, xi, t);
                WeibullCurve cc = tc;
                cc.lambda = tc.lambda * std::exp(t == 0 ? u0 : u1);
                arm[t] = make_density_pair(cc, tc, truth.lambda_c, truth.tau_min, cells);
            }
            emit(pinsker_rows, p, xi, check_pinsker(arm[p % 2]));
            emit(cate_rows, p, xi, check_cate_tv(arm[0], arm[1]));
        }
    }
    for (int q = 0; q < t1_pairs; ++q) {
        const double u0 = unif_u(rng);
        const double u1 = unif_u(rng);
        std::vector<int> xs(static_cast<size_t>(t1_x));
        for (int& v : xs) v = unif_x(rng);
        Theorem1Report rep = check_theorem1(truth, u0, u1, xs, cells);
        emit(t1_rows, q, -1, rep.bound);
    }

    ensure_out_dir(a.out);
    write_bound_report_csv(pinsker_rows, join_path(a.out, "pinsker_report.csv"));
    write_bound_report_csv(cate_rows, join_path(a.out, "cate_tv_report.csv"));
    write_bound_report_csv(t1_rows, join_path(a.out, "theorem1_report.csv"));

    auto count_holds = [](const std::vector<BoundRow>& rows) {
        size_t k = 0;
        for (const auto& r : rows)
            if (r.holds) ++k;
        return k;
    };
    const size_t hp1 = count_holds(pinsker_rows), hc = count_holds(cate_rows), h1 = count_holds(t1_rows);
    std::cout << "pinsker " << hp1 << "/" << pinsker_rows.size() << " hold, cate_tv " << hc << "/"
              << cate_rows.size() << " hold, theorem1 " << h1 << "/" << t1_rows.size() << " hold\n";
    std::cout << "wrote bound reports to " << a.out << "\n";
    const bool all_hold =
        hp1 == pinsker_rows.size() && hc == cate_rows.size() && h1 == t1_rows.size();
    return all_hold ? 0 : 3;
}

int cmd_search(const CommonArgs& a) {
    Config c = Config::parse_file(a.config);
    HyperParams base = hp_from_config(c, CommonArgs{a.config, a.out, -1});
    SplitSpec sp = split_from_config(c);
    const std::string ds_path = c.get_str("paths", "dataset", join_path(a.out, "dataset.csv"));
    Dataset ds = read_dataset_csv(ds_path);
    SplitResult splits = split_dataset(ds, sp.f_train, sp.f_val, sp.f_test, sp.seed);

    SearchSpace space;
    auto as_ints = [&c](const std::string& key) {
        std::vector<int> out;
        for (double v : c.get_list("search", key, {})) out.push_back(static_cast<int>(v));
        return out;
    };
    space.n_durations = as_ints("n_durations");
    space.hidden = as_ints("hidden");
    space.phi_layers = as_ints("phi_layers");
    space.psi_layers = as_ints("psi_layers");
    space.lr = c.get_list("search", "lr", {});
    space.lambda_r = c.get_list("search", "lambda_r", {});
    space.lambda_w = c.get_list("search", "lambda_w", {});
    space.gamma_wd = c.get_list("search", "gamma_wd", {});
    const int budget = static_cast<int>(c.get_int("search", "budget", 5));
    std::uint64_t master = static_cast<std::uint64_t>(c.get_int("search", "seed", 1));
    if (a.seed >= 0) master = static_cast<std::uint64_t>(a.seed);

    SearchResult res = random_search(splits.train, splits.val, base, space, budget, master);
    ensure_out_dir(a.out);
    CsvTable tab;
    tab.header = {"rank", "candidate", "val_obj", "diverged", "n_durations", "hidden", "phi_layers",
                  "psi_layers", "lr", "lambda_r", "lambda_w", "gamma_wd"};
    for (size_t i = 0; i < res.leaderboard.size(); ++i) {
        const auto& e = res.leaderboard[i];
        tab.rows.push_back({fmt_int(static_cast<long long>(i)), fmt_int(e.candidate),
                            fmt_double(e.val_obj), e.diverged ? "true" : "false",
                            fmt_int(e.hp.n_durations), fmt_int(e.hp.hidden), fmt_int(e.hp.phi_layers),
                            fmt_int(e.hp.psi_layers), fmt_double(e.hp.lr), fmt_double(e.hp.lambda_r),
                            fmt_double(e.hp.lambda_w), fmt_double(e.hp.gamma_wd)});
    }
    write_csv(tab, join_path(a.out, "leaderboard.csv"));
    std::cout << "best candidate=" << res.leaderboard.front().candidate
              << " val_obj=" << fmt_double(res.best_val) << "\n";
    std::cout << "wrote " << join_path(a.out, "leaderboard.csv") << "\n";
    return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
    std::vector<const char*> argv;
    argv.push_back("survbal");
    for (const auto& s : args) argv.push_back(s.c_str());
    return run_cli(static_cast<int>(argv.size()), argv.data());
}

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"counterfactual survival estimation with balanced representations"};
    app.require_subcommand(1);

    CommonArgs args;
    std::string cmd;
    for (const char* name : {"simulate", "train", "evaluate", "sweep", "theory", "search"}) {
        CLI::App* sub = app.add_subcommand(name);
        sub->add_option("--config", args.config, "configuration file")->required();
        sub->add_option("--out", args.out, "output directory");
        sub->add_option("--seed", args.seed, "seed override");
        sub->callback([&cmd, name] { cmd = name; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (cmd == "simulate") return cmd_simulate(args);
        if (cmd == "train") return cmd_train(args);
        if (cmd == "evaluate") return cmd_evaluate(args);
        if (cmd == "sweep") return cmd_sweep(args);
        if (cmd == "theory") return cmd_theory(args);
        if (cmd == "search") return cmd_search(args);
        std::cerr << "error: no command selected\n";
        return 1;
    } catch (const DivergenceError& e) {
        std::cerr << "divergence: " << e.what() << "\n";
        return 2;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace survbal
