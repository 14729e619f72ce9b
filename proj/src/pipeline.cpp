#include "survbal/pipeline.hpp"

#include "survbal/numio.hpp"

#include <cmath>
#include <exception>

namespace survbal {

EvalResult evaluate_curves(const MatrixXd& s0, const MatrixXd& s1, const std::vector<int>& truth_rows,
                           const SimTruth& truth, const EvalGrid& grid) {
    const int n = static_cast<int>(truth_rows.size());
    const auto nt = static_cast<Eigen::Index>(grid.times.size());
    if (s0.rows() != n || s1.rows() != n || s0.cols() != nt || s1.cols() != nt) {
        throw ValidationError("prediction matrices do not match rows x eval times");
    }
    EvalResult ev;
    ev.grid = grid;
    ev.surv0 = s0;
    ev.surv1 = s1;
    ev.mise_surv0.resize(n);
    ev.mise_surv1.resize(n);
    ev.mise_cate_per_x.resize(n);
    ev.fsmise_per_x.resize(n);

    MatrixXd true0(n, nt), true1(n, nt);
    for (int i = 0; i < n; ++i) {
        const int g = truth_rows[static_cast<size_t>(i)];
        for (Eigen::Index j = 0; j < nt; ++j) {
            true0(i, j) = truth.surv(g, 0, grid.times[static_cast<size_t>(j)]);
            true1(i, j) = truth.surv(g, 1, grid.times[static_cast<size_t>(j)]);
        }
    }
    for (int i = 0; i < n; ++i) {
        ev.mise_surv0(i) = mise_surv(s0.row(i).transpose(), true0.row(i).transpose(), grid);
        ev.mise_surv1(i) = mise_surv(s1.row(i).transpose(), true1.row(i).transpose(), grid);
        ev.mise_cate_per_x(i) = mise_cate((s1.row(i) - s0.row(i)).transpose(),
                                          (true1.row(i) - true0.row(i)).transpose(), grid);
        ev.fsmise_per_x(i) = fsmise(ev.mise_surv0(i), ev.mise_surv1(i));
    }
    const double mp = mpehe(s1 - s0, true1 - true0);
    ev.summary = aggregate(ev.mise_cate_per_x, ev.fsmise_per_x, mp);
    return ev;
}

EvalResult evaluate_model(const ModelParams& p, const MatrixXd& x, const std::vector<int>& truth_rows,
                          const SimTruth& truth) {
    if (x.rows() != static_cast<Eigen::Index>(truth_rows.size())) {
        throw ValidationError("feature rows do not match truth row ids");
    }
    const EvalGrid grid = make_eval_grid(p.grid, truth.tau_min);
    const MatrixXd s0 = predict_survival_matrix(p, x, 0, grid.times);
    const MatrixXd s1 = predict_survival_matrix(p, x, 1, grid.times);
    return evaluate_curves(s0, s1, truth_rows, truth, grid);
}

EvalResult evaluate_oracle(const std::vector<int>& truth_rows, const SimTruth& truth,
                           const TimeGrid& grid, double shift) {
    const EvalGrid eg = make_eval_grid(grid, truth.tau_min);
    const int n = static_cast<int>(truth_rows.size());
    const auto nt = static_cast<Eigen::Index>(eg.times.size());
    MatrixXd s0(n, nt), s1(n, nt);
    for (int i = 0; i < n; ++i) {
        const int g = truth_rows[static_cast<size_t>(i)];
        for (Eigen::Index j = 0; j < nt; ++j) {
            const double tau = eg.times[static_cast<size_t>(j)];
            s0(i, j) = truth.surv(g, 0, tau) + shift;
            s1(i, j) = truth.surv(g, 1, tau) + shift;
        }
    }
    return evaluate_curves(s0, s1, truth_rows, truth, eg);
}

void write_predictions_csv(const EvalResult& ev, const std::vector<int>& ids, const std::string& path) {
    CsvTable tab;
    tab.header = {"i", "tau", "surv0", "surv1", "cate"};
    for (Eigen::Index i = 0; i < ev.surv0.rows(); ++i) {
        for (size_t j = 0; j < ev.grid.times.size(); ++j) {
            const auto jj = static_cast<Eigen::Index>(j);
            tab.rows.push_back({fmt_int(ids[static_cast<size_t>(i)]), fmt_double(ev.grid.times[j]),
                                fmt_double(ev.surv0(i, jj)), fmt_double(ev.surv1(i, jj)),
                                fmt_double(ev.surv1(i, jj) - ev.surv0(i, jj))});
        }
    }
    write_csv(tab, path);
}

void write_metrics_csv(const std::vector<MetricsRow>& rows, const std::string& path) {
    CsvTable tab;
    tab.header = {"run_id", "seed", "gamma_wd", "p_wd", "d_wd_init", "MCATE", "MPEHE", "FSM"};
    for (const auto& r : rows) {
        tab.rows.push_back({r.run_id, fmt_u64(r.seed), fmt_double(r.gamma_wd),
                            fmt_double(r.p_wd), fmt_double(r.d_wd_init), fmt_double(r.summary.mcate),
                            fmt_double(r.summary.mpehe), fmt_double(r.summary.fsm)});
    }
    write_csv(tab, path);
}

RunResult run_single(const SimConfig& sim, const HyperParams& hp, double f_train, double f_val,
                     double f_test, std::uint64_t split_seed) {
    RunResult out;
    try {
        auto [ds, truth] = make_synthetic(sim);
        out.d_wd_init = initial_wasserstein(ds);
        out.tau_min = truth.tau_min;
        out.censored_frac = truth.censored_frac;
        SplitResult sp = split_dataset(ds, f_train, f_val, f_test, split_seed);
        FitResult fr = fit(sp.train, sp.val, hp);
        out.report = std::move(fr.report);
        EvalResult ev = evaluate_model(fr.params, sp.test.x, sp.test_idx, truth);
        out.summary = ev.summary;
    } catch (const std::exception& e) {
        out.failed = true;
        out.error = e.what();
    }
    return out;
}

}  // namespace survbal
