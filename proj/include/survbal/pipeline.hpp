#pragma once

#include "survbal/common.hpp"
#include "survbal/metrics.hpp"
#include "survbal/model.hpp"
#include "survbal/simulate.hpp"
#include "survbal/train.hpp"

#include <functional>
#include <string>
#include <vector>

namespace survbal {

struct EvalResult {
    EvalGrid grid;
    MatrixXd surv0, surv1;  // predictions, rows x grid times
    VectorXd mise_surv0, mise_surv1, mise_cate_per_x, fsmise_per_x;
    MetricsSummary summary;
};

// Scores prediction matrices over grid.times against the truth rows.
EvalResult evaluate_curves(const MatrixXd& s0, const MatrixXd& s1, const std::vector<int>& truth_rows,
                           const SimTruth& truth, const EvalGrid& grid);

EvalResult evaluate_model(const ModelParams& p, const MatrixXd& x, const std::vector<int>& truth_rows,
                          const SimTruth& truth);

// Debug predictors for harness checks: the truth itself, and the truth with a
// constant additive shift on both arms (closed-form scores).
EvalResult evaluate_oracle(const std::vector<int>& truth_rows, const SimTruth& truth,
                           const TimeGrid& grid, double shift = 0.0);

// i,tau,surv0,surv1,cate; i is the row id in `ids`
void write_predictions_csv(const EvalResult& ev, const std::vector<int>& ids, const std::string& path);

struct MetricsRow {
    std::string run_id;
    std::uint64_t seed = 0;
    double gamma_wd = 0.0, p_wd = 0.0, d_wd_init = 0.0;
    MetricsSummary summary;
};

// run_id,seed,gamma_wd,p_wd,d_wd_init,MCATE,MPEHE,FSM
void write_metrics_csv(const std::vector<MetricsRow>& rows, const std::string& path);

struct RunResult {
    MetricsSummary summary;
    double d_wd_init = 0.0;
    double tau_min = 0.0;
    double censored_frac = 0.0;
    TrainReport report;
    bool failed = false;
    std::string error;
};

// simulate -> split (stratified 0.6/0.2/0.2 by default) -> fit -> score on the
// test split. Failures are captured in the result, not thrown.
RunResult run_single(const SimConfig& sim, const HyperParams& hp, double f_train = 0.6,
                     double f_val = 0.2, double f_test = 0.2, std::uint64_t split_seed = 1);

}  // namespace survbal
