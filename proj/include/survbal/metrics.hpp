#pragma once

#include "survbal/common.hpp"
#include "survbal/dataset.hpp"

#include <vector>

namespace survbal {

// Trapezoid quadrature nodes on [0, tau_min]: endpoints plus the model grid
// cuts that fall strictly inside. Weights are positive and sum to tau_min.
struct EvalGrid {
    std::vector<double> times;
    std::vector<double> weights;
    double tau_min = 0.0;
};

EvalGrid make_eval_grid(const TimeGrid& grid, double tau_min);
EvalGrid make_eval_grid(std::vector<double> interior_times, double tau_min);

// sqrt of the quadrature integral of (a-b)^2 over [0, tau_min].
double quad_l2(const EvalGrid& g, const VectorXd& a, const VectorXd& b);

double mise_surv(const VectorXd& pred, const VectorXd& truth, const EvalGrid& g);
double mise_cate(const VectorXd& pred_cate, const VectorXd& true_cate, const EvalGrid& g);
double fsmise(double mise_surv0, double mise_surv1);

// Mean squared CATE gap over all (individual, time) cells.
double mpehe(const MatrixXd& pred, const MatrixXd& truth);

struct MetricsSummary {
    double mcate = 0.0;  // mean MiseCate
    double fsm = 0.0;    // mean FSMise
    double mpehe = 0.0;
    double mcate_sq = 0.0;  // means of the squared per-x scores
    double fsm_sq = 0.0;
};

MetricsSummary aggregate(const VectorXd& mise_cate_per_x, const VectorXd& fsmise_per_x,
                         double mpehe_value);

}  // namespace survbal
