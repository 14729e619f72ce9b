#include "survbal/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace survbal {

EvalGrid make_eval_grid(std::vector<double> interior_times, double tau_min) {
    if (!(tau_min > 0.0) || !std::isfinite(tau_min)) {
        throw ValidationError("evaluation horizon must be positive and finite");
    }
    EvalGrid g;
    g.tau_min = tau_min;
    g.times.push_back(0.0);
    std::sort(interior_times.begin(), interior_times.end());
    for (double t : interior_times) {
        if (t > g.times.back() && t < tau_min) g.times.push_back(t);
    }
    g.times.push_back(tau_min);
    const size_t k = g.times.size();
    g.weights.assign(k, 0.0);
    for (size_t i = 0; i + 1 < k; ++i) {
        const double h = (g.times[i + 1] - g.times[i]) / 2.0;
        g.weights[i] += h;
        g.weights[i + 1] += h;
    }
    return g;
}

EvalGrid make_eval_grid(const TimeGrid& grid, double tau_min) {
    return make_eval_grid(grid.cuts, tau_min);
}

double quad_l2(const EvalGrid& g, const VectorXd& a, const VectorXd& b) {
    const auto k = static_cast<Eigen::Index>(g.times.size());
    if (a.size() != k || b.size() != k) throw ValidationError("curve length does not match eval grid");
    double s = 0.0;
    for (Eigen::Index i = 0; i < k; ++i) {
        const double d = a(i) - b(i);
        s += g.weights[static_cast<size_t>(i)] * d * d;
    }
    return std::sqrt(s);
}

double mise_surv(const VectorXd& pred, const VectorXd& truth, const EvalGrid& g) {
    return quad_l2(g, pred, truth);
}

double mise_cate(const VectorXd& pred_cate, const VectorXd& true_cate, const EvalGrid& g) {
    return quad_l2(g, pred_cate, true_cate);
}

double fsmise(double mise_surv0, double mise_surv1) {
    return std::sqrt(mise_surv0 * mise_surv0 + mise_surv1 * mise_surv1);
}

double mpehe(const MatrixXd& pred, const MatrixXd& truth) {
    if (pred.rows() != truth.rows() || pred.cols() != truth.cols() || pred.size() == 0) {
        throw ValidationError("CATE matrices must share a nonempty shape");
    }
    return (pred - truth).squaredNorm() / static_cast<double>(pred.size());
}

MetricsSummary aggregate(const VectorXd& mise_cate_per_x, const VectorXd& fsmise_per_x,
                         double mpehe_value) {
    if (mise_cate_per_x.size() == 0 || mise_cate_per_x.size() != fsmise_per_x.size()) {
        throw ValidationError("per-individual score vectors must be nonempty and aligned");
    }
    MetricsSummary s;
    s.mcate = mise_cate_per_x.mean();
    s.fsm = fsmise_per_x.mean();
    s.mpehe = mpehe_value;
    s.mcate_sq = mise_cate_per_x.cwiseProduct(mise_cate_per_x).mean();
    s.fsm_sq = fsmise_per_x.cwiseProduct(fsmise_per_x).mean();
    return s;
}

}  // namespace survbal
