#include "survbal/theory.hpp"

#include "survbal/numio.hpp"

#include <algorithm>
#include <cmath>

namespace survbal {

namespace {
constexpr double kLogFloor = 1e-12;

double safe_log(double v) { return std::log(std::max(v, kLogFloor)); }
}  // namespace

double WeibullCurve::surv(double y) const {
    if (y <= 0.0) return 1.0;
    return std::exp(-std::pow(lambda * y, alpha) * std::exp(logscale));
}

double WeibullCurve::dens(double y) const {
    if (y <= 0.0) return 0.0;
    const double p = std::pow(lambda * y, alpha);
    return alpha * p / y * std::exp(logscale) * std::exp(-p * std::exp(logscale));
}

WeibullCurve truth_curve(const SimTruth& truth, int i, int t) {
    WeibullCurve c;
    c.alpha = truth.alpha;
    c.lambda = truth.lambda;
    c.logscale = truth.s(i) + truth.eps_treat * t;
    return c;
}

DensityPair make_density_pair(const WeibullCurve& cand, const WeibullCurve& truth, double lambda_c,
                              double tau_min, int cells) {
    if (!(tau_min > 0.0) || !std::isfinite(tau_min)) {
        throw ValidationError("verification window must be positive and finite");
    }
    if (cells < 2) throw ValidationError("verification grid needs at least 2 cells");
    if (lambda_c < 0.0) throw ValidationError("censoring rate must be nonnegative");
    DensityPair pr;
    pr.tau_min = tau_min;
    pr.dt = tau_min / cells;
    pr.f.resize(cells);
    pr.fbar.resize(cells);
    pr.fstar.resize(cells);
    pr.fstarbar.resize(cells);
    pr.hstar.resize(cells);
    pr.hstarbar.resize(cells);
    for (int i = 0; i < cells; ++i) {
        const double y = (i + 0.5) * pr.dt;
        pr.f(i) = cand.dens(y);
        pr.fbar(i) = cand.surv(y);
        pr.fstar(i) = truth.dens(y);
        pr.fstarbar(i) = truth.surv(y);
        pr.hstar(i) = lambda_c * std::exp(-lambda_c * y);
        pr.hstarbar(i) = std::exp(-lambda_c * y);
    }
    pr.eta = std::exp(-lambda_c * tau_min);
    pr.cand_surv_tau = cand.surv(tau_min);
    pr.truth_surv_tau = truth.surv(tau_min);
    return pr;
}

double pointwise_loss(const VectorXd& dens, const VectorXd& surv, const DensityPair& env,
                      double surv_tau) {
    if (dens.size() != env.fstar.size() || surv.size() != env.fstar.size()) {
        throw ValidationError("candidate grids do not match the verification window");
    }
    double s = 0.0;
    for (Eigen::Index i = 0; i < dens.size(); ++i) {
        s -= env.fstar(i) * env.hstarbar(i) * safe_log(dens(i));
        s -= env.hstar(i) * env.fstarbar(i) * safe_log(surv(i));
    }
    s *= env.dt;
    // subjects still at risk at tau_min are administratively censored there;
    // without this boundary mass the loss difference below is not a divergence
    s -= env.truth_surv_tau * env.eta * safe_log(surv_tau);
    return s;
}

double kl_x(const DensityPair& pair) {
    return pointwise_loss(pair.f, pair.fbar, pair, pair.cand_surv_tau) -
           pointwise_loss(pair.fstar, pair.fstarbar, pair, pair.truth_surv_tau);
}

double kl_joint(const DensityPair& pair) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < pair.f.size(); ++i) {
        s += pair.fstar(i) * pair.hstarbar(i) * (safe_log(pair.fstar(i)) - safe_log(pair.f(i)));
        s += pair.hstar(i) * pair.fstarbar(i) * (safe_log(pair.fstarbar(i)) - safe_log(pair.fbar(i)));
    }
    s *= pair.dt;
    // at-risk-at-tau atom; the three observed-data masses then sum to one exactly
    s += pair.truth_surv_tau * pair.eta *
         (safe_log(pair.truth_surv_tau) - safe_log(pair.cand_surv_tau));
    return s;
}

double tv_x(const VectorXd& fa, const VectorXd& fb, double dt) {
    if (fa.size() != fb.size()) throw ValidationError("densities on different grids");
    return 0.5 * (fa - fb).cwiseAbs().sum() * dt;
}

double tv_x(const DensityPair& pair) { return tv_x(pair.f, pair.fstar, pair.dt); }

BoundCheck make_bound_check(double lhs, double rhs, double tol) {
    BoundCheck b;
    b.lhs = lhs;
    b.rhs = rhs;
    b.holds = lhs <= rhs + tol;
    return b;
}

BoundCheck check_pinsker(const DensityPair& pair) {
    if (!(pair.eta > 0.0)) throw ValidationError("censoring survival vanishes on the window");
    const double kl = std::max(kl_x(pair), 0.0);
    return make_bound_check(tv_x(pair), std::sqrt(kl / 2.0) / pair.eta);
}

BoundCheck check_cate_tv(const DensityPair& arm0, const DensityPair& arm1) {
    const double cate_cand = arm1.cand_surv_tau - arm0.cand_surv_tau;
    const double cate_truth = arm1.truth_surv_tau - arm0.truth_surv_tau;
    const double gap = cate_cand - cate_truth;
    const double t0 = tv_x(arm0);
    const double t1 = tv_x(arm1);
    return make_bound_check(gap * gap / 8.0, t0 * t0 + t1 * t1);
}

Theorem1Report check_theorem1(const SimTruth& truth, double u0, double u1,
                              const std::vector<int>& x_rows, int cells) {
    if (x_rows.empty()) throw ValidationError("theorem check needs at least one sampled row");
    Theorem1Report rep;
    rep.eta = std::exp(-truth.lambda_c * truth.tau_min);
    if (!(rep.eta > 0.0)) throw ValidationError("censoring survival vanishes on the window");
    const double u[2] = {u0, u1};
    double pehe = 0.0, er0 = 0.0, er1 = 0.0;
    for (int i : x_rows) {
        DensityPair arm[2];
        for (int t = 0; t < 2; ++t) {
            WeibullCurve tc = truth_curve(truth, i, t);
            WeibullCurve cc = tc;
            cc.lambda = tc.lambda * std::exp(u[t]);
            arm[t] = make_density_pair(cc, tc, truth.lambda_c, truth.tau_min, cells);
        }
        const double gap = (arm[1].cand_surv_tau - arm[0].cand_surv_tau) -
                           (arm[1].truth_surv_tau - arm[0].truth_surv_tau);
        pehe += gap * gap;
        er0 += kl_x(arm[0]);
        er1 += kl_x(arm[1]);
    }
    const double nx = static_cast<double>(x_rows.size());
    rep.pehe = pehe / nx;
    rep.er0 = er0 / nx;
    rep.er1 = er1 / nx;
    rep.n_x = static_cast<int>(x_rows.size());
    rep.bound = make_bound_check(rep.pehe, 4.0 / (rep.eta * rep.eta) * (rep.er0 + rep.er1));
    return rep;
}

void write_bound_report_csv(const std::vector<BoundRow>& rows, const std::string& path) {
    CsvTable tab;
    tab.header = {"pair_id", "x_id", "lhs", "rhs", "slack", "holds"};
    for (const auto& r : rows) {
        tab.rows.push_back({fmt_int(r.pair_id), fmt_int(r.x_id), fmt_double(r.lhs), fmt_double(r.rhs),
                            fmt_double(r.slack), r.holds ? "true" : "false"});
    }
    write_csv(tab, path);
}

}  // namespace survbal
