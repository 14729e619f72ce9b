#pragma once

#include "survbal/common.hpp"
#include "survbal/simulate.hpp"

#include <string>
#include <vector>

namespace survbal {

// Event-time model exp(-(lambda y)^alpha e^{logscale}) shared by the synthetic
// truth and the perturbed proposals.
struct WeibullCurve {
    double alpha = 2.0;
    double lambda = 1.0;
    double logscale = 0.0;  // s + eps_treat * t

    double surv(double y) const;
    double dens(double y) const;
};

WeibullCurve truth_curve(const SimTruth& truth, int i, int t);

// Candidate and truth densities discretized as piecewise-constant values at
// the midpoints of `cells` equal subintervals of [0, tau_min], together with
// the exponential censoring truth.
struct DensityPair {
    VectorXd f, fbar;          // candidate density and survival
    VectorXd fstar, fstarbar;  // truth density and survival
    VectorXd hstar, hstarbar;  // censoring density and survival
    double tau_min = 0.0;
    double dt = 0.0;
    double eta = 1.0;                // censoring survival at tau_min
    double cand_surv_tau = 1.0;      // survivals evaluated exactly at tau_min
    double truth_surv_tau = 1.0;
};

DensityPair make_density_pair(const WeibullCurve& cand, const WeibullCurve& truth, double lambda_c,
                              double tau_min, int cells = 2000);

// Expected log-likelihood loss of the candidate (dens, surv) on the window,
// with observation administratively censored at tau_min:
// -int f* Hbar* log f - int h* Fbar* log Fbar - Fbar*(tau) Hbar*(tau) log surv_tau.
// The boundary term carries the subjects still at risk at tau_min; the three
// observed-data masses sum to one, so the loss excess below is a proper KL.
// Log arguments floored at 1e-12.
double pointwise_loss(const VectorXd& dens, const VectorXd& surv, const DensityPair& env,
                      double surv_tau);

// Excess of the candidate loss over the truth loss; nonnegative.
double kl_x(const DensityPair& pair);

// The same divergence from the joint observed-data form
// int f* Hbar* log(f*/f) + int h* Fbar* log(Fbar*/Fbar) + atom ratio term,
// coded independently.
double kl_joint(const DensityPair& pair);

double tv_x(const VectorXd& fa, const VectorXd& fb, double dt);
double tv_x(const DensityPair& pair);

struct BoundCheck {
    double lhs = 0.0;
    double rhs = 0.0;
    bool holds = false;
    double slack() const { return rhs - lhs; }
};

BoundCheck make_bound_check(double lhs, double rhs, double tol = 1e-6);

// tv <= (1/eta) sqrt(KL/2)
BoundCheck check_pinsker(const DensityPair& pair);

// (1/8) (CATE_cand - CATE_truth)^2 <= tv(arm0)^2 + tv(arm1)^2, both CATEs read
// off the curves at tau_min.
BoundCheck check_cate_tv(const DensityPair& arm0, const DensityPair& arm1);

struct Theorem1Report {
    BoundCheck bound;  // PEHE <= (4/eta^2)(ER0 + ER1)
    double pehe = 0.0;
    double er0 = 0.0, er1 = 0.0;
    double eta = 0.0;
    int n_x = 0;
};

// Monte-Carlo over the given truth rows; proposals perturb the event rate per
// arm, lambda -> lambda e^{u_t}.
Theorem1Report check_theorem1(const SimTruth& truth, double u0, double u1,
                              const std::vector<int>& x_rows, int cells = 2000);

struct BoundRow {
    int pair_id = 0;
    int x_id = 0;  // -1 for aggregate rows
    double lhs = 0.0, rhs = 0.0, slack = 0.0;
    bool holds = false;
};

// pair_id,x_id,lhs,rhs,slack,holds
void write_bound_report_csv(const std::vector<BoundRow>& rows, const std::string& path);

}  // namespace survbal
