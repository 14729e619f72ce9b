#pragma once

#include "survbal/common.hpp"
#include "survbal/dataset.hpp"
#include "survbal/model.hpp"

#include <vector>

namespace survbal {

// Balancing weights for the training split. w is renormalized to mean 1 within
// each arm; alpha1 is the empirical treated fraction.
struct WeightInfo {
    WeightMode mode = WeightMode::Uniform;
    double alpha1 = 0.5;
    VectorXd w;           // per training row; 1 in uniform mode
    VectorXd propensity;  // e(x) per row, propensity mode only
};

// Logistic regression by full-batch gradient descent; x gets an intercept column.
VectorXd fit_logistic(const MatrixXd& x, const VectorXi& t, int iters = 500, double lr = 0.5);

// alpha_t / p(t|x): marginal over conditional assignment probability.
double raw_weight(double e_x, int t, double alpha1);

WeightInfo compute_weights(const Dataset& train, WeightMode mode);

// Discretized survival negative log-likelihood for one row, from the m head
// logits (bin m+1 implicit at logit 0). Events use the bin mass, censored rows
// the tail mass strictly after their bin. Censored rows in the beyond-horizon
// bin carry no information; they contribute 0 (Zero) or the reference-bin mass
// (LastBin). Returns the loss; fills dlogits when given; sets *skipped for the
// zero-contribution case.
double survival_nll_row(const Eigen::Ref<const VectorXd>& logits, int k, int delta,
                        CensorBeyond mode, VectorXd* dlogits = nullptr, bool* skipped = nullptr);

// Euclidean norm of all head parameters.
double head_norm(const ModelParams& p);

struct ObjectiveTerms {
    bool nll = true;
    bool balance = true;
    bool ridge_head = true;
    bool ridge_weights = true;
};

struct ObjectiveBreakdown {
    double total = 0.0;
    double nll = 0.0;          // (1/n) sum w~_i L_i
    double balance = 0.0;      // divergence value (before the gamma/n factor)
    double ridge_head = 0.0;   // head norm (before the lambda_r/sqrt(n) factor)
    double ridge_weights = 0.0;  // weight norm (before the lambda_w/n factor)
    int rows_skipped = 0;
    bool balance_skipped = false;  // single-arm batch
    double epsilon_used = 0.0;
};

// Gradient of the objective, laid out like the parameters.
struct NetGrads {
    std::vector<MatrixXd> w_phi, w_psi;
    std::vector<VectorXd> b_phi, b_psi;
    VectorXd theta;  // learned-weight parameters of the batch rows

    static NetGrads zeros_like(const ModelParams& p, int n_theta);
    double squared_norm() const;
    void scale(double c);
};

struct ObjectiveInput {
    MatrixXd x;  // raw features of the batch rows
    VectorXi t;
    VectorXi delta;
    std::vector<int> k;  // interval index per row on the model grid
    WeightMode mode = WeightMode::Uniform;
    double alpha1 = 0.5;
    VectorXd fixed_w;  // uniform/propensity weights (already renormalized)
    VectorXd theta;    // learned-mode raw weight parameters
};

// Composite objective
//   (1/n) sum w~_i L_i + (gamma/n) S(arm1 cloud, arm0 cloud)
//   + (lambda_r/sqrt(n)) |psi| + (lambda_w/n) |w|
// on one batch. Learned weights pass through softplus and a per-arm mean-1
// renormalization inside this evaluation. When grads is non-null the exact
// reverse-mode gradient is accumulated (envelope through the converged
// Sinkhorn potentials for the balance term).
ObjectiveBreakdown eval_objective(const ModelParams& p, const ObjectiveInput& in,
                                  const HyperParams& hp, const ObjectiveTerms& terms,
                                  NetGrads* grads = nullptr);

}  // namespace survbal
