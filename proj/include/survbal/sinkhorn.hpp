#pragma once

#include "survbal/common.hpp"

namespace survbal {

// Discrete measure: one point per row, positive masses summing to 1.
struct WeightedCloud {
    MatrixXd pts;   // k x d
    VectorXd mass;  // k, positive, sums to 1
};

// Squared Euclidean pairwise costs, a.rows() x b.rows().
MatrixXd cost_matrix(const MatrixXd& a, const MatrixXd& b);

struct SinkhornOptions {
    double epsilon = 0.0;  // <= 0: 0.05 x median off-diagonal cost, per call
    int max_iter = 200;
    double tol = 1e-6;  // L1 marginal violation
};

double auto_epsilon(const MatrixXd& cost);

struct SinkhornSolution {
    VectorXd f, g;        // dual potentials
    double primal;        // <P, C>, entropy excluded
    double dual;          // <f, a> + <g, b>, the entropic optimal value
    double marginal_err;  // L1 row-marginal violation at the last iterate
    int iters;
    double epsilon;
};

// Log-domain Sinkhorn iterations on the potentials.
SinkhornSolution sinkhorn_solve(const WeightedCloud& a, const WeightedCloud& b,
                                const SinkhornOptions& opt = {});

// Transport cost <P*, C> at the converged plan (entropy term excluded).
double sinkhorn_cost(const WeightedCloud& a, const WeightedCloud& b, const SinkhornOptions& opt = {});

// Debiased divergence S(a,b) = W(a,b) - W(a,a)/2 - W(b,b)/2 built from the
// entropic optimal value W (so envelope gradients through the converged
// potentials are exact). One epsilon, resolved from the cross-cost matrix, is
// shared by all three solves. Floored at 0; exactly 0 for identical clouds.
double sinkhorn_divergence(const WeightedCloud& a, const WeightedCloud& b,
                           const SinkhornOptions& opt = {});

struct DivergenceGrad {
    double value = 0.0;
    MatrixXd d_pts_a, d_pts_b;
    // Valid for mass perturbations that keep the total mass fixed.
    VectorXd d_mass_a, d_mass_b;
    double epsilon = 0.0;
};

DivergenceGrad sinkhorn_divergence_grad(const WeightedCloud& a, const WeightedCloud& b,
                                        const SinkhornOptions& opt = {}, bool want_mass_grad = false);

}  // namespace survbal
