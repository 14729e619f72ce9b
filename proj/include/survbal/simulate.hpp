#pragma once

#include "survbal/common.hpp"
#include "survbal/dataset.hpp"
#include "survbal/sinkhorn.hpp"

#include <cstdint>
#include <random>
#include <utility>

namespace survbal {

enum class Scheme { LS, NLS };           // linear / nonlinear log-hazard shift s(x)
enum class AssignMode { IndexBased, Logistic };

struct SimConfig {
    int n = 1000;
    int p = 25;
    double rho = 0.1;          // Toeplitz correlation, Sigma[j,k] = rho^|j-k|
    double p_wd = 0.0;         // arm-dependent feature translation
    Scheme scheme = Scheme::LS;
    AssignMode assign = AssignMode::IndexBased;
    double alpha = 2.0;        // Weibull shape
    double lambda = 1.0;       // Weibull rate
    double eps_treat = std::numeric_limits<double>::quiet_NaN();  // NaN: 0.8 LS, 1.8 NLS
    double censor_target = 0.30;
    double tau_quantile = 0.95;  // tau_min = this quantile of all simulated event times
    std::uint64_t seed = 1;

    double resolved_eps() const;
};

// Closed-form ground truth for a simulated cohort. Survival of arm t at time y
// for row i is exp(-(lambda*y)^alpha * exp(s[i] + eps_treat*t)).
struct SimTruth {
    VectorXd s;  // s(x_i) on the shifted features
    double alpha = 2.0, lambda = 1.0, eps_treat = 0.0;
    double tau_min = 0.0;
    double lambda_c = 0.0;      // calibrated censoring rate
    double censored_frac = 0.0; // achieved
    double treated_frac = 0.0;

    double surv(int i, int t, double y) const;
    double cate(int i, double y) const { return surv(i, 1, y) - surv(i, 0, y); }
};

MatrixXd gen_features(int n, int p, double rho, std::mt19937_64& rng);

// Index-based assignment probability for 1-based row index i.
double index_probability(int i);
VectorXd ls_beta(int p);  // beta_j = (-1)^j exp(j/10), normalized to unit norm
double s_of_x(const Eigen::Ref<const Eigen::RowVectorXd>& x, Scheme scheme);

// Inverse-transform Weibull draw; u in (0,1].
double sample_event_time(double s, int t, double lambda, double alpha, double eps_treat, double u);

// Fraction of rows with censor time below event time, censor times -log(u)/lambda_c.
double censored_fraction(const VectorXd& event_times, const VectorXd& uniforms, double lambda_c);

// Bisection on lambda_c in [1e-6, 1e6]; throws when the target band
// (target +- 0.03) cannot be reached.
double calibrate_censoring(const VectorXd& event_times, const VectorXd& uniforms, double target);

std::pair<Dataset, SimTruth> make_synthetic(const SimConfig& cfg);
// Same pipeline on supplied covariates; cfg.p must equal the column count.
std::pair<Dataset, SimTruth> make_semisynthetic(const MatrixXd& x_raw, const SimConfig& cfg);
// Numeric CSV with a header row; every column is a feature.
MatrixXd read_covariates_csv(const std::string& path);

// Debiased entropic-OT divergence between the raw arm-0 and arm-1 feature clouds.
double initial_wasserstein(const Dataset& ds, const SinkhornOptions& opt = {});

void write_truth_params_csv(const SimTruth& truth, const std::string& path);
SimTruth read_truth_params_csv(const std::string& path);

}  // namespace survbal
