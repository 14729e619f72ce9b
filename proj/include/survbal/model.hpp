#pragma once

#include "survbal/common.hpp"
#include "survbal/dataset.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace survbal {

enum class GridType { KMQuantile, Equidistant };
enum class Interp { Linear, Step };
enum class WeightMode { Uniform, Propensity, Learned };
enum class CensorBeyond { Zero, LastBin };  // censored past the last cut: drop row or use last bin
enum class EsMetric { FullObjective, NllOnly };

struct HyperParams {
    int n_durations = 20;
    int phi_layers = 2;
    int psi_layers = 2;   // hidden layers in the head, excluding the linear output
    int hidden = 221;
    int embed_dim = 0;    // 0: same as hidden
    double lr = 1e-3;
    int batch_size = 256;
    int max_epochs = 100;
    int patience = 10;
    double min_improvement = 1e-5;
    double lambda_r = 0.0;   // head-norm penalty
    double lambda_w = 0.0;   // learned-weight-norm penalty
    double gamma_wd = 0.0;   // balancing strength
    double sinkhorn_eps = 0.0;  // <= 0: auto per batch
    int sinkhorn_max_iter = 200;
    double sinkhorn_tol = 1e-6;
    GridType grid_type = GridType::KMQuantile;
    Interp interp = Interp::Linear;
    WeightMode weight_mode = WeightMode::Uniform;
    CensorBeyond censor_beyond = CensorBeyond::Zero;
    EsMetric es_metric = EsMetric::FullObjective;
    double grad_clip = 10.0;
    double grid_quantile = 0.95;  // grid horizon quantile of observed times
    std::uint64_t seed = 1;

    int z() const { return embed_dim > 0 ? embed_dim : hidden; }
};

// Representation MLP phi (rectifier after every layer) feeding a head psi that
// takes the embedding with the treatment appended as one extra coordinate and
// emits m logits; bin m+1 is the implicit reference with logit 0.
struct ModelParams {
    std::vector<MatrixXd> w_phi;  // out x in
    std::vector<VectorXd> b_phi;
    std::vector<MatrixXd> w_psi;
    std::vector<VectorXd> b_psi;
    TimeGrid grid;
    Normalizer norm;
    Interp interp = Interp::Linear;

    int d() const { return static_cast<int>(w_phi.front().cols()); }
    int z() const { return static_cast<int>(w_phi.back().rows()); }
    int m() const { return grid.m(); }
};

// Xavier-Gaussian weights Normal(0, 2/(fan_in+fan_out)), zero biases.
ModelParams init_params(int d, const TimeGrid& grid, const Normalizer& norm, const HyperParams& hp,
                        std::uint64_t seed);

// x is raw; normalization is applied first. Throws DivergenceError on
// non-finite activations.
MatrixXd embed(const ModelParams& p, const MatrixXd& x);
// Embedding already computed; treatment appended per row.
MatrixXd head_logits(const ModelParams& p, const MatrixXd& emb, const VectorXd& t);

// Bin masses over 1..m+1 from the m logits: softmax with an implicit trailing 0.
MatrixXd pmf_from_logits(const MatrixXd& logits);
MatrixXd predict_pmf(const ModelParams& p, const MatrixXd& x, int t);

// Tail mass strictly after bin k (k in 0..m+1): 1 at k=0, 0 at k=m+1.
double survival_after(const Eigen::Ref<const VectorXd>& pmf_row, int k);

// Survival at continuous y from bin values: exact at cuts, step or linear
// within bins, flat at the last cut's value beyond the horizon.
double survival_at(const TimeGrid& grid, const VectorXd& bin_survival, double y, Interp interp);

double predict_survival_at(const ModelParams& p, const Eigen::Ref<const Eigen::RowVectorXd>& x,
                           int t, double y);
double predict_cate(const ModelParams& p, const Eigen::Ref<const Eigen::RowVectorXd>& x, double y);

// Survival curves for one arm at the given times, one row per sample.
MatrixXd predict_survival_matrix(const ModelParams& p, const MatrixXd& x, int t,
                                 const std::vector<double>& times);

// Text checkpoint; numbers round-trip bitwise.
void save_checkpoint(const ModelParams& p, const std::string& path);
ModelParams load_checkpoint(const std::string& path);

}  // namespace survbal
