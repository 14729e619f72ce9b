#include "survbal/train.hpp"

#include "survbal/discretize.hpp"
#include "survbal/numio.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>

namespace survbal {

namespace {

// Adaptive-moment state mirroring the parameter shapes. Learned-weight rows
// are updated sparsely: moments advance only for rows present in the batch,
// bias correction uses the global step count.
struct AdamState {
    std::vector<MatrixXd> mw_phi, vw_phi, mw_psi, vw_psi;
    std::vector<VectorXd> mb_phi, vb_phi, mb_psi, vb_psi;
    VectorXd m_theta, v_theta;
    long step = 0;
    static constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;

    explicit AdamState(const ModelParams& p, int n_theta) {
        for (const auto& w : p.w_phi) {
            mw_phi.push_back(MatrixXd::Zero(w.rows(), w.cols()));
            vw_phi.push_back(MatrixXd::Zero(w.rows(), w.cols()));
        }
        for (const auto& b : p.b_phi) {
            mb_phi.push_back(VectorXd::Zero(b.size()));
            vb_phi.push_back(VectorXd::Zero(b.size()));
        }
        for (const auto& w : p.w_psi) {
            mw_psi.push_back(MatrixXd::Zero(w.rows(), w.cols()));
            vw_psi.push_back(MatrixXd::Zero(w.rows(), w.cols()));
        }
        for (const auto& b : p.b_psi) {
            mb_psi.push_back(VectorXd::Zero(b.size()));
            vb_psi.push_back(VectorXd::Zero(b.size()));
        }
        m_theta = VectorXd::Zero(n_theta);
        v_theta = VectorXd::Zero(n_theta);
    }

    template <typename T>
    static void apply(T& param, T& m, T& v, const T& g, double lr, double c1, double c2) {
        m = beta1 * m + (1.0 - beta1) * g;
        v = beta2 * v + (1.0 - beta2) * g.cwiseProduct(g);
        param -= (lr * (m / c1).array() / ((v / c2).array().sqrt() + eps)).matrix();
    }

    void update(ModelParams& p, VectorXd& theta, const std::vector<int>& theta_rows,
                const NetGrads& g, double lr) {
        ++step;
        const double c1 = 1.0 - std::pow(beta1, static_cast<double>(step));
        const double c2 = 1.0 - std::pow(beta2, static_cast<double>(step));
        for (size_t l = 0; l < p.w_phi.size(); ++l) {
            apply(p.w_phi[l], mw_phi[l], vw_phi[l], g.w_phi[l], lr, c1, c2);
            apply(p.b_phi[l], mb_phi[l], vb_phi[l], g.b_phi[l], lr, c1, c2);
        }
        for (size_t l = 0; l < p.w_psi.size(); ++l) {
            apply(p.w_psi[l], mw_psi[l], vw_psi[l], g.w_psi[l], lr, c1, c2);
            apply(p.b_psi[l], mb_psi[l], vb_psi[l], g.b_psi[l], lr, c1, c2);
        }
        if (m_theta.size() == 0) return;
        for (size_t j = 0; j < theta_rows.size(); ++j) {
            const int i = theta_rows[j];
            const double gi = g.theta(static_cast<Eigen::Index>(j));
            m_theta(i) = beta1 * m_theta(i) + (1.0 - beta1) * gi;
            v_theta(i) = beta2 * v_theta(i) + (1.0 - beta2) * gi * gi;
            theta(i) -= lr * (m_theta(i) / c1) / (std::sqrt(v_theta(i) / c2) + eps);
        }
    }
};

std::vector<int> interval_indices(const TimeGrid& grid, const VectorXd& y) {
    std::vector<int> k(static_cast<size_t>(y.size()));
    for (Eigen::Index i = 0; i < y.size(); ++i) k[static_cast<size_t>(i)] = interval_index(grid, y(i));
    return k;
}

ObjectiveInput slice_input(const Dataset& ds, const std::vector<int>& k, const std::vector<int>& rows,
                           WeightMode mode, double alpha1, const VectorXd& w, const VectorXd& theta) {
    ObjectiveInput in;
    const int nb = static_cast<int>(rows.size());
    in.x.resize(nb, ds.d());
    in.t.resize(nb);
    in.delta.resize(nb);
    in.k.resize(static_cast<size_t>(nb));
    in.mode = mode;
    in.alpha1 = alpha1;
    if (mode == WeightMode::Propensity) in.fixed_w.resize(nb);
    if (mode == WeightMode::Learned) in.theta.resize(nb);
    for (int j = 0; j < nb; ++j) {
        const int i = rows[static_cast<size_t>(j)];
        in.x.row(j) = ds.x.row(i);
        in.t(j) = ds.t(i);
        in.delta(j) = ds.delta(i);
        in.k[static_cast<size_t>(j)] = k[static_cast<size_t>(i)];
        if (mode == WeightMode::Propensity) in.fixed_w(j) = w(i);
        if (mode == WeightMode::Learned) in.theta(j) = theta(i);
    }
    return in;
}

// Validation objective: uniform row weights in every mode so model selection
// does not depend on estimated weights; balance term over the full split.
double validation_objective(const ModelParams& p, const ObjectiveInput& vin, const HyperParams& hp) {
    ObjectiveTerms terms;
    if (hp.es_metric == EsMetric::NllOnly) {
        terms.balance = false;
        terms.ridge_head = false;
        terms.ridge_weights = false;
    }
    return eval_objective(p, vin, hp, terms).total;
}

}  // namespace

void write_history_csv(const TrainReport& report, const std::string& path) {
    CsvTable tab;
    tab.header = {"epoch", "train_obj", "val_obj", "balance_term", "seconds"};
    for (const auto& row : report.history) {
        tab.rows.push_back({fmt_int(row.epoch), fmt_double(row.train_obj), fmt_double(row.val_obj),
                            fmt_double(row.balance_term), fmt_double(row.seconds)});
    }
    write_csv(tab, path);
}

FitResult fit(const Dataset& train, const Dataset& val, const HyperParams& hp) {
    if (hp.max_epochs < 1) throw ValidationError("max_epochs must be at least 1");
    if (hp.batch_size < 2) throw ValidationError("batch_size must be at least 2");
    const auto t0 = std::chrono::steady_clock::now();
    auto elapsed = [&t0] {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    };

    // training-split artifacts: grid, normalizer, weights
    const double max_time = quantile(train.y, hp.grid_quantile);
    TimeGrid grid;
    if (hp.grid_type == GridType::Equidistant) {
        grid = grid_equidistant(max_time, hp.n_durations);
    } else {
        grid = grid_km_quantile(kaplan_meier(train.y, train.delta), hp.n_durations, max_time);
    }
    const Normalizer norm = fit_normalizer(train.x);
    const WeightInfo weights = compute_weights(train, hp.weight_mode);

    ModelParams params = init_params(train.d(), grid, norm, hp, mix_seed(hp.seed, {6}));
    params.interp = hp.interp;

    const int n = train.n();
    VectorXd theta;
    if (hp.weight_mode == WeightMode::Learned) {
        // softplus(theta) = 1 at the start: every weight 1
        theta = VectorXd::Constant(n, std::log(std::exp(1.0) - 1.0));
    }

    const std::vector<int> ktrain = interval_indices(grid, train.y);
    const std::vector<int> kval = interval_indices(grid, val.y);

    std::vector<int> all_rows(static_cast<size_t>(n));
    std::iota(all_rows.begin(), all_rows.end(), 0);
    std::vector<int> val_rows(static_cast<size_t>(val.n()));
    std::iota(val_rows.begin(), val_rows.end(), 0);
    const ObjectiveInput vin = slice_input(val, kval, val_rows, WeightMode::Uniform,
                                           weights.alpha1, weights.w, theta);

    TrainReport report;
    AdamState adam(params, hp.weight_mode == WeightMode::Learned ? n : 0);
    std::mt19937_64 shuffle_rng(mix_seed(hp.seed, {7}));
    const ObjectiveTerms all_terms;

    ModelParams best = params;
    double best_val = std::numeric_limits<double>::infinity();
    int best_epoch = 0;
    bool have_best = false;

    // pre-training row: full-split objectives before any update
    {
        ObjectiveInput tin = slice_input(train, ktrain, all_rows, hp.weight_mode, weights.alpha1,
                                         weights.w, theta);
        ObjectiveBreakdown tb = eval_objective(params, tin, hp, all_terms);
        report.censored_rows_skipped = tb.rows_skipped;
        const double v = validation_objective(params, vin, hp);
        report.history.push_back({0, tb.total, v, tb.balance, elapsed()});
        if (std::isfinite(v)) {
            best_val = v;
            best = params;
            best_epoch = 0;
            have_best = true;
        }
    }

    int since_best = 0;
    report.stop_reason = "max_epochs";
    for (int epoch = 1; epoch <= hp.max_epochs; ++epoch) {
        std::shuffle(all_rows.begin(), all_rows.end(), shuffle_rng);
        double epoch_obj = 0.0;
        double epoch_balance = 0.0;
        int balance_batches = 0;
        bool diverged = false;
        for (int start = 0; start < n && !diverged; start += hp.batch_size) {
            const int stop = std::min(n, start + hp.batch_size);
            std::vector<int> rows(all_rows.begin() + start, all_rows.begin() + stop);
            ObjectiveInput bin = slice_input(train, ktrain, rows, hp.weight_mode, weights.alpha1,
                                             weights.w, theta);
            NetGrads grads;
            ObjectiveBreakdown bb;
            try {
                bb = eval_objective(params, bin, hp, all_terms, &grads);
            } catch (const DivergenceError&) {
                diverged = true;
                break;
            }
            const double gn2 = grads.squared_norm();
            if (!std::isfinite(bb.total) || !std::isfinite(gn2)) {
                diverged = true;
                break;
            }
            if (bb.balance_skipped) ++report.single_arm_batches;
            if (!bb.balance_skipped && hp.gamma_wd != 0.0) {
                epoch_balance += bb.balance;
                ++balance_batches;
            }
            epoch_obj += bb.total * (stop - start);
            if (hp.grad_clip > 0.0) {
                const double gn = std::sqrt(gn2);
                if (gn > hp.grad_clip) grads.scale(hp.grad_clip / gn);
            }
            adam.update(params, theta, rows, grads, hp.lr);
        }
        if (diverged) {
            report.stop_reason = "divergence";
            break;
        }
        double v;
        try {
            v = validation_objective(params, vin, hp);
        } catch (const DivergenceError&) {
            report.stop_reason = "divergence";
            break;
        }
        if (!std::isfinite(v)) {
            report.stop_reason = "divergence";
            break;
        }
        report.history.push_back({epoch, epoch_obj / n,
                                  v, balance_batches > 0 ? epoch_balance / balance_batches : 0.0,
                                  elapsed()});
        // the returned params are the strict argmin; the patience counter only
        // resets on improvements larger than the threshold
        const double improvement = best_val - v;
        if (v < best_val) {
            best_val = v;
            best = params;
            best_epoch = epoch;
            have_best = true;
        }
        if (improvement > hp.min_improvement) {
            since_best = 0;
        } else {
            ++since_best;
        }
        if (since_best >= hp.patience) {
            report.stop_reason = "patience";
            break;
        }
    }

    report.best_epoch = best_epoch;
    report.best_val = best_val;
    FitResult out;
    out.params = have_best ? best : params;
    out.report = std::move(report);
    return out;
}

SearchResult random_search(const Dataset& train, const Dataset& val, const HyperParams& base,
                           const SearchSpace& space, int budget, std::uint64_t seed) {
    if (budget < 1) throw ValidationError("search budget must be at least 1");
    std::mt19937_64 rng(mix_seed(seed, {9}));
    auto pick_i = [&rng](const std::vector<int>& v, int fallback) {
        if (v.empty()) return fallback;
        return v[std::uniform_int_distribution<size_t>(0, v.size() - 1)(rng)];
    };
    auto pick_d = [&rng](const std::vector<double>& v, double fallback) {
        if (v.empty()) return fallback;
        return v[std::uniform_int_distribution<size_t>(0, v.size() - 1)(rng)];
    };

    SearchResult out;
    for (int c = 0; c < budget; ++c) {
        HyperParams hp = base;
        hp.n_durations = pick_i(space.n_durations, base.n_durations);
        hp.hidden = pick_i(space.hidden, base.hidden);
        hp.phi_layers = pick_i(space.phi_layers, base.phi_layers);
        hp.psi_layers = pick_i(space.psi_layers, base.psi_layers);
        hp.lr = pick_d(space.lr, base.lr);
        hp.lambda_r = pick_d(space.lambda_r, base.lambda_r);
        hp.lambda_w = pick_d(space.lambda_w, base.lambda_w);
        hp.gamma_wd = pick_d(space.gamma_wd, base.gamma_wd);
        hp.seed = mix_seed(seed, {10, static_cast<std::uint64_t>(c)});

        SearchEntry entry;
        entry.hp = hp;
        entry.candidate = c;
        try {
            FitResult fr = fit(train, val, hp);
            entry.val_obj = fr.report.best_val;
            entry.diverged = fr.report.stop_reason == "divergence" && !std::isfinite(fr.report.best_val);
        } catch (const DivergenceError&) {
            entry.diverged = true;
        }
        if (entry.diverged) entry.val_obj = std::numeric_limits<double>::infinity();
        out.leaderboard.push_back(std::move(entry));
    }
    std::stable_sort(out.leaderboard.begin(), out.leaderboard.end(),
                     [](const SearchEntry& a, const SearchEntry& b) { return a.val_obj < b.val_obj; });
    if (out.leaderboard.front().diverged) throw DivergenceError("every search candidate diverged");
    out.best = out.leaderboard.front().hp;
    out.best_val = out.leaderboard.front().val_obj;
    return out;
}

}  // namespace survbal
