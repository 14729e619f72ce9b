#include "survbal/simulate.hpp"

#include "survbal/discretize.hpp"
#include "survbal/numio.hpp"

#include <algorithm>
#include <cmath>

namespace survbal {

double SimConfig::resolved_eps() const {
    if (!std::isnan(eps_treat)) return eps_treat;
    return scheme == Scheme::LS ? 0.8 : 1.8;
}

double SimTruth::surv(int i, int t, double y) const {
    return std::exp(-std::pow(lambda * y, alpha) * std::exp(s[i] + eps_treat * t));
}

namespace {

double sigmoid(double z) {
    if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
    double e = std::exp(z);
    return e / (1.0 + e);
}

void check_config(const SimConfig& cfg, int p) {
    if (cfg.n < 2) throw ValidationError("simulate: n must be at least 2");
    if (p < 1) throw ValidationError("simulate: p must be positive");
    if (cfg.scheme == Scheme::NLS && p < 2)
        throw ValidationError("simulate: the nonlinear scheme needs at least 2 features");
    if (cfg.rho < 0 || cfg.rho >= 1) throw ValidationError("simulate: rho must be in [0,1)");
    if (cfg.alpha <= 0 || cfg.lambda <= 0)
        throw ValidationError("simulate: Weibull shape and rate must be positive");
    if (cfg.censor_target <= 0 || cfg.censor_target >= 1)
        throw ValidationError("simulate: censor_target must be in (0,1)");
    if (cfg.tau_quantile <= 0 || cfg.tau_quantile > 1)
        throw ValidationError("simulate: tau_quantile must be in (0,1]");
}

}  // namespace

MatrixXd gen_features(int n, int p, double rho, std::mt19937_64& rng) {
    MatrixXd sigma(p, p);
    for (int j = 0; j < p; ++j)
        for (int k = 0; k < p; ++k) sigma(j, k) = std::pow(rho, std::abs(j - k));
    Eigen::LLT<MatrixXd> llt(sigma);
    if (llt.info() != Eigen::Success)
        throw ValidationError("gen_features: covariance is not positive definite");
    MatrixXd L = llt.matrixL();
    std::normal_distribution<double> gauss(0.0, 1.0);
    MatrixXd z(n, p);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < p; ++j) z(i, j) = gauss(rng);
    return z * L.transpose();
}

double index_probability(int i) {
    double sign = (i % 2 == 0) ? 1.0 : -1.0;
    return sigmoid(sign * std::exp(i / 10.0));
}

VectorXd ls_beta(int p) {
    VectorXd beta(p);
    for (int j = 1; j <= p; ++j) beta[j - 1] = (j % 2 == 0 ? 1.0 : -1.0) * std::exp(j / 10.0);
    return beta / beta.norm();
}

double s_of_x(const Eigen::Ref<const Eigen::RowVectorXd>& x, Scheme scheme) {
    const int p = static_cast<int>(x.size());
    if (scheme == Scheme::LS) return x * ls_beta(p);
    double acc = 0.0;
    for (int j = 0; j + 1 < p; ++j) acc += std::sin(x[j] * x[j + 1]);
    return acc / (p - 1);
}

double sample_event_time(double s, int t, double lambda, double alpha, double eps_treat, double u) {
    // F_bar(y) = exp(-(lambda y)^alpha e^{s+eps t}) solved at F_bar(Y) = u.
    return std::pow(-std::log(u) * std::exp(-s - eps_treat * t), 1.0 / alpha) / lambda;
}

double censored_fraction(const VectorXd& event_times, const VectorXd& uniforms, double lambda_c) {
    int censored = 0;
    for (int i = 0; i < event_times.size(); ++i) {
        double c = -std::log(uniforms[i]) / lambda_c;
        if (c < event_times[i]) ++censored;
    }
    return static_cast<double>(censored) / event_times.size();
}

double calibrate_censoring(const VectorXd& event_times, const VectorXd& uniforms, double target) {
    const double band = 0.03;
    double lo = 1e-6, hi = 1e6;
    if (censored_fraction(event_times, uniforms, lo) > target + band)
        throw ValidationError("censoring calibration: fraction above target even at the lower rate bound");
    if (censored_fraction(event_times, uniforms, hi) < target - band)
        throw ValidationError("censoring calibration: fraction below target even at the upper rate bound");
    double llo = std::log(lo), lhi = std::log(hi);
    double lmid = 0.5 * (llo + lhi);
    for (int it = 0; it < 100; ++it) {
        lmid = 0.5 * (llo + lhi);
        if (censored_fraction(event_times, uniforms, std::exp(lmid)) < target)
            llo = lmid;
        else
            lhi = lmid;
    }
    double lambda_c = std::exp(lmid);
    if (std::abs(censored_fraction(event_times, uniforms, lambda_c) - target) > band)
        throw ValidationError("censoring calibration: could not reach the target fraction");
    return lambda_c;
}

namespace {

std::pair<Dataset, SimTruth> build(const MatrixXd& x0, const SimConfig& cfg) {
    const int n = static_cast<int>(x0.rows());
    const int p = static_cast<int>(x0.cols());
    const double eps_treat = cfg.resolved_eps();

    std::mt19937_64 rng_assign(mix_seed(cfg.seed, {2}));
    std::mt19937_64 rng_event(mix_seed(cfg.seed, {3}));
    std::mt19937_64 rng_cens(mix_seed(cfg.seed, {4}));
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    VectorXi t(n);
    VectorXd beta = ls_beta(p);
    for (int i = 0; i < n; ++i) {
        double prob = cfg.assign == AssignMode::IndexBased ? index_probability(i + 1)
                                                           : sigmoid(x0.row(i) * beta);
        t[i] = unif(rng_assign) < prob ? 1 : 0;
    }

    MatrixXd x = x0;
    for (int i = 0; i < n; ++i) x.row(i).array() += cfg.p_wd * (2.0 * t[i] - 1.0);

    SimTruth truth;
    truth.alpha = cfg.alpha;
    truth.lambda = cfg.lambda;
    truth.eps_treat = eps_treat;
    truth.s.resize(n);
    for (int i = 0; i < n; ++i) truth.s[i] = s_of_x(x.row(i), cfg.scheme);

    VectorXd y_fact(n);
    VectorXd all_events(2 * n);
    for (int i = 0; i < n; ++i) {
        double u = std::max(unif(rng_event), 1e-300);
        y_fact[i] = sample_event_time(truth.s[i], t[i], cfg.lambda, cfg.alpha, eps_treat, u);
        double y_cf = sample_event_time(truth.s[i], 1 - t[i], cfg.lambda, cfg.alpha, eps_treat, u);
        all_events[2 * i] = y_fact[i];
        all_events[2 * i + 1] = y_cf;
    }
    truth.tau_min = quantile(all_events, cfg.tau_quantile);

    VectorXd uc(n);
    for (int i = 0; i < n; ++i) uc[i] = std::max(unif(rng_cens), 1e-300);
    truth.lambda_c = calibrate_censoring(y_fact, uc, cfg.censor_target);

    VectorXd y(n);
    VectorXi delta(n);
    int censored = 0;
    for (int i = 0; i < n; ++i) {
        double c = -std::log(uc[i]) / truth.lambda_c;
        if (c < y_fact[i]) {
            y[i] = c;
            delta[i] = 0;
            ++censored;
        } else {
            y[i] = y_fact[i];
            delta[i] = 1;
        }
    }
    truth.censored_frac = static_cast<double>(censored) / n;
    truth.treated_frac = t.cast<double>().mean();

    return {validate_dataset(x, t, y, delta), truth};
}

}  // namespace

std::pair<Dataset, SimTruth> make_synthetic(const SimConfig& cfg) {
    check_config(cfg, cfg.p);
    std::mt19937_64 rng_feat(mix_seed(cfg.seed, {1}));
    MatrixXd x0 = gen_features(cfg.n, cfg.p, cfg.rho, rng_feat);
    return build(x0, cfg);
}

std::pair<Dataset, SimTruth> make_semisynthetic(const MatrixXd& x_raw, const SimConfig& cfg) {
    if (cfg.p != static_cast<int>(x_raw.cols())) {
        throw ValidationError("make_semisynthetic: config p does not match covariate columns");
    }
    SimConfig local = cfg;
    local.n = static_cast<int>(x_raw.rows());
    check_config(local, static_cast<int>(x_raw.cols()));
    if (!x_raw.allFinite())
        throw ValidationError("make_semisynthetic: non-finite covariate value");
    return build(x_raw, local);
}

MatrixXd read_covariates_csv(const std::string& path) {
    CsvTable tab = read_csv(path);
    if (tab.header.empty() || tab.rows.empty()) {
        throw ValidationError(path + ": empty covariate file");
    }
    MatrixXd x(tab.rows.size(), tab.header.size());
    for (size_t i = 0; i < tab.rows.size(); ++i) {
        for (size_t j = 0; j < tab.header.size(); ++j) {
            x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                parse_double(tab.rows[i][j]);
        }
    }
    return x;
}

double initial_wasserstein(const Dataset& ds, const SinkhornOptions& opt) {
    std::vector<int> arm0, arm1;
    for (int i = 0; i < ds.n(); ++i) (ds.t[i] ? arm1 : arm0).push_back(i);
    auto cloud = [&](const std::vector<int>& idx) {
        WeightedCloud c;
        c.pts.resize(static_cast<int>(idx.size()), ds.d());
        for (size_t r = 0; r < idx.size(); ++r) c.pts.row(static_cast<int>(r)) = ds.x.row(idx[r]);
        c.mass = VectorXd::Constant(static_cast<int>(idx.size()), 1.0 / idx.size());
        return c;
    };
    return sinkhorn_divergence(cloud(arm0), cloud(arm1), opt);
}

void write_truth_params_csv(const SimTruth& truth, const std::string& path) {
    std::vector<std::vector<std::string>> rows;
    rows.push_back({"-1", "alpha", fmt_double(truth.alpha)});
    rows.push_back({"-1", "lambda", fmt_double(truth.lambda)});
    rows.push_back({"-1", "eps_treat", fmt_double(truth.eps_treat)});
    rows.push_back({"-1", "tau_min", fmt_double(truth.tau_min)});
    rows.push_back({"-1", "lambda_c", fmt_double(truth.lambda_c)});
    rows.push_back({"-1", "censored_frac", fmt_double(truth.censored_frac)});
    rows.push_back({"-1", "treated_frac", fmt_double(truth.treated_frac)});
    for (int i = 0; i < truth.s.size(); ++i)
        rows.push_back({fmt_int(i), "s", fmt_double(truth.s[i])});
    write_csv(path, {"i", "key", "value"}, rows);
}

SimTruth read_truth_params_csv(const std::string& path) {
    CsvTable table = read_csv(path);
    if (table.header != std::vector<std::string>{"i", "key", "value"})
        throw ValidationError(path + ": expected header i,key,value");
    SimTruth truth;
    std::vector<double> s;
    for (const auto& row : table.rows) {
        long long i = parse_int(row[0]);
        double v = parse_double(row[2]);
        if (i >= 0) {
            if (row[1] != "s" || i != static_cast<long long>(s.size()))
                throw ValidationError(path + ": per-row s values must appear in order");
            s.push_back(v);
        } else if (row[1] == "alpha") {
            truth.alpha = v;
        } else if (row[1] == "lambda") {
            truth.lambda = v;
        } else if (row[1] == "eps_treat") {
            truth.eps_treat = v;
        } else if (row[1] == "tau_min") {
            truth.tau_min = v;
        } else if (row[1] == "lambda_c") {
            truth.lambda_c = v;
        } else if (row[1] == "censored_frac") {
            truth.censored_frac = v;
        } else if (row[1] == "treated_frac") {
            truth.treated_frac = v;
        } else {
            throw ValidationError(path + ": unknown key " + row[1]);
        }
    }
    truth.s = Eigen::Map<VectorXd>(s.data(), static_cast<int>(s.size()));
    if (truth.s.size() == 0) throw ValidationError(path + ": no per-row s values");
    return truth;
}

}  // namespace survbal
