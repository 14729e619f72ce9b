#include "survbal/objective.hpp"

#include "survbal/sinkhorn.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace survbal {

namespace {

double sigmoid_stable(double v) {
    if (v >= 0.0) {
        return 1.0 / (1.0 + std::exp(-v));
    }
    const double e = std::exp(v);
    return e / (1.0 + e);
}

double softplus_stable(double v) { return std::max(v, 0.0) + std::log1p(std::exp(-std::abs(v))); }

// log(exp(0) + sum_j exp(v_j)) with the implicit reference entry.
double lse_with_zero(const Eigen::Ref<const VectorXd>& v) {
    double mx = 0.0;
    for (Eigen::Index j = 0; j < v.size(); ++j) mx = std::max(mx, v(j));
    double s = std::exp(-mx);
    for (Eigen::Index j = 0; j < v.size(); ++j) s += std::exp(v(j) - mx);
    return mx + std::log(s);
}

}  // namespace

VectorXd fit_logistic(const MatrixXd& x, const VectorXi& t, int iters, double lr) {
    const int n = static_cast<int>(x.rows());
    const int d = static_cast<int>(x.cols());
    if (n == 0) throw ValidationError("cannot fit assignment model on empty data");
    MatrixXd xi(n, d + 1);
    xi.leftCols(d) = x;
    xi.col(d).setOnes();
    VectorXd coef = VectorXd::Zero(d + 1);
    VectorXd tf = t.cast<double>();
    for (int it = 0; it < iters; ++it) {
        VectorXd z = xi * coef;
        VectorXd prob(n);
        for (int i = 0; i < n; ++i) prob(i) = sigmoid_stable(z(i));
        VectorXd grad = xi.transpose() * (prob - tf) / n;
        coef -= lr * grad;
    }
    return coef;
}

double raw_weight(double e_x, int t, double alpha1) {
    const double p = t == 1 ? e_x : 1.0 - e_x;
    const double a = t == 1 ? alpha1 : 1.0 - alpha1;
    return a / p;
}

WeightInfo compute_weights(const Dataset& train, WeightMode mode) {
    WeightInfo info;
    info.mode = mode;
    const int n = train.n();
    info.alpha1 = train.t.cast<double>().mean();
    if (mode == WeightMode::Uniform || mode == WeightMode::Learned) {
        info.w = VectorXd::Ones(n);
        return info;
    }
    Normalizer nz = fit_normalizer(train.x);
    MatrixXd xn = apply_normalizer(nz, train.x);
    VectorXd coef = fit_logistic(xn, train.t);
    info.propensity.resize(n);
    info.w.resize(n);
    for (int i = 0; i < n; ++i) {
        double z = xn.row(i).dot(coef.head(train.d())) + coef(train.d());
        double e = std::clamp(sigmoid_stable(z), 0.01, 0.99);
        info.propensity(i) = e;
        info.w(i) = raw_weight(e, train.t(i), info.alpha1);
    }
    // mean 1 within each arm
    double sum[2] = {0.0, 0.0};
    int cnt[2] = {0, 0};
    for (int i = 0; i < n; ++i) {
        sum[train.t(i)] += info.w(i);
        ++cnt[train.t(i)];
    }
    for (int i = 0; i < n; ++i) {
        const int a = train.t(i);
        info.w(i) *= cnt[a] / sum[a];
    }
    return info;
}

double survival_nll_row(const Eigen::Ref<const VectorXd>& logits, int k, int delta,
                        CensorBeyond mode, VectorXd* dlogits, bool* skipped) {
    const int m = static_cast<int>(logits.size());
    // k = 0 is legal for censored rows only: the tail is everything, loss 0
    if (k < (delta == 0 ? 0 : 1) || k > m + 1) {
        throw ValidationError("interval index out of range in likelihood");
    }
    if (skipped) *skipped = false;
    if (delta == 0 && k == m + 1 && mode == CensorBeyond::Zero) {
        if (skipped) *skipped = true;
        if (dlogits) dlogits->setZero(m);
        return 0.0;
    }
    const double lse_all = lse_with_zero(logits);
    VectorXd soft;
    if (dlogits) {
        soft = (logits.array() - lse_all).exp().matrix();
        dlogits->resize(m);
    }
    if (delta == 1 || k == m + 1) {
        // event mass in bin k; a beyond-horizon row uses the reference bin
        const double psi_k = k <= m ? logits(k - 1) : 0.0;
        if (dlogits) {
            *dlogits = soft;
            if (k <= m) (*dlogits)(k - 1) -= 1.0;
        }
        return lse_all - psi_k;
    }
    // censored in bin k <= m: tail mass over bins k+1..m+1
    const double lse_tail = lse_with_zero(logits.tail(m - k));
    if (dlogits) {
        *dlogits = soft;
        for (int j = k; j < m; ++j) (*dlogits)(j) -= std::exp(logits(j) - lse_tail);
    }
    return lse_all - lse_tail;
}

double head_norm(const ModelParams& p) {
    double s = 0.0;
    for (const auto& w : p.w_psi) s += w.squaredNorm();
    for (const auto& b : p.b_psi) s += b.squaredNorm();
    return std::sqrt(s);
}

NetGrads NetGrads::zeros_like(const ModelParams& p, int n_theta) {
    NetGrads g;
    for (const auto& w : p.w_phi) g.w_phi.push_back(MatrixXd::Zero(w.rows(), w.cols()));
    for (const auto& b : p.b_phi) g.b_phi.push_back(VectorXd::Zero(b.size()));
    for (const auto& w : p.w_psi) g.w_psi.push_back(MatrixXd::Zero(w.rows(), w.cols()));
    for (const auto& b : p.b_psi) g.b_psi.push_back(VectorXd::Zero(b.size()));
    g.theta = VectorXd::Zero(n_theta);
    return g;
}

double NetGrads::squared_norm() const {
    double s = 0.0;
    for (const auto& w : w_phi) s += w.squaredNorm();
    for (const auto& b : b_phi) s += b.squaredNorm();
    for (const auto& w : w_psi) s += w.squaredNorm();
    for (const auto& b : b_psi) s += b.squaredNorm();
    s += theta.squaredNorm();
    return s;
}

void NetGrads::scale(double c) {
    for (auto& w : w_phi) w *= c;
    for (auto& b : b_phi) b *= c;
    for (auto& w : w_psi) w *= c;
    for (auto& b : b_psi) b *= c;
    theta *= c;
}

ObjectiveBreakdown eval_objective(const ModelParams& p, const ObjectiveInput& in,
                                  const HyperParams& hp, const ObjectiveTerms& terms,
                                  NetGrads* grads) {
    const int n = static_cast<int>(in.x.rows());
    if (n == 0) throw ValidationError("objective on empty batch");
    const int m = p.m();
    const int zdim = p.z();
    const size_t n_phi = p.w_phi.size();
    const size_t n_psi = p.w_psi.size();

    ObjectiveBreakdown out;
    if (grads) *grads = NetGrads::zeros_like(p, in.mode == WeightMode::Learned ? n : 0);

    // forward: embedding with per-layer caches (every layer ReLU)
    MatrixXd xn = apply_normalizer(p.norm, in.x);
    std::vector<MatrixXd> phi_post(n_phi);
    {
        const MatrixXd* cur = &xn;
        for (size_t l = 0; l < n_phi; ++l) {
            phi_post[l] = ((*cur) * p.w_phi[l].transpose()).rowwise() + p.b_phi[l].transpose();
            phi_post[l] = phi_post[l].cwiseMax(0.0);
            cur = &phi_post[l];
        }
    }
    const MatrixXd& emb = phi_post.back();
    if (!emb.allFinite()) throw DivergenceError("non-finite embedding in objective");

    // head on [emb, t]; hidden layers ReLU, output linear
    MatrixXd hin(n, zdim + 1);
    hin.leftCols(zdim) = emb;
    hin.col(zdim) = in.t.cast<double>();
    std::vector<MatrixXd> psi_post(n_psi - 1);
    MatrixXd logits;
    {
        const MatrixXd* cur = &hin;
        for (size_t l = 0; l + 1 < n_psi; ++l) {
            psi_post[l] = ((*cur) * p.w_psi[l].transpose()).rowwise() + p.b_psi[l].transpose();
            psi_post[l] = psi_post[l].cwiseMax(0.0);
            cur = &psi_post[l];
        }
        logits = ((*cur) * p.w_psi.back().transpose()).rowwise() + p.b_psi.back().transpose();
    }
    if (!logits.allFinite()) throw DivergenceError("non-finite head output in objective");

    // per-row weights
    VectorXd w(n), wt(n), r, dsig;
    double arm_sum[2] = {0.0, 0.0};
    int arm_cnt[2] = {0, 0};
    for (int i = 0; i < n; ++i) ++arm_cnt[in.t(i)];
    if (in.mode == WeightMode::Learned) {
        if (in.theta.size() != n) throw ValidationError("weight parameter count does not match batch");
        r.resize(n);
        dsig.resize(n);
        for (int i = 0; i < n; ++i) {
            r(i) = softplus_stable(in.theta(i));
            dsig(i) = sigmoid_stable(in.theta(i));
            arm_sum[in.t(i)] += r(i);
        }
        for (int i = 0; i < n; ++i) w(i) = r(i) * arm_cnt[in.t(i)] / arm_sum[in.t(i)];
    } else if (in.mode == WeightMode::Propensity) {
        if (in.fixed_w.size() != n) throw ValidationError("weight vector does not match batch");
        w = in.fixed_w;
        for (int i = 0; i < n; ++i) arm_sum[in.t(i)] += w(i);
    } else {
        w.setOnes();
        arm_sum[0] = arm_cnt[0];
        arm_sum[1] = arm_cnt[1];
    }
    for (int i = 0; i < n; ++i) {
        const double a = in.t(i) == 1 ? in.alpha1 : 1.0 - in.alpha1;
        wt(i) = a + (1.0 - a) * w(i);
    }

    // likelihood term
    VectorXd row_loss = VectorXd::Zero(n);
    MatrixXd dlogits;
    if (grads) dlogits = MatrixXd::Zero(n, m);
    if (terms.nll) {
        VectorXd drow(m);
        for (int i = 0; i < n; ++i) {
            bool skip = false;
            row_loss(i) = survival_nll_row(logits.row(i).transpose(), in.k[static_cast<size_t>(i)],
                                           in.delta(i), hp.censor_beyond, grads ? &drow : nullptr, &skip);
            if (skip) ++out.rows_skipped;
            if (grads) dlogits.row(i) = (wt(i) / n) * drow.transpose();
        }
        out.nll = wt.dot(row_loss) / n;
        out.total += out.nll;
    }

    // balance term on the embedded arm clouds, masses proportional to w
    MatrixXd demb_bal;
    VectorXd dmass[2];
    std::vector<int> arm_rows[2];
    if (terms.balance && hp.gamma_wd != 0.0) {
        for (int i = 0; i < n; ++i) arm_rows[in.t(i)].push_back(i);
        if (arm_rows[0].empty() || arm_rows[1].empty()) {
            out.balance_skipped = true;
        } else {
            // normalize by the per-arm w totals; in learned mode this equals
            // r_i / sum(r) on the arm, matching the mass gradient chain below
            double wsum[2] = {0.0, 0.0};
            for (int i = 0; i < n; ++i) wsum[in.t(i)] += w(i);
            WeightedCloud cloud[2];
            for (int a = 0; a < 2; ++a) {
                const auto& rows = arm_rows[a];
                cloud[a].pts.resize(rows.size(), zdim);
                cloud[a].mass.resize(rows.size());
                for (size_t j = 0; j < rows.size(); ++j) {
                    cloud[a].pts.row(static_cast<Eigen::Index>(j)) = emb.row(rows[j]);
                    cloud[a].mass(static_cast<Eigen::Index>(j)) = w(rows[j]) / wsum[a];
                }
            }
            SinkhornOptions opt;
            opt.epsilon = hp.sinkhorn_eps;
            opt.max_iter = hp.sinkhorn_max_iter;
            opt.tol = hp.sinkhorn_tol;
            const bool want_mass = grads && in.mode == WeightMode::Learned;
            if (grads) {
                DivergenceGrad dg = sinkhorn_divergence_grad(cloud[1], cloud[0], opt, want_mass);
                out.balance = dg.value;
                out.epsilon_used = dg.epsilon;
                demb_bal = MatrixXd::Zero(n, zdim);
                const double c = hp.gamma_wd / n;
                for (size_t j = 0; j < arm_rows[1].size(); ++j)
                    demb_bal.row(arm_rows[1][j]) = c * dg.d_pts_a.row(static_cast<Eigen::Index>(j));
                for (size_t j = 0; j < arm_rows[0].size(); ++j)
                    demb_bal.row(arm_rows[0][j]) = c * dg.d_pts_b.row(static_cast<Eigen::Index>(j));
                if (want_mass) {
                    dmass[1] = c * dg.d_mass_a;
                    dmass[0] = c * dg.d_mass_b;
                }
            } else {
                SinkhornOptions o2 = opt;
                out.balance = sinkhorn_divergence(cloud[1], cloud[0], o2);
                out.epsilon_used = o2.epsilon > 0.0 ? o2.epsilon : 0.0;
            }
            out.total += hp.gamma_wd / n * out.balance;
        }
    }

    // head-norm penalty
    if (terms.ridge_head && hp.lambda_r != 0.0) {
        out.ridge_head = head_norm(p);
        out.total += hp.lambda_r / std::sqrt(static_cast<double>(n)) * out.ridge_head;
        if (grads && out.ridge_head > 0.0) {
            const double c = hp.lambda_r / std::sqrt(static_cast<double>(n)) / out.ridge_head;
            for (size_t l = 0; l < n_psi; ++l) {
                grads->w_psi[l] += c * p.w_psi[l];
                grads->b_psi[l] += c * p.b_psi[l];
            }
        }
    }

    // weight-norm penalty (learned weights only; fixed weights are not parameters)
    if (terms.ridge_weights && hp.lambda_w != 0.0 && in.mode == WeightMode::Learned) {
        out.ridge_weights = w.norm();
        out.total += hp.lambda_w / n * out.ridge_weights;
    }

    if (!grads) return out;

    // backward: head
    MatrixXd dcur = dlogits;
    MatrixXd dhin;
    for (size_t l = n_psi; l-- > 0;) {
        const MatrixXd& input = l == 0 ? hin : psi_post[l - 1];
        grads->w_psi[l] += dcur.transpose() * input;
        grads->b_psi[l] += dcur.colwise().sum().transpose();
        MatrixXd dinput = dcur * p.w_psi[l];
        if (l == 0) {
            dhin = std::move(dinput);
        } else {
            dcur = dinput.cwiseProduct((psi_post[l - 1].array() > 0.0).cast<double>().matrix());
        }
    }
    MatrixXd demb = dhin.leftCols(zdim);
    if (demb_bal.size() > 0) demb += demb_bal;

    // backward: embedding (ReLU at every layer output)
    dcur = std::move(demb);
    for (size_t l = n_phi; l-- > 0;) {
        dcur = dcur.cwiseProduct((phi_post[l].array() > 0.0).cast<double>().matrix());
        const MatrixXd& input = l == 0 ? xn : phi_post[l - 1];
        grads->w_phi[l] += dcur.transpose() * input;
        grads->b_phi[l] += dcur.colwise().sum().transpose();
        if (l > 0) dcur = dcur * p.w_phi[l];
    }

    // backward: learned weight parameters
    if (in.mode == WeightMode::Learned) {
        VectorXd gw = VectorXd::Zero(n);  // d total / d w_i
        if (terms.nll) {
            for (int i = 0; i < n; ++i) {
                const double a = in.t(i) == 1 ? in.alpha1 : 1.0 - in.alpha1;
                gw(i) += (1.0 - a) * row_loss(i) / n;
            }
        }
        if (terms.ridge_weights && hp.lambda_w != 0.0 && out.ridge_weights > 0.0) {
            gw += (hp.lambda_w / n / out.ridge_weights) * w;
        }
        // w_i = r_i * cnt_a / S_a within arm a
        double acc[2] = {0.0, 0.0};
        for (int i = 0; i < n; ++i) acc[in.t(i)] += gw(i) * r(i);
        VectorXd dr(n);
        for (int i = 0; i < n; ++i) {
            const int a = in.t(i);
            dr(i) = (gw(i) - acc[a] / arm_sum[a]) * arm_cnt[a] / arm_sum[a];
        }
        // mass path: a_i = r_i / S_a
        if (dmass[0].size() > 0 || dmass[1].size() > 0) {
            double macc[2] = {0.0, 0.0};
            for (int a = 0; a < 2; ++a)
                for (size_t j = 0; j < arm_rows[a].size(); ++j)
                    macc[a] += dmass[a](static_cast<Eigen::Index>(j)) * r(arm_rows[a][j]);
            for (int a = 0; a < 2; ++a)
                for (size_t j = 0; j < arm_rows[a].size(); ++j) {
                    const int i = arm_rows[a][j];
                    dr(i) += (dmass[a](static_cast<Eigen::Index>(j)) - macc[a] / arm_sum[a]) / arm_sum[a];
                }
        }
        grads->theta = dr.cwiseProduct(dsig);
    }
    return out;
}

}  // namespace survbal
