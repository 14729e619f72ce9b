#include "survbal/sinkhorn.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace survbal {

MatrixXd cost_matrix(const MatrixXd& a, const MatrixXd& b) {
    if (a.cols() != b.cols()) throw ValidationError("cost_matrix: dimension mismatch");
    VectorXd na = a.rowwise().squaredNorm();
    VectorXd nb = b.rowwise().squaredNorm();
    MatrixXd c = (-2.0 * a * b.transpose());
    c.colwise() += na;
    c.rowwise() += nb.transpose();
    return c.cwiseMax(0.0);
}

double auto_epsilon(const MatrixXd& cost) {
    std::vector<double> entries;
    entries.reserve(static_cast<size_t>(cost.size()));
    const bool square = cost.rows() == cost.cols();
    for (int i = 0; i < cost.rows(); ++i)
        for (int j = 0; j < cost.cols(); ++j)
            if (!square || i != j) entries.push_back(cost(i, j));
    if (entries.empty()) return 1e-8;
    size_t mid = entries.size() / 2;
    std::nth_element(entries.begin(), entries.begin() + mid, entries.end());
    double med = entries[mid];
    if (entries.size() % 2 == 0) {
        double lo = *std::max_element(entries.begin(), entries.begin() + mid);
        med = 0.5 * (med + lo);
    }
    double eps = 0.05 * med;
    return eps > 1e-8 ? eps : 1e-8;
}

namespace {

void check_cloud(const WeightedCloud& c, const char* name) {
    if (c.pts.rows() == 0) throw ValidationError(std::string("sinkhorn: empty cloud ") + name);
    if (c.mass.size() != c.pts.rows())
        throw ValidationError(std::string("sinkhorn: mass/point count mismatch in cloud ") + name);
    if ((c.mass.array() <= 0).any())
        throw ValidationError(std::string("sinkhorn: nonpositive mass in cloud ") + name);
    if (std::abs(c.mass.sum() - 1.0) > 1e-6)
        throw ValidationError(std::string("sinkhorn: masses must sum to 1 in cloud ") + name);
}

struct Solved {
    VectorXd f, g;
    MatrixXd plan;
    double primal, dual, marginal_err;
    int iters;
};

Solved solve_on_cost(const MatrixXd& C, const VectorXd& a, const VectorXd& b, double eps,
                     int max_iter, double tol) {
    const int na = static_cast<int>(a.size());
    const int nb = static_cast<int>(b.size());
    const VectorXd la = a.array().log().matrix();
    const VectorXd lb = b.array().log().matrix();
    VectorXd f = VectorXd::Zero(na), g = VectorXd::Zero(nb);
    MatrixXd work(na, nb);
    Solved out;
    out.iters = 0;
    out.marginal_err = std::numeric_limits<double>::infinity();
    for (int it = 0; it < max_iter; ++it) {
        // f_i = -eps * LSE_j[(g_j - C_ij)/eps + log b_j]
        work = ((-C).rowwise() + (g + eps * lb).transpose()) / eps;
        VectorXd rmax = work.rowwise().maxCoeff();
        f = -eps * (rmax.array() +
                    ((work.colwise() - rmax).array().exp().rowwise().sum()).log())
                       .matrix();
        // g_j = -eps * LSE_i[(f_i - C_ij)/eps + log a_i]
        work = ((-C).colwise() + (f + eps * la)) / eps;
        VectorXd cmax = work.colwise().maxCoeff();
        g = -eps * (cmax.transpose().array() +
                    ((work.rowwise() - cmax.transpose()).array().exp().colwise().sum()).log())
                       .matrix()
                       .transpose();
        // Plan in log domain; column marginals are exact after the g update.
        work = (((-C).colwise() + (f + eps * la)).rowwise() + (g + eps * lb).transpose()) / eps;
        work = work.array().exp();
        out.iters = it + 1;
        out.marginal_err = (work.rowwise().sum() - a).cwiseAbs().sum();
        if (out.marginal_err < tol) break;
    }
    out.f = f;
    out.g = g;
    out.primal = (work.array() * C.array()).sum();
    out.dual = f.dot(a) + g.dot(b);
    out.plan = std::move(work);
    return out;
}

}  // namespace

SinkhornSolution sinkhorn_solve(const WeightedCloud& a, const WeightedCloud& b,
                                const SinkhornOptions& opt) {
    check_cloud(a, "a");
    check_cloud(b, "b");
    MatrixXd C = cost_matrix(a.pts, b.pts);
    double eps = opt.epsilon > 0 ? opt.epsilon : auto_epsilon(C);
    VectorXd am = a.mass / a.mass.sum();
    VectorXd bm = b.mass / b.mass.sum();
    Solved s = solve_on_cost(C, am, bm, eps, opt.max_iter, opt.tol);
    return SinkhornSolution{s.f, s.g, s.primal, s.dual, s.marginal_err, s.iters, eps};
}

double sinkhorn_cost(const WeightedCloud& a, const WeightedCloud& b, const SinkhornOptions& opt) {
    return sinkhorn_solve(a, b, opt).primal;
}

namespace {

bool same_cloud(const WeightedCloud& a, const WeightedCloud& b) {
    return a.pts.rows() == b.pts.rows() && a.pts.cols() == b.pts.cols() && a.pts == b.pts &&
           a.mass == b.mass;
}

}  // namespace

double sinkhorn_divergence(const WeightedCloud& a, const WeightedCloud& b,
                           const SinkhornOptions& opt) {
    check_cloud(a, "a");
    check_cloud(b, "b");
    if (same_cloud(a, b)) return 0.0;
    MatrixXd Cab = cost_matrix(a.pts, b.pts);
    double eps = opt.epsilon > 0 ? opt.epsilon : auto_epsilon(Cab);
    VectorXd am = a.mass / a.mass.sum();
    VectorXd bm = b.mass / b.mass.sum();
    double wab = solve_on_cost(Cab, am, bm, eps, opt.max_iter, opt.tol).dual;
    double waa = solve_on_cost(cost_matrix(a.pts, a.pts), am, am, eps, opt.max_iter, opt.tol).dual;
    double wbb = solve_on_cost(cost_matrix(b.pts, b.pts), bm, bm, eps, opt.max_iter, opt.tol).dual;
    return std::max(0.0, wab - 0.5 * (waa + wbb));
}

DivergenceGrad sinkhorn_divergence_grad(const WeightedCloud& a, const WeightedCloud& b,
                                        const SinkhornOptions& opt, bool want_mass_grad) {
    check_cloud(a, "a");
    check_cloud(b, "b");
    DivergenceGrad out;
    out.d_pts_a = MatrixXd::Zero(a.pts.rows(), a.pts.cols());
    out.d_pts_b = MatrixXd::Zero(b.pts.rows(), b.pts.cols());
    if (want_mass_grad) {
        out.d_mass_a = VectorXd::Zero(a.mass.size());
        out.d_mass_b = VectorXd::Zero(b.mass.size());
    }
    MatrixXd Cab = cost_matrix(a.pts, b.pts);
    double eps = opt.epsilon > 0 ? opt.epsilon : auto_epsilon(Cab);
    out.epsilon = eps;
    if (same_cloud(a, b)) return out;

    VectorXd am = a.mass / a.mass.sum();
    VectorXd bm = b.mass / b.mass.sum();
    Solved ab = solve_on_cost(Cab, am, bm, eps, opt.max_iter, opt.tol);
    Solved aa = solve_on_cost(cost_matrix(a.pts, a.pts), am, am, eps, opt.max_iter, opt.tol);
    Solved bb = solve_on_cost(cost_matrix(b.pts, b.pts), bm, bm, eps, opt.max_iter, opt.tol);
    out.value = std::max(0.0, ab.dual - 0.5 * (aa.dual + bb.dual));

    // Envelope: dW/dx through the cost matrix only, at the converged plan. The
    // self terms touch x_i via both the row and column of their cost matrix.
    VectorXd rab = ab.plan.rowwise().sum();
    VectorXd cab = ab.plan.colwise().sum();
    out.d_pts_a = 2.0 * (rab.asDiagonal() * a.pts - ab.plan * b.pts);
    out.d_pts_b = 2.0 * (cab.asDiagonal() * b.pts - ab.plan.transpose() * a.pts);
    {
        MatrixXd sym = aa.plan + aa.plan.transpose();
        VectorXd s = sym.rowwise().sum();
        out.d_pts_a -= s.asDiagonal() * a.pts - sym * a.pts;
    }
    {
        MatrixXd sym = bb.plan + bb.plan.transpose();
        VectorXd s = sym.rowwise().sum();
        out.d_pts_b -= s.asDiagonal() * b.pts - sym * b.pts;
    }
    if (want_mass_grad) {
        out.d_mass_a = ab.f - 0.5 * (aa.f + aa.g);
        out.d_mass_b = ab.g - 0.5 * (bb.f + bb.g);
    }
    return out;
}

}  // namespace survbal
