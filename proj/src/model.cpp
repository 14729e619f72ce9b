#include "survbal/model.hpp"

#include "survbal/discretize.hpp"
#include "survbal/numio.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

namespace survbal {

namespace {

void xavier_fill(MatrixXd& w, std::mt19937_64& rng) {
    double sd = std::sqrt(2.0 / (w.cols() + w.rows()));
    std::normal_distribution<double> gauss(0.0, sd);
    for (int i = 0; i < w.rows(); ++i)
        for (int j = 0; j < w.cols(); ++j) w(i, j) = gauss(rng);
}

}  // namespace

ModelParams init_params(int d, const TimeGrid& grid, const Normalizer& norm, const HyperParams& hp,
                        std::uint64_t seed) {
    if (hp.phi_layers < 1) throw ValidationError("model: need at least one representation layer");
    if (hp.psi_layers < 0) throw ValidationError("model: negative head depth");
    if (hp.hidden < 1) throw ValidationError("model: hidden width must be positive");
    ModelParams p;
    p.grid = grid;
    p.norm = norm;
    p.interp = hp.interp;
    std::mt19937_64 rng(seed);

    int in = d;
    for (int l = 0; l < hp.phi_layers; ++l) {
        int out = (l + 1 == hp.phi_layers) ? hp.z() : hp.hidden;
        p.w_phi.emplace_back(out, in);
        p.b_phi.emplace_back(VectorXd::Zero(out));
        xavier_fill(p.w_phi.back(), rng);
        in = out;
    }
    in = hp.z() + 1;  // treatment appended
    for (int l = 0; l < hp.psi_layers; ++l) {
        p.w_psi.emplace_back(hp.hidden, in);
        p.b_psi.emplace_back(VectorXd::Zero(hp.hidden));
        xavier_fill(p.w_psi.back(), rng);
        in = hp.hidden;
    }
    p.w_psi.emplace_back(grid.m(), in);
    p.b_psi.emplace_back(VectorXd::Zero(grid.m()));
    xavier_fill(p.w_psi.back(), rng);
    return p;
}

MatrixXd embed(const ModelParams& p, const MatrixXd& x) {
    if (x.cols() != p.d()) throw ValidationError("embed: feature dimension mismatch");
    MatrixXd a = apply_normalizer(p.norm, x);
    for (size_t l = 0; l < p.w_phi.size(); ++l) {
        a = ((a * p.w_phi[l].transpose()).rowwise() + p.b_phi[l].transpose()).cwiseMax(0.0);
    }
    if (!a.allFinite()) throw DivergenceError("embed: non-finite activation");
    return a;
}

MatrixXd head_logits(const ModelParams& p, const MatrixXd& emb, const VectorXd& t) {
    MatrixXd a(emb.rows(), emb.cols() + 1);
    a.leftCols(emb.cols()) = emb;
    a.col(emb.cols()) = t;
    for (size_t l = 0; l < p.w_psi.size(); ++l) {
        a = (a * p.w_psi[l].transpose()).rowwise() + p.b_psi[l].transpose();
        if (l + 1 < p.w_psi.size()) a = a.cwiseMax(0.0);
    }
    if (!a.allFinite()) throw DivergenceError("head: non-finite logit");
    return a;
}

MatrixXd pmf_from_logits(const MatrixXd& logits) {
    const int n = static_cast<int>(logits.rows());
    const int m = static_cast<int>(logits.cols());
    MatrixXd probs(n, m + 1);
    for (int i = 0; i < n; ++i) {
        double mx = std::max(0.0, logits.row(i).maxCoeff());
        double denom = std::exp(-mx);  // reference bin
        for (int j = 0; j < m; ++j) denom += std::exp(logits(i, j) - mx);
        for (int j = 0; j < m; ++j) probs(i, j) = std::exp(logits(i, j) - mx) / denom;
        probs(i, m) = std::exp(-mx) / denom;
    }
    return probs;
}

MatrixXd predict_pmf(const ModelParams& p, const MatrixXd& x, int t) {
    if (t != 0 && t != 1) throw ValidationError("predict_pmf: treatment must be 0 or 1");
    VectorXd tv = VectorXd::Constant(x.rows(), t);
    return pmf_from_logits(head_logits(p, embed(p, x), tv));
}

double survival_after(const Eigen::Ref<const VectorXd>& pmf_row, int k) {
    const int m = static_cast<int>(pmf_row.size()) - 1;
    if (k < 0 || k > m + 1) throw ValidationError("survival_after: bin index out of range");
    if (k == 0) return 1.0;
    double s = 0.0;
    for (int j = k; j <= m; ++j) s += pmf_row[j];  // pmf_row[j] is bin j+1
    return s;
}

double survival_at(const TimeGrid& grid, const VectorXd& bin_survival, double y, Interp interp) {
    if (!(y >= 0.0)) throw ValidationError("survival_at: time must be nonnegative");
    const int m = grid.m();
    if (bin_survival.size() != m + 1)
        throw ValidationError("survival_at: need survival values at bins 0..m");
    if (y == 0.0) return bin_survival[0];  // knot 0 in both modes, not bin 1's value
    if (y >= grid.cuts[m]) return bin_survival[m];  // flat beyond the horizon
    int k = interval_index(grid, y);
    if (interp == Interp::Step) return bin_survival[k];
    double t0 = grid.cuts[k - 1], t1 = grid.cuts[k];
    double s0 = bin_survival[k - 1], s1 = bin_survival[k];
    return s0 + (s1 - s0) * (y - t0) / (t1 - t0);
}

namespace {

VectorXd bin_survival_from_pmf(const Eigen::Ref<const VectorXd>& pmf_row) {
    // Tail sums from the right keep every value a sum of positives, so the
    // sequence is nonincreasing up to rounding; the clamp makes it exact.
    const int m = static_cast<int>(pmf_row.size()) - 1;
    VectorXd s(m + 1);
    s[0] = 1.0;
    double tail = pmf_row[m];
    for (int k = m; k >= 1; --k) {
        s[k] = tail;
        if (k > 1) tail += pmf_row[k - 1];
    }
    for (int k = 1; k <= m; ++k) s[k] = std::min(s[k], s[k - 1]);
    return s;
}

}  // namespace

double predict_survival_at(const ModelParams& p, const Eigen::Ref<const Eigen::RowVectorXd>& x,
                           int t, double y) {
    MatrixXd pmf = predict_pmf(p, x, t);
    return survival_at(p.grid, bin_survival_from_pmf(pmf.row(0)), y, p.interp);
}

double predict_cate(const ModelParams& p, const Eigen::Ref<const Eigen::RowVectorXd>& x, double y) {
    return predict_survival_at(p, x, 1, y) - predict_survival_at(p, x, 0, y);
}

MatrixXd predict_survival_matrix(const ModelParams& p, const MatrixXd& x, int t,
                                 const std::vector<double>& times) {
    MatrixXd pmf = predict_pmf(p, x, t);
    MatrixXd out(x.rows(), static_cast<int>(times.size()));
    for (int i = 0; i < x.rows(); ++i) {
        VectorXd s = bin_survival_from_pmf(pmf.row(i));
        for (size_t j = 0; j < times.size(); ++j)
            out(i, static_cast<int>(j)) = survival_at(p.grid, s, times[j], p.interp);
    }
    return out;
}

namespace {

void put_matrix(std::ostream& out, const char* tag, const MatrixXd& w) {
    out << tag << ' ' << w.rows() << ' ' << w.cols() << '\n';
    for (int i = 0; i < w.rows(); ++i) {
        for (int j = 0; j < w.cols(); ++j) {
            if (j) out << ' ';
            out << fmt_double(w(i, j));
        }
        out << '\n';
    }
}

void put_vector(std::ostream& out, const char* tag, const VectorXd& v) {
    out << tag << ' ' << v.size() << '\n';
    for (int i = 0; i < v.size(); ++i) {
        if (i) out << ' ';
        out << fmt_double(v[i]);
    }
    out << '\n';
}

MatrixXd get_matrix(std::istream& in, const std::string& tag) {
    std::string got;
    long long r = 0, c = 0;
    if (!(in >> got >> r >> c) || got != tag)
        throw ValidationError("checkpoint: expected matrix " + tag);
    MatrixXd w(r, c);
    std::string tok;
    for (long long i = 0; i < r; ++i)
        for (long long j = 0; j < c; ++j) {
            if (!(in >> tok)) throw ValidationError("checkpoint: truncated matrix " + tag);
            w(i, j) = parse_double(tok);
        }
    return w;
}

VectorXd get_vector(std::istream& in, const std::string& tag) {
    std::string got;
    long long nv = 0;
    if (!(in >> got >> nv) || got != tag)
        throw ValidationError("checkpoint: expected vector " + tag);
    VectorXd v(nv);
    std::string tok;
    for (long long i = 0; i < nv; ++i) {
        if (!(in >> tok)) throw ValidationError("checkpoint: truncated vector " + tag);
        v[i] = parse_double(tok);
    }
    return v;
}

}  // namespace

void save_checkpoint(const ModelParams& p, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write checkpoint: " + path);
    out << "survbal-checkpoint 1\n";
    out << "interp " << (p.interp == Interp::Linear ? "linear" : "step") << '\n';
    VectorXd cuts = Eigen::Map<const VectorXd>(p.grid.cuts.data(), static_cast<int>(p.grid.cuts.size()));
    put_vector(out, "grid", cuts);
    put_vector(out, "norm_mu", p.norm.mu);
    put_vector(out, "norm_sigma", p.norm.sigma);
    out << "phi " << p.w_phi.size() << '\n';
    for (size_t l = 0; l < p.w_phi.size(); ++l) {
        put_matrix(out, "w", p.w_phi[l]);
        put_vector(out, "b", p.b_phi[l]);
    }
    out << "psi " << p.w_psi.size() << '\n';
    for (size_t l = 0; l < p.w_psi.size(); ++l) {
        put_matrix(out, "w", p.w_psi[l]);
        put_vector(out, "b", p.b_psi[l]);
    }
}

ModelParams load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open checkpoint: " + path);
    std::string magic;
    int version = 0;
    if (!(in >> magic >> version) || magic != "survbal-checkpoint" || version != 1)
        throw ValidationError("checkpoint: unrecognized format in " + path);
    ModelParams p;
    std::string tag, mode;
    if (!(in >> tag >> mode) || tag != "interp" || (mode != "linear" && mode != "step"))
        throw ValidationError("checkpoint: bad interp line");
    p.interp = mode == "linear" ? Interp::Linear : Interp::Step;
    VectorXd cuts = get_vector(in, "grid");
    p.grid = validate_grid(std::vector<double>(cuts.data(), cuts.data() + cuts.size()));
    p.norm.mu = get_vector(in, "norm_mu");
    p.norm.sigma = get_vector(in, "norm_sigma");
    long long layers = 0;
    if (!(in >> tag >> layers) || tag != "phi") throw ValidationError("checkpoint: bad phi header");
    for (long long l = 0; l < layers; ++l) {
        p.w_phi.push_back(get_matrix(in, "w"));
        p.b_phi.push_back(get_vector(in, "b"));
    }
    if (!(in >> tag >> layers) || tag != "psi") throw ValidationError("checkpoint: bad psi header");
    for (long long l = 0; l < layers; ++l) {
        p.w_psi.push_back(get_matrix(in, "w"));
        p.b_psi.push_back(get_vector(in, "b"));
    }
    if (p.w_phi.empty() || p.w_psi.empty()) throw ValidationError("checkpoint: missing layers");
    if (p.w_psi.back().rows() != p.grid.m())
        throw ValidationError("checkpoint: head output does not match the grid");
    return p;
}

}  // namespace survbal
