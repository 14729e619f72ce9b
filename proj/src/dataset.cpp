#include "survbal/dataset.hpp"

#include "survbal/numio.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <random>

namespace survbal {

Dataset validate_dataset(const MatrixXd& x, const VectorXi& t, const VectorXd& y, const VectorXi& delta) {
    const int n = static_cast<int>(y.size());
    if (n == 0) throw ValidationError("dataset is empty");
    if (x.rows() != n || t.size() != n || delta.size() != n)
        throw ValidationError("dataset columns disagree on row count");
    if (x.cols() == 0) throw ValidationError("dataset has no features");
    if (!x.allFinite()) throw ValidationError("non-finite feature value");
    int n1 = 0;
    for (int i = 0; i < n; ++i) {
        if (t[i] != 0 && t[i] != 1) throw ValidationError("non-binary treatment at row " + fmt_int(i));
        if (delta[i] != 0 && delta[i] != 1)
            throw ValidationError("non-binary event indicator at row " + fmt_int(i));
        if (!std::isfinite(y[i])) throw ValidationError("non-finite time at row " + fmt_int(i));
        if (y[i] < 0.0) throw ValidationError("negative time at row " + fmt_int(i));
        n1 += t[i];
    }
    if (n1 == 0) throw ValidationError("empty treated group");
    if (n1 == n) throw ValidationError("empty control group");
    return Dataset{x, t, y, delta};
}

namespace {

Dataset take_rows(const Dataset& ds, const std::vector<int>& idx) {
    Dataset out;
    out.x.resize(static_cast<int>(idx.size()), ds.d());
    out.t.resize(static_cast<int>(idx.size()));
    out.y.resize(static_cast<int>(idx.size()));
    out.delta.resize(static_cast<int>(idx.size()));
    for (size_t r = 0; r < idx.size(); ++r) {
        out.x.row(static_cast<int>(r)) = ds.x.row(idx[r]);
        out.t[static_cast<int>(r)] = ds.t[idx[r]];
        out.y[static_cast<int>(r)] = ds.y[idx[r]];
        out.delta[static_cast<int>(r)] = ds.delta[idx[r]];
    }
    return out;
}

// Integer allocation of n into 3 parts proportional to fractions (largest remainder).
std::array<int, 3> allocate(int n, const std::array<double, 3>& frac) {
    std::array<int, 3> out{};
    std::array<double, 3> rem{};
    int used = 0;
    for (int k = 0; k < 3; ++k) {
        double exact = frac[k] * n;
        out[k] = static_cast<int>(std::floor(exact));
        rem[k] = exact - out[k];
        used += out[k];
    }
    for (int left = n - used; left > 0; --left) {
        int best = 0;
        for (int k = 1; k < 3; ++k)
            if (rem[k] > rem[best]) best = k;
        ++out[best];
        rem[best] = -1.0;
    }
    return out;
}

}  // namespace

SplitResult split_dataset(const Dataset& ds, double f_train, double f_val, double f_test,
                          std::uint64_t seed) {
    if (f_train <= 0 || f_val <= 0 || f_test <= 0 || std::abs(f_train + f_val + f_test - 1.0) > 1e-9)
        throw ValidationError("split fractions must be positive and sum to 1");
    const std::array<double, 3> frac{f_train, f_val, f_test};

    std::vector<int> arm0, arm1;
    for (int i = 0; i < ds.n(); ++i) (ds.t[i] ? arm1 : arm0).push_back(i);

    auto alloc0 = allocate(static_cast<int>(arm0.size()), frac);
    auto alloc1 = allocate(static_cast<int>(arm1.size()), frac);
    std::array<std::array<int, 2>, 3> cnt;
    for (int k = 0; k < 3; ++k) cnt[k] = {alloc0[k], alloc1[k]};
    for (int k = 0; k < 3; ++k)
        if (cnt[k][0] == 0 || cnt[k][1] == 0)
            throw ValidationError("dataset too small to give every split both treatment arms");

    // Per-arm rounding can drift one row off the global allocation; shift rows
    // between splits without emptying an arm anywhere.
    auto want = allocate(ds.n(), frac);
    for (int guard = 0; guard < 8; ++guard) {
        int src = -1, dst = -1;
        for (int k = 0; k < 3; ++k) {
            int have = cnt[k][0] + cnt[k][1];
            if (have > want[k]) src = k;
            if (have < want[k]) dst = k;
        }
        if (src < 0) break;
        int arm = cnt[src][0] >= cnt[src][1] ? 0 : 1;
        if (cnt[src][arm] <= 1) arm ^= 1;
        if (cnt[src][arm] <= 1)
            throw ValidationError("dataset too small to give every split both treatment arms");
        --cnt[src][arm];
        ++cnt[dst][arm];
    }

    std::mt19937_64 rng(seed);
    std::shuffle(arm0.begin(), arm0.end(), rng);
    std::shuffle(arm1.begin(), arm1.end(), rng);

    std::array<std::vector<int>, 3> parts;
    size_t pos0 = 0, pos1 = 0;
    for (int k = 0; k < 3; ++k) {
        for (int c = 0; c < cnt[k][0]; ++c) parts[k].push_back(arm0[pos0++]);
        for (int c = 0; c < cnt[k][1]; ++c) parts[k].push_back(arm1[pos1++]);
        std::sort(parts[k].begin(), parts[k].end());
    }
    SplitResult out;
    out.train = take_rows(ds, parts[0]);
    out.val = take_rows(ds, parts[1]);
    out.test = take_rows(ds, parts[2]);
    out.train_idx = std::move(parts[0]);
    out.val_idx = std::move(parts[1]);
    out.test_idx = std::move(parts[2]);
    return out;
}

void write_dataset_csv(const Dataset& ds, const std::string& path) {
    std::vector<std::string> header;
    for (int j = 0; j < ds.d(); ++j) header.push_back("x" + fmt_int(j));
    header.emplace_back("t");
    header.emplace_back("y");
    header.emplace_back("delta");
    std::vector<std::vector<std::string>> rows;
    rows.reserve(ds.n());
    for (int i = 0; i < ds.n(); ++i) {
        std::vector<std::string> row;
        row.reserve(ds.d() + 3);
        for (int j = 0; j < ds.d(); ++j) row.push_back(fmt_double(ds.x(i, j)));
        row.push_back(fmt_int(ds.t[i]));
        row.push_back(fmt_double(ds.y[i]));
        row.push_back(fmt_int(ds.delta[i]));
        rows.push_back(std::move(row));
    }
    write_csv(path, header, rows);
}

Dataset read_dataset_csv(const std::string& path) {
    CsvTable table = read_csv(path);
    const int ncol = static_cast<int>(table.header.size());
    if (ncol < 4) throw ValidationError(path + ": expected x0..,t,y,delta columns");
    const int d = ncol - 3;
    for (int j = 0; j < d; ++j)
        if (table.header[j] != "x" + fmt_int(j))
            throw ValidationError(path + ": expected column x" + fmt_int(j) + ", got " + table.header[j]);
    if (table.header[d] != "t" || table.header[d + 1] != "y" || table.header[d + 2] != "delta")
        throw ValidationError(path + ": expected trailing columns t,y,delta");

    const int n = static_cast<int>(table.rows.size());
    MatrixXd x(n, d);
    VectorXi t(n), delta(n);
    VectorXd y(n);
    for (int i = 0; i < n; ++i) {
        const auto& row = table.rows[i];
        for (int j = 0; j < d; ++j) x(i, j) = parse_double(row[j]);
        t[i] = static_cast<int>(parse_int(row[d]));
        y[i] = parse_double(row[d + 1]);
        delta[i] = static_cast<int>(parse_int(row[d + 2]));
    }
    return validate_dataset(x, t, y, delta);
}

TimeGrid validate_grid(std::vector<double> cuts) {
    if (cuts.size() < 3) throw ValidationError("time grid needs at least two bins");
    if (cuts.front() != 0.0) throw ValidationError("time grid must start at 0");
    for (size_t j = 1; j < cuts.size(); ++j) {
        if (!std::isfinite(cuts[j]) || cuts[j] <= cuts[j - 1])
            throw ValidationError("time grid cuts must be finite and strictly increasing");
    }
    return TimeGrid{std::move(cuts)};
}

void write_grid_csv(const TimeGrid& grid, const std::string& path) {
    std::vector<std::vector<std::string>> rows;
    for (double c : grid.cuts) rows.push_back({fmt_double(c)});
    write_csv(path, {"tau"}, rows);
}

TimeGrid read_grid_csv(const std::string& path) {
    CsvTable table = read_csv(path);
    if (table.header.size() != 1 || table.header[0] != "tau")
        throw ValidationError(path + ": expected single column tau");
    std::vector<double> cuts;
    for (const auto& row : table.rows) cuts.push_back(parse_double(row[0]));
    return validate_grid(std::move(cuts));
}

Normalizer fit_normalizer(const MatrixXd& x) {
    Normalizer nz;
    nz.mu = x.colwise().mean();
    MatrixXd centered = x.rowwise() - nz.mu.transpose();
    nz.sigma = (centered.array().square().colwise().sum() / std::max<int>(1, (int)x.rows())).sqrt();
    for (int j = 0; j < nz.sigma.size(); ++j)
        if (nz.sigma[j] < 1e-12) nz.sigma[j] = 1.0;
    return nz;
}

MatrixXd apply_normalizer(const Normalizer& nz, const MatrixXd& x) {
    return (x.rowwise() - nz.mu.transpose()).array().rowwise() / nz.sigma.transpose().array();
}

}  // namespace survbal
