#include "doctest.h"

#include "survbal/dataset.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <random>
#include <set>

using namespace survbal;

namespace {

Dataset tiny_dataset(int n, unsigned seed = 1) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss;
    MatrixXd x(n, 3);
    VectorXi t(n), delta(n);
    VectorXd y(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < 3; ++j) x(i, j) = gauss(rng);
        t[i] = i % 2;
        y[i] = std::abs(gauss(rng)) + 0.1;
        delta[i] = (i % 3) != 0;
    }
    return validate_dataset(x, t, y, delta);
}

}  // namespace

TEST_CASE("validate_dataset accepts well-formed input") {
    MatrixXd x(3, 2);
    x << 1, 2, 3, 4, 5, 6;
    VectorXi t(3), delta(3);
    t << 0, 1, 0;
    delta << 1, 1, 0;
    VectorXd y(3);
    y << 1.0, 2.0, 0.5;
    Dataset ds = validate_dataset(x, t, y, delta);
    CHECK(ds.n() == 3);
    CHECK(ds.d() == 2);
}

TEST_CASE("validate_dataset rejects bad rows") {
    MatrixXd x = MatrixXd::Ones(3, 2);
    VectorXi t(3), delta(3);
    t << 0, 1, 0;
    delta << 1, 1, 0;
    VectorXd y(3);
    y << 1.0, 2.0, 0.5;

    VectorXd y_neg = y;
    y_neg[2] = -1.0;
    CHECK_THROWS_WITH_AS(validate_dataset(x, t, y_neg, delta), doctest::Contains("negative time"),
                         ValidationError);

    VectorXi all_treated = VectorXi::Ones(3);
    CHECK_THROWS_WITH_AS(validate_dataset(x, all_treated, y, delta),
                         doctest::Contains("empty control group"), ValidationError);
    VectorXi none_treated = VectorXi::Zero(3);
    CHECK_THROWS_WITH_AS(validate_dataset(x, none_treated, y, delta),
                         doctest::Contains("empty treated group"), ValidationError);

    VectorXi t_bad = t;
    t_bad[0] = 2;
    CHECK_THROWS_AS(validate_dataset(x, t_bad, y, delta), ValidationError);
    VectorXi d_bad = delta;
    d_bad[1] = -1;
    CHECK_THROWS_AS(validate_dataset(x, t, y, d_bad), ValidationError);

    MatrixXd x_bad = x;
    x_bad(1, 1) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_WITH_AS(validate_dataset(x_bad, t, y, delta), doctest::Contains("non-finite"),
                         ValidationError);
}

TEST_CASE("split sizes, disjointness, stratification") {
    Dataset ds = tiny_dataset(1000);
    SplitResult sp = split_dataset(ds, 0.6, 0.2, 0.2, 7);
    CHECK(sp.train.n() == 600);
    CHECK(sp.val.n() == 200);
    CHECK(sp.test.n() == 200);

    std::set<int> seen;
    for (const auto* part : {&sp.train_idx, &sp.val_idx, &sp.test_idx}) {
        for (int i : *part) {
            CHECK(seen.insert(i).second);  // disjoint
        }
        CHECK(std::is_sorted(part->begin(), part->end()));
    }
    CHECK(seen.size() == 1000);  // covering

    for (const Dataset* part : {&sp.train, &sp.val, &sp.test}) {
        CHECK(part->t.minCoeff() == 0);
        CHECK(part->t.maxCoeff() == 1);
    }
    // stratified: arm-1 share in each split within one row of the global shares
    const double share = ds.t.cast<double>().mean();
    CHECK(sp.train.t.cast<double>().mean() == doctest::Approx(share).epsilon(0.01));
}

TEST_CASE("split determinism and seed sensitivity") {
    Dataset ds = tiny_dataset(200);
    SplitResult a = split_dataset(ds, 0.6, 0.2, 0.2, 7);
    SplitResult b = split_dataset(ds, 0.6, 0.2, 0.2, 7);
    CHECK(a.train_idx == b.train_idx);
    CHECK(a.val_idx == b.val_idx);
    CHECK(a.test_idx == b.test_idx);
    SplitResult c = split_dataset(ds, 0.6, 0.2, 0.2, 8);
    CHECK(a.train_idx != c.train_idx);
}

TEST_CASE("split rejects infeasible and malformed requests") {
    MatrixXd x = MatrixXd::Ones(3, 2);
    VectorXi t(3), delta = VectorXi::Ones(3);
    t << 1, 1, 0;
    VectorXd y(3);
    y << 1, 2, 3;
    Dataset ds = validate_dataset(x, t, y, delta);
    CHECK_THROWS_AS(split_dataset(ds, 0.6, 0.2, 0.2, 7), ValidationError);

    Dataset big = tiny_dataset(100);
    CHECK_THROWS_AS(split_dataset(big, 0.5, 0.2, 0.2, 7), ValidationError);  // sums to 0.9
    CHECK_THROWS_AS(split_dataset(big, 1.0, 0.0, 0.0, 7), ValidationError);
}

TEST_CASE("dataset csv round-trips bitwise") {
    Dataset ds = tiny_dataset(37);
    ds.x(0, 0) = 0.1;  // classic non-dyadic value
    ds.x(1, 1) = 1e-300;
    const std::string path =
        (std::filesystem::temp_directory_path() / "survbal_ds_roundtrip.csv").string();
    write_dataset_csv(ds, path);
    Dataset back = read_dataset_csv(path);
    CHECK(back.n() == ds.n());
    CHECK(back.d() == ds.d());
    CHECK(back.x == ds.x);
    CHECK(back.y == ds.y);
    CHECK(back.t == ds.t);
    CHECK(back.delta == ds.delta);
    std::remove(path.c_str());
}

TEST_CASE("grid validation and csv round-trip") {
    CHECK_THROWS_AS(validate_grid({0.0, 1.0}), ValidationError);        // m = 1
    CHECK_THROWS_AS(validate_grid({0.5, 1.0, 2.0}), ValidationError);   // no 0
    CHECK_THROWS_AS(validate_grid({0.0, 2.0, 1.0}), ValidationError);   // not increasing
    CHECK_THROWS_AS(validate_grid({0.0, 1.0, 1.0}), ValidationError);   // tie
    TimeGrid g = validate_grid({0.0, 0.5, 1.25});
    CHECK(g.m() == 2);
    CHECK(g.horizon() == 1.25);

    const std::string path = (std::filesystem::temp_directory_path() / "survbal_grid.csv").string();
    write_grid_csv(g, path);
    TimeGrid back = read_grid_csv(path);
    CHECK(back.cuts == g.cuts);
    std::remove(path.c_str());
}

TEST_CASE("normalizer zero-scores the fitted split") {
    Dataset ds = tiny_dataset(500);
    Normalizer nz = fit_normalizer(ds.x);
    MatrixXd z = apply_normalizer(nz, ds.x);
    for (int j = 0; j < z.cols(); ++j) {
        CHECK(z.col(j).mean() == doctest::Approx(0.0).epsilon(1e-9));
        CHECK(std::sqrt(z.col(j).squaredNorm() / z.rows()) == doctest::Approx(1.0).epsilon(1e-9));
    }
    // same statistics applied to other data
    MatrixXd other = MatrixXd::Constant(2, 3, 5.0);
    MatrixXd zo = apply_normalizer(nz, other);
    for (int j = 0; j < 3; ++j) CHECK(zo(0, j) == (5.0 - nz.mu[j]) / nz.sigma[j]);
    // constant column gets a floored sigma, no division blow-up
    MatrixXd cx = MatrixXd::Constant(4, 1, 2.0);
    Normalizer cnz = fit_normalizer(cx);
    CHECK(cnz.sigma[0] == 1.0);
    CHECK(apply_normalizer(cnz, cx)(0, 0) == 0.0);
}
