#include "doctest.h"

#include "survbal/discretize.hpp"

#include <random>

using namespace survbal;

namespace {

VectorXd vec(std::initializer_list<double> v) {
    VectorXd out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) out[i++] = x;
    return out;
}

VectorXi ivec(std::initializer_list<int> v) {
    VectorXi out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (int x : v) out[i++] = x;
    return out;
}

}  // namespace

TEST_CASE("kaplan-meier exact fixtures") {
    // all events
    KMEstimate a = kaplan_meier(vec({1, 2, 3}), ivec({1, 1, 1}));
    REQUIRE(a.times == std::vector<double>{1, 2, 3});
    CHECK(a.survival[0] == 2.0 / 3.0);
    CHECK(a.survival[1] == 1.0 / 3.0);
    CHECK(a.survival[2] == 0.0);
    CHECK(a.n_risk == std::vector<int>{3, 2, 1});

    // one censoring between events
    KMEstimate b = kaplan_meier(vec({1, 2, 3}), ivec({1, 0, 1}));
    REQUIRE(b.times == std::vector<double>{1, 3});
    CHECK(b.survival[0] == 2.0 / 3.0);
    CHECK(b.survival[1] == 0.0);

    // tie of events and a censoring at the same time: events first
    KMEstimate c = kaplan_meier(vec({1, 1, 1, 2}), ivec({1, 0, 1, 1}));
    REQUIRE(c.times == std::vector<double>{1, 2});
    CHECK(c.survival[0] == 0.5);
    CHECK(c.n_risk[0] == 4);
    CHECK(c.n_event[0] == 2);
    CHECK(c.survival[1] == 0.0);

    // censorings interleaved
    KMEstimate d = kaplan_meier(vec({2, 2, 3, 4, 4, 5}), ivec({1, 1, 0, 1, 0, 1}));
    REQUIRE(d.times == std::vector<double>{2, 4, 5});
    CHECK(d.survival[0] == 2.0 / 3.0);
    CHECK(d.survival[1] == 4.0 / 9.0);
    CHECK(d.survival[2] == 0.0);

    // censoring before the first event
    KMEstimate e = kaplan_meier(vec({0.5, 1, 2}), ivec({0, 1, 1}));
    REQUIRE(e.times == std::vector<double>{1, 2});
    CHECK(e.survival[0] == 0.5);
    CHECK(e.survival[1] == 0.0);

    // all censored: no event times, survival locked at 1
    KMEstimate f = kaplan_meier(vec({1, 2, 3}), ivec({0, 0, 0}));
    CHECK(f.times.empty());
    CHECK(f.at(0.0) == 1.0);
    CHECK(f.at(100.0) == 1.0);

    CHECK_THROWS_AS(kaplan_meier(VectorXd(), VectorXi()), ValidationError);
}

TEST_CASE("kaplan-meier step lookup") {
    KMEstimate km = kaplan_meier(vec({1, 2, 3}), ivec({1, 1, 1}));
    CHECK(km.at(0.5) == 1.0);
    CHECK(km.at(1.0) == 2.0 / 3.0);
    CHECK(km.at(1.7) == 2.0 / 3.0);
    CHECK(km.at(2.0) == 1.0 / 3.0);
    CHECK(km.at(99.0) == 0.0);
}

TEST_CASE("kaplan-meier equals empirical survival without censoring") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> unif(0.1, 10.0);
    const int n = 200;
    VectorXd y(n);
    for (int i = 0; i < n; ++i) y[i] = unif(rng);
    KMEstimate km = kaplan_meier(y, VectorXi::Ones(n));
    for (double t : {0.5, 2.0, 5.0, 9.9}) {
        const double emp = (y.array() > t).cast<double>().mean();
        CHECK(km.at(t) == doctest::Approx(emp).epsilon(1e-12));
    }
}

TEST_CASE("equidistant grid") {
    TimeGrid g = grid_equidistant(10.0, 5);
    CHECK(g.cuts == std::vector<double>{0, 2, 4, 6, 8, 10});
    CHECK(grid_equidistant(1.0, 2).cuts.size() == 3);
    CHECK_THROWS_AS(grid_equidistant(10.0, 1), ValidationError);
    CHECK_THROWS_AS(grid_equidistant(0.0, 5), ValidationError);
}

TEST_CASE("km-quantile grid on uniform steps returns the order statistics") {
    // n = m distinct uncensored times: survival drops by exactly 1/m per event
    VectorXd y = vec({3, 1, 4, 2});
    KMEstimate km = kaplan_meier(y, VectorXi::Ones(4));
    TimeGrid g = grid_km_quantile(km, 4, 4.0);
    CHECK(g.cuts == std::vector<double>{0, 1, 2, 3, 4});
    CHECK_THROWS_AS(grid_km_quantile(km, 1, 4.0), ValidationError);
}

TEST_CASE("km-quantile grid ignores event times beyond the horizon") {
    VectorXd y = vec({1, 2, 3, 4, 100});
    KMEstimate km = kaplan_meier(y, VectorXi::Ones(5));
    TimeGrid g = grid_km_quantile(km, 4, 10.0);
    CHECK(g.horizon() == 4.0);
    for (size_t j = 1; j < g.cuts.size(); ++j) {
        CHECK(std::find(km.times.begin(), km.times.end(), g.cuts[j]) != km.times.end());
    }
}

TEST_CASE("km-quantile grid is denser where events concentrate") {
    // heavy early mass: most events below 1, a thin tail up to 10
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> early(0.01, 1.0), late(1.0, 10.0);
    const int n = 400;
    VectorXd y(n);
    for (int i = 0; i < n; ++i) y[i] = i < 360 ? early(rng) : late(rng);
    KMEstimate km = kaplan_meier(y, VectorXi::Ones(n));
    const int m = 10;
    TimeGrid q = grid_km_quantile(km, m, 10.0);
    TimeGrid e = grid_equidistant(10.0, m);

    VectorXd sorted = y;
    const double median = quantile(sorted, 0.5);
    auto below = [&](const TimeGrid& g) {
        int c = 0;
        for (size_t j = 1; j < g.cuts.size(); ++j) c += g.cuts[j] < median;
        return c;
    };
    CHECK(below(q) > below(e));
}

TEST_CASE("interval index") {
    TimeGrid g = validate_grid({0, 1, 2, 3});
    CHECK(interval_index(g, 1.5) == 2);
    CHECK(interval_index(g, 2.0) == 2);  // right-closed
    CHECK(interval_index(g, 7.0) == 4);  // beyond horizon
    CHECK(interval_index(g, 0.0) == 1);
    CHECK(interval_index(g, 3.0) == 3);
    CHECK_THROWS_AS(interval_index(g, -0.1), ValidationError);

    // consistency: cuts[k-1] < y <= cuts[k] for in-range y
    int prev = 1;
    for (double y = 0.01; y <= 3.0; y += 0.01) {
        int k = interval_index(g, y);
        CHECK(k >= prev);  // monotone in y
        prev = k;
        CHECK(g.cuts[static_cast<size_t>(k) - 1] < y);
        CHECK(y <= g.cuts[static_cast<size_t>(k)]);
    }
}

TEST_CASE("nearest-rank quantile") {
    VectorXd v(10);
    for (int i = 0; i < 10; ++i) v[i] = i + 1;
    CHECK(quantile(v, 0.5) == 5.0);
    CHECK(quantile(v, 0.95) == 10.0);
    CHECK(quantile(v, 1.0) == 10.0);
    CHECK(quantile(v, 0.05) == 1.0);
    CHECK_THROWS_AS(quantile(VectorXd(), 0.5), ValidationError);
    CHECK_THROWS_AS(quantile(v, 0.0), ValidationError);
    CHECK_THROWS_AS(quantile(v, 1.5), ValidationError);
}
