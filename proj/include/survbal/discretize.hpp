#pragma once

#include "survbal/common.hpp"
#include "survbal/dataset.hpp"

namespace survbal {

// Product-limit estimate tabulated at distinct event times. Ties are resolved
// events-first: subjects censored at t are still at risk for events at t.
struct KMEstimate {
    std::vector<double> times;     // distinct event times, increasing
    std::vector<double> survival;  // S(times[j])
    std::vector<int> n_risk;       // at-risk count just before times[j]
    std::vector<int> n_event;      // events at times[j]

    // Step lookup: S(t) = survival at the largest event time <= t, 1 before the first.
    double at(double t) const;
};

KMEstimate kaplan_meier(const VectorXd& y, const VectorXi& delta);

// cuts[j] = j * max_time / m.
TimeGrid grid_equidistant(double max_time, int m);

// Survival-quantile cuts: eta_i = 1 - i*(1 - eta_m)/m with eta_m = S(t_max), and
// cuts[i] = smallest event time with S <= eta_i. Event times above max_time are
// ignored; duplicate cuts collapse, so the result can have fewer than m bins.
TimeGrid grid_km_quantile(const KMEstimate& km, int m, double max_time);

// Interval index of y on the grid: smallest j >= 1 with y <= cuts[j]; y = 0 maps
// to 1 and y > cuts[m] to m+1.
int interval_index(const TimeGrid& grid, double y);

// Empirical quantile (nearest rank, q in (0,1]): the ceil(q*n)-th smallest value.
double quantile(VectorXd values, double q);

}  // namespace survbal
