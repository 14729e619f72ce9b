#pragma once

#include "survbal/common.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace survbal {

// One observational survival sample: features, binary treatment, observed time,
// event indicator (1 = event, 0 = censored). Treated as immutable after validation.
struct Dataset {
    MatrixXd x;      // n x d
    VectorXi t;      // 0/1
    VectorXd y;      // >= 0
    VectorXi delta;  // 0/1

    int n() const { return static_cast<int>(y.size()); }
    int d() const { return static_cast<int>(x.cols()); }
};

// Checks shapes, finiteness, ranges, and that both arms are present.
Dataset validate_dataset(const MatrixXd& x, const VectorXi& t, const VectorXd& y, const VectorXi& delta);

struct SplitResult {
    Dataset train, val, test;
    // positions in the source dataset, ascending per split
    std::vector<int> train_idx, val_idx, test_idx;
};

// Random split stratified by treatment arm. Fractions must sum to 1. Throws when
// any split cannot contain both arms.
SplitResult split_dataset(const Dataset& ds, double f_train, double f_val, double f_test,
                          std::uint64_t seed);

// Header: x0,...,x{d-1},t,y,delta. Numbers use shortest round-trip formatting,
// so serialize/parse round-trips bitwise.
void write_dataset_csv(const Dataset& ds, const std::string& path);
Dataset read_dataset_csv(const std::string& path);

// Discretization cut points: cuts[0] = 0 < cuts[1] < ... < cuts[m]. Interval j is
// (cuts[j-1], cuts[j]]; index m+1 is the beyond-horizon bin.
struct TimeGrid {
    std::vector<double> cuts;

    int m() const { return static_cast<int>(cuts.size()) - 1; }
    double horizon() const { return cuts.back(); }
};

TimeGrid validate_grid(std::vector<double> cuts);
void write_grid_csv(const TimeGrid& grid, const std::string& path);
TimeGrid read_grid_csv(const std::string& path);

// Survival values tabulated on increasing times, starting at (0, 1).
struct SurvivalCurve {
    std::vector<double> times;
    std::vector<double> values;
};

// Feature-wise z-score statistics fit on one split and applied to others.
struct Normalizer {
    VectorXd mu, sigma;  // sigma floored away from 0
};

Normalizer fit_normalizer(const MatrixXd& x);
MatrixXd apply_normalizer(const Normalizer& nz, const MatrixXd& x);

}  // namespace survbal
