#pragma once

#include "survbal/common.hpp"
#include "survbal/dataset.hpp"
#include "survbal/model.hpp"
#include "survbal/objective.hpp"

#include <string>
#include <vector>

namespace survbal {

struct EpochRow {
    int epoch = 0;  // 0 is the pre-training evaluation
    double train_obj = 0.0;
    double val_obj = 0.0;
    double balance_term = 0.0;
    double seconds = 0.0;
};

struct TrainReport {
    std::vector<EpochRow> history;
    int best_epoch = 0;
    double best_val = 0.0;
    std::string stop_reason;  // patience | max_epochs | divergence
    int single_arm_batches = 0;
    int censored_rows_skipped = 0;  // on the training split, counted once
};

struct FitResult {
    ModelParams params;
    TrainReport report;
};

// epoch,train_obj,val_obj,balance_term,seconds
void write_history_csv(const TrainReport& report, const std::string& path);

// Builds grid, normalizer and weights from the training split, then runs
// mini-batch adaptive-moment optimization with early stopping on the
// validation objective. Returns the parameters of the best validation epoch.
FitResult fit(const Dataset& train, const Dataset& val, const HyperParams& hp);

// Discrete candidate lists; empty lists fall back to the base value.
struct SearchSpace {
    std::vector<int> n_durations, hidden, phi_layers, psi_layers;
    std::vector<double> lr, lambda_r, lambda_w, gamma_wd;
};

struct SearchEntry {
    HyperParams hp;
    double val_obj = 0.0;
    int candidate = 0;
    bool diverged = false;
};

struct SearchResult {
    HyperParams best;
    double best_val = 0.0;
    std::vector<SearchEntry> leaderboard;  // ascending validation objective
};

// Samples `budget` configurations uniformly with replacement from the lists,
// fits each, ranks by best validation objective. Throws DivergenceError if
// every candidate diverged.
SearchResult random_search(const Dataset& train, const Dataset& val, const HyperParams& base,
                           const SearchSpace& space, int budget, std::uint64_t seed);

}  // namespace survbal
