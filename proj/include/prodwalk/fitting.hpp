#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "prodwalk/model.hpp"

namespace pw {

// All (q_t, q_{t+1}) pairs pooled across trajectories for one career stage.
struct StageData {
    int stage = 0;
    std::vector<QDelta> pairs;  // delta = q_{t+1} - q_t
};

struct StageFit {
    StageParams params;
    double log_likelihood;
    bool degenerate;
};

struct CandidateFit {
    ChangePointSet cps;
    double loglik;
    double aic;
    bool valid;  // false when some stage had < 2 pairs
};

struct FitOptions {
    // AIC parameter count: k = params_per_stage * stages
    //                        + (count_change_points ? #points : 0).
    int params_per_stage = 2;
    bool count_change_points = true;
    BoundaryMode likelihood_boundary = BoundaryMode::truncate;
    BoundaryMode model_boundary = BoundaryMode::censor;  // stamped on the result
};

struct FitResult {
    CareerModel best_model;
    double global_mode;  // half-sample mode of the pooled increments
    std::vector<CandidateFit> candidates;
};

struct BootstrapSummary {
    int replicates = 0;
    int failures = 0;
    // Change-point sets and their frequency among successful replicates,
    // sorted by descending frequency then cps order.
    std::vector<std::pair<ChangePointSet, double>> frequencies;
    // Per-replicate winning parameters, index-aligned with successes.
    std::vector<CareerModel> models;
};

// All strictly increasing tuples of 1..max_points change points drawn from
// [min_year, max_year], in lexicographic order within each size.
std::vector<ChangePointSet> enumerate_change_point_sets(int min_year = 1,
                                                        int max_year = 19,
                                                        int max_points = 3);

std::vector<StageData> build_stage_data(std::span<const Trajectory> trajs,
                                        const ChangePointSet& cps);

// The four-step alternation: alpha at the global mode, beta at that alpha,
// then alpha again at mode beta * q_t.  Run once, not iterated.
StageFit fit_stage(const StageData& data, double global_mode,
                   BoundaryMode boundary = BoundaryMode::truncate);

FitResult fit_model(std::span<const Trajectory> trajs,
                    std::span<const ChangePointSet> candidates,
                    const FitOptions& opts = {});

BootstrapSummary bootstrap_fit(std::span<const Trajectory> trajs,
                               int replicates, std::uint64_t seed,
                               std::span<const ChangePointSet> candidates,
                               const FitOptions& opts = {});

std::string fit_result_to_json(const FitResult& fit);
std::string candidates_to_csv(const FitResult& fit);
std::string bootstrap_to_json(const BootstrapSummary& bs);
std::string bootstrap_frequencies_to_csv(const BootstrapSummary& bs);

}  // namespace pw
