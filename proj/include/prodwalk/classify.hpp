#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "prodwalk/model.hpp"

namespace pw {

// Outcome of the piecewise-vs-linear model selection for one trajectory.
struct CanonicalVerdict {
    bool is_canonical = false;
    bool piecewise = false;            // best model is the hinge
    int breakpoint = -1;               // career age, valid when piecewise
    double slope1 = 0.0;               // first-piece slope (or linear slope)
    std::optional<double> slope2;      // second-piece slope when piecewise
    double aicc_linear = 0.0;
    double aicc_piecewise = 0.0;       // best over breakpoints
};

// Gaussian-likelihood AICc model selection between a linear trend and a
// continuous two-piece hinge with integer breakpoints in
// [breakpoint_min, breakpoint_max].  A trajectory is canonical when the
// hinge wins, rises then falls, and the rise is at least twice as steep as
// the fall.
CanonicalVerdict classify_canonical(const Trajectory& traj,
                                    int breakpoint_min = 3,
                                    int breakpoint_max = 17);

struct FractionCI {
    double fraction;
    double lo;
    double hi;
};

FractionCI canonical_fraction(std::span<const Trajectory> ensemble);

struct SweepCell {
    double alpha1;
    double alpha2;
    int n;
    double fraction;
    double ci_lo;
    double ci_hi;
};

struct SweepGrid {
    std::vector<double> alpha1_values;
    std::vector<double> alpha2_values;
    std::vector<SweepCell> cells;  // row-major over (alpha1, alpha2)
};

struct SweepOptions {
    double mu = -1.0;
    double lambda0 = 4.65;
    int n_per_cell = 400;
    int change_year = 5;  // stage boundary: ages 0..change_year-1 vs rest
    int length = kFullTrajectoryLength;
    BoundaryMode boundary = BoundaryMode::censor;
};

// Two-stage fixed-mode model used by the sweep and the phase-diagram tests.
CareerModel simplified_model(double alpha1, double alpha2,
                             const SweepOptions& opts = {});

SweepGrid sweep_variances(std::span<const double> alpha1_values,
                          std::span<const double> alpha2_values,
                          const SweepOptions& opts, std::uint64_t seed);

std::string sweep_to_csv(const SweepGrid& grid);
std::string verdicts_to_csv(std::span<const Trajectory> trajs,
                            std::span<const CanonicalVerdict> verdicts);

}  // namespace pw
