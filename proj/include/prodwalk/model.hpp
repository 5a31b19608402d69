#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "prodwalk/distributions.hpp"
#include "prodwalk/rng.hpp"

namespace pw {

// Ordered career ages at which the increment distribution switches stage.
// Stages include their right endpoint: points (2, 5) encode stages spanning
// ages 0-2, 3-5, and 6 onward.
struct ChangePointSet {
    std::vector<int> points;  // strictly increasing, 0-3 entries

    void validate(int min_year = 1, int max_year = 19) const;
    int stage_count() const { return static_cast<int>(points.size()) + 1; }

    bool operator==(const ChangePointSet&) const = default;
};

// Ordering used for deterministic tie-breaking: fewer points first, then
// lexicographic.
bool cps_less(const ChangePointSet& a, const ChangePointSet& b);

int stage_of(int t, const ChangePointSet& cps);

struct StageParams {
    double scale;            // alpha_i
    LocationRule mode_rule;  // fixed mu_i or slope beta_i
};

struct CareerModel {
    ExponentialInit init;         // lambda_0
    ChangePointSet change_points;
    std::vector<StageParams> stages;  // size = change_points.size() + 1
    BoundaryMode boundary = BoundaryMode::censor;

    void validate() const;
};

struct Trajectory {
    std::string person_id;
    std::vector<double> q;  // adjusted productivity, index = career age

    bool operator==(const Trajectory&) const = default;
};

inline constexpr int kFullTrajectoryLength = 21;  // career ages 0-20

Trajectory simulate_trajectory(const CareerModel& model, int length,
                               RngStream rng);

// n independent trajectories from per-index split streams; person ids are
// "sim<index>".
std::vector<Trajectory> simulate_ensemble(const CareerModel& model, int n,
                                          int length, std::uint64_t seed);

// Fixed-field-order JSON with reals rendered to 17 significant digits.
std::string career_model_to_json(const CareerModel& model);
CareerModel career_model_from_json(const std::string& text);

}  // namespace pw
