#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "prodwalk/model.hpp"

namespace pw {

// One researcher's raw publication record.
struct PublicationRow {
    std::string person_id;
    int calendar_year;
    int career_age;
    double count;  // raw count, or pre-adjusted productivity
};

struct PublicationTable {
    std::vector<PublicationRow> rows;
};

struct AdjustmentEntry {
    double multiplier;            // > 0
    double offset = 0.0;          // applied to nonzero counts only
};

struct AdjustmentTable {
    std::map<int, AdjustmentEntry> by_year;
};

// Adjusted trajectory together with the metadata the inclusion filter needs.
struct CohortTrajectory {
    Trajectory traj;                 // adjusted productivity
    std::vector<double> raw_counts;  // same indexing as traj.q
    std::optional<int> start_year;   // calendar year at career age 0
};

// Long CSV with header person_id,career_year,q.  Ages are made contiguous
// from 0 by filling interior gaps with explicit zeros; person order follows
// first appearance.
std::vector<Trajectory> load_trajectories(const std::string& path);
std::string trajectories_to_csv(std::span<const Trajectory> trajs);
void save_trajectories(std::span<const Trajectory> trajs,
                       const std::string& path);

// CSV person_id,calendar_year,career_age,count.
PublicationTable load_publications(const std::string& path);

// CSV year,multiplier[,offset].
AdjustmentTable load_adjustment(const std::string& path);

// q = multiplier(year) * count, plus offset on nonzero counts; zero counts
// stay exactly zero.  Throws when a calendar year is missing from the table.
std::vector<CohortTrajectory> apply_adjustment(const PublicationTable& pubs,
                                               const AdjustmentTable& adj);

struct FilterOptions {
    double min_early_pubs = 3.0;
    int early_window = 5;          // ages 0 .. early_window-1
    int min_start_year = 1980;
    int span = kFullTrajectoryLength;
    // Check the early-productivity rule on adjusted values when raw counts
    // are unavailable.
    bool early_check_on_adjusted = false;
};

struct FilterResult {
    std::vector<Trajectory> included;           // truncated to span
    std::vector<Trajectory> full_trajectories;  // all span years observed
};

FilterResult filter_inclusion(std::span<const CohortTrajectory> trajs,
                              const FilterOptions& opts = {});

// Convenience overload for bare trajectories (no start-year or raw-count
// metadata; the early check runs on the adjusted values).
FilterResult filter_inclusion(std::span<const Trajectory> trajs,
                              const FilterOptions& opts = {});

}  // namespace pw
