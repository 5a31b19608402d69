#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "prodwalk/model.hpp"

namespace pw {

struct KsResult {
    double statistic;  // sup-norm ECDF distance
    double p_value;    // asymptotic Kolmogorov p
};

struct TTestResult {
    double statistic;
    double df;
    double p_value;  // two-sided
};

struct BinomialCI {
    double estimate;
    double lo;
    double hi;
};

// Exact two-sample KS distance over the pooled order statistics;
// p-value from the Kolmogorov series at sqrt(n*m/(n+m)) * D.
KsResult ks_two_sample(std::span<const double> a, std::span<const double> b);

// Survival function of the Kolmogorov distribution, Q(lambda).
double kolmogorov_sf(double lambda);

// Unequal-variance t test with Welch-Satterthwaite degrees of freedom.
TTestResult welch_t(std::span<const double> a, std::span<const double> b);

BinomialCI wald_binomial_ci(long long successes, long long n,
                            double level = 0.95);

// Conservative zero-year correction: product of the observed zero rate and
// the confirmed-zero rate.
double corrected_zero_rate(double observed_rate, double confirmation_rate);

struct YearMeanCI {
    double mean;
    double lo;
    double hi;
};

struct SummaryOptions {
    int bootstrap_replicates = 1000;
    std::uint64_t seed = 0;
    int cumulative_year = 5;
    double zero_threshold = 0.0;  // q <= threshold counts as a zero year
};

struct EnsembleSummary {
    std::vector<YearMeanCI> per_year_mean;     // index = career age
    std::vector<double> within_career_sd;      // one per trajectory
    std::vector<int> peak_years;               // argmax age, earliest on ties
    int peak_year_ties = 0;                    // trajectories with tied maxima
    std::map<int, int> zeros_per_career;       // zero-year count -> careers
    std::vector<double> annual_values;         // all person-years pooled
    std::vector<double> cumulative_at_year;    // per trajectory reaching it
    long long zero_years = 0;
    long long person_years = 0;
};

EnsembleSummary ensemble_summaries(std::span<const Trajectory> trajs,
                                   const SummaryOptions& opts = {});

struct ComparisonReport {
    EnsembleSummary a;
    EnsembleSummary b;
    KsResult peak_year_ks;
    KsResult within_sd_ks;
    TTestResult cumulative_t;
    BinomialCI zero_rate_a;
    BinomialCI zero_rate_b;
    double max_mean_abs_diff;  // over the common age range
};

ComparisonReport compare_ensembles(std::span<const Trajectory> a,
                                   std::span<const Trajectory> b,
                                   const SummaryOptions& opts = {});

std::string comparison_to_json(const ComparisonReport& report);

}  // namespace pw
