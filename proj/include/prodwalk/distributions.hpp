#pragma once

#include <span>
#include <vector>

#include "prodwalk/rng.hpp"

namespace pw {

// How the walk handles the q >= 0 boundary.
//   truncate: the increment density is renormalized to delta >= -q.
//   censor:   the increment is unconstrained and q is clamped at 0,
//             placing an atom of probability exactly at q = 0.
enum class BoundaryMode { truncate, censor };

// Laplace increment distribution conditioned on current productivity q,
// which sets the lower boundary delta >= -q.
struct LaplaceIncrement {
    double location = 0.0;     // mode of the increment, papers/year
    double scale = 1.0;        // Laplace scale alpha, papers/year
    BoundaryMode boundary = BoundaryMode::truncate;
    double current_q = 0.0;    // conditioning productivity, >= 0
};

// First-year productivity distribution.
struct ExponentialInit {
    double mean = 1.0;  // mean papers in year 0
};

// CDF of the unconstrained Laplace(location, scale).
double laplace_cdf(double x, double location, double scale);

// log P(X > x) for the unconstrained Laplace; computed without
// catastrophic cancellation in either tail.
double laplace_log_sf(double x, double location, double scale);

// Log-density of the truncated increment distribution.  Throws
// std::domain_error when delta < -current_q or scale <= 0.
double trunc_laplace_logpdf(double delta, const LaplaceIncrement& inc);

// CDF of the truncated increment distribution (0 below -current_q).
double trunc_laplace_cdf(double delta, const LaplaceIncrement& inc);

// Log-likelihood contribution of one observed increment under the chosen
// boundary handling.  For censor mode, a boundary hit (delta == -current_q)
// contributes the log of the atom mass P(X <= -current_q).
double increment_loglik(double delta, const LaplaceIncrement& inc);

// Draw one increment.  truncate: inverse CDF restricted to the admissible
// quantile range.  censor: unconstrained draw clamped at -current_q.
double sample_increment(const LaplaceIncrement& inc, RngStream& rng);

// Draw initial productivity q0 >= 0.
double sample_initial(const ExponentialInit& init, RngStream& rng);

// Fit the exponential by its MLE (the sample mean).  Throws on empty,
// negative, or all-zero input.
ExponentialInit fit_exponential(std::span<const double> first_year_values);

// Half-sample mode: recursively narrow to the shortest half of the sorted
// sample.  Requires at least 8 observations.
double estimate_mode(std::span<const double> deltas);

// One (q_t, delta_t) observation.
struct QDelta {
    double q;
    double delta;
};

// Location rule for the increment mode within a career stage: either a
// fixed mode mu or a productivity-proportional mode beta * q_t.
struct LocationRule {
    enum class Kind { fixed, slope } kind = Kind::fixed;
    double value = 0.0;

    double mode_at(double q) const {
        return kind == Kind::fixed ? value : value * q;
    }
    static LocationRule fixed(double mu) { return {Kind::fixed, mu}; }
    static LocationRule slope(double beta) { return {Kind::slope, beta}; }
};

struct ScaleFit {
    double alpha;
    double log_likelihood;
    bool degenerate;  // optimizer pinned at the lower search bound
};

inline constexpr double kScaleSearchLo = 1e-3;
inline constexpr double kScaleSearchHi = 1e3;

// Maximum-likelihood scale, bracketed scalar search on
// [kScaleSearchLo, kScaleSearchHi] to 1e-6 relative tolerance.
ScaleFit fit_scale_mle(std::span<const QDelta> pairs, const LocationRule& rule,
                       BoundaryMode boundary = BoundaryMode::truncate);

// Maximum-likelihood mode slope beta at fixed scale alpha.
double fit_slope_mle(std::span<const QDelta> pairs, double alpha,
                     BoundaryMode boundary = BoundaryMode::truncate);

// Summed increment log-likelihood over a stage's pairs.
double pairs_loglik(std::span<const QDelta> pairs, double alpha,
                    const LocationRule& rule, BoundaryMode boundary);

}  // namespace pw
