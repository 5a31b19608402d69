#include "prodwalk/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "prodwalk/optimize.hpp"

namespace pw {

namespace {

void check_params(const LaplaceIncrement& inc) {
    if (!(inc.scale > 0.0)) throw std::domain_error("Laplace scale must be > 0");
    if (!(inc.current_q >= 0.0))
        throw std::domain_error("conditioning productivity must be >= 0");
}

// Laplace quantile function.
double laplace_quantile(double u, double location, double scale) {
    return u < 0.5 ? location + scale * std::log(2.0 * u)
                   : location - scale * std::log(2.0 * (1.0 - u));
}

}  // namespace

double laplace_cdf(double x, double location, double scale) {
    const double z = (x - location) / scale;
    return z < 0.0 ? 0.5 * std::exp(z) : 1.0 - 0.5 * std::exp(-z);
}

double laplace_log_sf(double x, double location, double scale) {
    const double z = (x - location) / scale;
    if (z < 0.0) return std::log1p(-0.5 * std::exp(z));
    return std::log(0.5) - z;
}

double trunc_laplace_logpdf(double delta, const LaplaceIncrement& inc) {
    check_params(inc);
    const double lower = -inc.current_q;
    if (delta < lower)
        throw std::domain_error("increment below the -q boundary");
    const double log_kernel =
        -std::log(2.0 * inc.scale) -
        std::fabs(delta - inc.location) / inc.scale;
    return log_kernel - laplace_log_sf(lower, inc.location, inc.scale);
}

double trunc_laplace_cdf(double delta, const LaplaceIncrement& inc) {
    check_params(inc);
    const double lower = -inc.current_q;
    if (delta <= lower) return 0.0;
    const double f_lower = laplace_cdf(lower, inc.location, inc.scale);
    return (laplace_cdf(delta, inc.location, inc.scale) - f_lower) /
           (1.0 - f_lower);
}

double increment_loglik(double delta, const LaplaceIncrement& inc) {
    if (inc.boundary == BoundaryMode::truncate)
        return trunc_laplace_logpdf(delta, inc);
    check_params(inc);
    const double lower = -inc.current_q;
    if (delta < lower)
        throw std::domain_error("increment below the -q boundary");
    if (delta == lower) {
        // atom mass at the clamp
        const double f = laplace_cdf(lower, inc.location, inc.scale);
        return f > 0.0 ? std::log(f) : -std::numeric_limits<double>::infinity();
    }
    return -std::log(2.0 * inc.scale) -
           std::fabs(delta - inc.location) / inc.scale;
}

double sample_increment(const LaplaceIncrement& inc, RngStream& rng) {
    check_params(inc);
    const double lower = -inc.current_q;
    if (inc.boundary == BoundaryMode::censor) {
        return std::max(rng.laplace(inc.location, inc.scale), lower);
    }
    const double f_lower = laplace_cdf(lower, inc.location, inc.scale);
    const double u = f_lower + rng.uniform01() * (1.0 - f_lower);
    return std::max(laplace_quantile(u, inc.location, inc.scale), lower);
}

double sample_initial(const ExponentialInit& init, RngStream& rng) {
    if (!(init.mean > 0.0))
        throw std::domain_error("exponential mean must be > 0");
    return rng.exponential(init.mean);
}

ExponentialInit fit_exponential(std::span<const double> first_year_values) {
    if (first_year_values.empty())
        throw std::invalid_argument("fit_exponential: empty input");
    double sum = 0.0;
    for (double v : first_year_values) {
        if (v < 0.0)
            throw std::invalid_argument("fit_exponential: negative value");
        sum += v;
    }
    const double mean = sum / static_cast<double>(first_year_values.size());
    if (!(mean > 0.0))
        throw std::invalid_argument(
            "fit_exponential: all-zero sample gives a degenerate exponential");
    return ExponentialInit{mean};
}

double estimate_mode(std::span<const double> deltas) {
    if (deltas.size() < 8)
        throw std::invalid_argument("estimate_mode: need at least 8 values");
    std::vector<double> x(deltas.begin(), deltas.end());
    std::sort(x.begin(), x.end());
    std::size_t lo = 0, n = x.size();
    while (n > 3) {
        const std::size_t half = (n + 1) / 2;
        std::size_t best = lo;
        double best_width = x[lo + half - 1] - x[lo];
        for (std::size_t i = lo + 1; i + half <= lo + n; ++i) {
            const double w = x[i + half - 1] - x[i];
            if (w < best_width) {
                best_width = w;
                best = i;
            }
        }
        lo = best;
        n = half;
    }
    if (n == 1) return x[lo];
    if (n == 2) return 0.5 * (x[lo] + x[lo + 1]);
    // three points: midpoint of the closer pair
    const double d01 = x[lo + 1] - x[lo];
    const double d12 = x[lo + 2] - x[lo + 1];
    if (d01 < d12) return 0.5 * (x[lo] + x[lo + 1]);
    if (d12 < d01) return 0.5 * (x[lo + 1] + x[lo + 2]);
    return x[lo + 1];
}

double pairs_loglik(std::span<const QDelta> pairs, double alpha,
                    const LocationRule& rule, BoundaryMode boundary) {
    const double log2a = std::log(2.0 * alpha);
    double ll = 0.0;
    if (boundary == BoundaryMode::truncate) {
        for (const auto& p : pairs) {
            const double loc = rule.mode_at(p.q);
            ll += -log2a - std::fabs(p.delta - loc) / alpha -
                  laplace_log_sf(-p.q, loc, alpha);
        }
        return ll;
    }
    for (const auto& p : pairs) {
        const double loc = rule.mode_at(p.q);
        if (p.delta == -p.q) {
            const double f = laplace_cdf(-p.q, loc, alpha);
            ll += f > 0.0 ? std::log(f)
                          : -std::numeric_limits<double>::infinity();
        } else {
            ll += -log2a - std::fabs(p.delta - loc) / alpha;
        }
    }
    return ll;
}

ScaleFit fit_scale_mle(std::span<const QDelta> pairs, const LocationRule& rule,
                       BoundaryMode boundary) {
    if (pairs.empty())
        throw std::invalid_argument("fit_scale_mle: empty data");
    if (boundary == BoundaryMode::truncate) {
        for (const auto& p : pairs)
            if (p.delta < -p.q)
                throw std::domain_error("fit_scale_mle: delta below -q");
    }
    // Search in log-space; the likelihood is convex in alpha so a single
    // golden-section pass suffices.
    const auto neg_ll = [&](double log_alpha) {
        const double ll =
            pairs_loglik(pairs, std::exp(log_alpha), rule, boundary);
        if (!std::isfinite(ll)) return 1e300;
        return -ll;
    };
    const ScalarMin m = golden_min(neg_ll, std::log(kScaleSearchLo),
                                   std::log(kScaleSearchHi), 1e-7);
    if (!std::isfinite(m.fx) || m.fx >= 1e300)
        throw std::runtime_error("fit_scale_mle: non-finite likelihood");
    const double alpha = std::exp(m.x);
    const bool degenerate = alpha <= kScaleSearchLo * 1.001;
    return ScaleFit{alpha, -m.fx, degenerate};
}

double fit_slope_mle(std::span<const QDelta> pairs, double alpha,
                     BoundaryMode boundary) {
    if (pairs.empty())
        throw std::invalid_argument("fit_slope_mle: empty data");
    const auto neg_ll = [&](double beta) {
        const double ll =
            pairs_loglik(pairs, alpha, LocationRule::slope(beta), boundary);
        return std::isfinite(ll) ? -ll : 1e300;
    };
    return grid_then_golden(neg_ll, -3.0, 3.0, 121, 1e-7).x;
}

}  // namespace pw
