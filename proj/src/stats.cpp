#include "prodwalk/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "json.hpp"
#include "prodwalk/rng.hpp"

namespace pw {

namespace {

// Regularized incomplete beta via continued fraction (Lentz), used for the
// Student-t tail probability.
double betacf(double a, double b, double x) {
    constexpr int kMaxIter = 300;
    constexpr double kEps = 3e-14, kFpMin = 1e-300;
    const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0, d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kFpMin) d = kFpMin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kFpMin) c = kFpMin;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kFpMin) d = kFpMin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kFpMin) c = kFpMin;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kEps) break;
    }
    return h;
}

double ibeta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double ln_front = std::lgamma(a + b) - std::lgamma(a) -
                            std::lgamma(b) + a * std::log(x) +
                            b * std::log1p(-x);
    const double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0)) return front * betacf(a, b, x) / a;
    return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

double student_t_two_sided_p(double t, double df) {
    const double x = df / (df + t * t);
    return ibeta(0.5 * df, 0.5, x);
}

// Inverse standard normal CDF (Acklam's rational approximation).
double norm_quantile(double p) {
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    constexpr double plow = 0.02425, phigh = 1.0 - 0.02425;
    if (p <= 0.0 || p >= 1.0)
        throw std::domain_error("norm_quantile: p must be in (0,1)");
    if (p < plow) {
        const double q = std::sqrt(-2.0 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q +
                c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    if (p <= phigh) {
        const double q = p - 0.5, r = q * q;
        return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r +
                a[5]) *
               q /
               (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r +
                1.0);
    }
    const double q = std::sqrt(-2.0 * std::log1p(-p));
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q +
             c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
}

double mean_of(std::span<const double> v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / v.size();
}

double sample_variance(std::span<const double> v, double mean) {
    double s = 0.0;
    for (double x : v) s += (x - mean) * (x - mean);
    return s / (v.size() - 1);
}

}  // namespace

double kolmogorov_sf(double lambda) {
    if (lambda <= 0.0) return 1.0;
    double sum = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double term =
            std::exp(-2.0 * k * k * lambda * lambda) * (k % 2 ? 1.0 : -1.0);
        sum += term;
        if (std::fabs(term) < 1e-16) break;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

KsResult ks_two_sample(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty())
        throw std::invalid_argument("ks_two_sample: empty sample");
    std::vector<double> sa(a.begin(), a.end()), sb(b.begin(), b.end());
    std::sort(sa.begin(), sa.end());
    std::sort(sb.begin(), sb.end());
    const std::size_t n = sa.size(), m = sb.size();
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < n && j < m) {
        const double x = std::min(sa[i], sb[j]);
        while (i < n && sa[i] <= x) ++i;
        while (j < m && sb[j] <= x) ++j;
        d = std::max(d, std::fabs(static_cast<double>(i) / n -
                                  static_cast<double>(j) / m));
    }
    d = std::max(d, std::fabs(static_cast<double>(i) / n -
                              static_cast<double>(j) / m));
    const double ne = static_cast<double>(n) * m / (n + m);
    return KsResult{d, kolmogorov_sf(std::sqrt(ne) * d)};
}

TTestResult welch_t(std::span<const double> a, std::span<const double> b) {
    if (a.size() < 2 || b.size() < 2)
        throw std::invalid_argument("welch_t: samples need >= 2 values");
    const double ma = mean_of(a), mb = mean_of(b);
    const double va = sample_variance(a, ma), vb = sample_variance(b, mb);
    const double na = static_cast<double>(a.size()),
                 nb = static_cast<double>(b.size());
    const double sea = va / na, seb = vb / nb;
    if (sea + seb == 0.0) {
        if (ma == mb) return TTestResult{0.0, na + nb - 2.0, 1.0};
        throw std::invalid_argument("welch_t: zero variance in both samples");
    }
    const double t = (ma - mb) / std::sqrt(sea + seb);
    const double df = (sea + seb) * (sea + seb) /
                      (sea * sea / (na - 1.0) + seb * seb / (nb - 1.0));
    return TTestResult{t, df, student_t_two_sided_p(t, df)};
}

BinomialCI wald_binomial_ci(long long successes, long long n, double level) {
    if (n < 1) throw std::invalid_argument("wald_binomial_ci: n must be >= 1");
    if (successes < 0 || successes > n)
        throw std::invalid_argument("wald_binomial_ci: successes out of range");
    const double p = static_cast<double>(successes) / n;
    const double z = norm_quantile(0.5 + 0.5 * level);
    const double half = z * std::sqrt(p * (1.0 - p) / n);
    return BinomialCI{p, std::max(0.0, p - half), std::min(1.0, p + half)};
}

double corrected_zero_rate(double observed_rate, double confirmation_rate) {
    if (observed_rate < 0.0 || observed_rate > 1.0 || confirmation_rate < 0.0 ||
        confirmation_rate > 1.0)
        throw std::invalid_argument("corrected_zero_rate: rates must be in [0,1]");
    return observed_rate * confirmation_rate;
}

EnsembleSummary ensemble_summaries(std::span<const Trajectory> trajs,
                                   const SummaryOptions& opts) {
    if (trajs.empty())
        throw std::invalid_argument("ensemble_summaries: empty ensemble");
    EnsembleSummary s;
    std::size_t max_len = 0;
    for (const auto& t : trajs) max_len = std::max(max_len, t.q.size());

    for (const auto& t : trajs) {
        if (t.q.empty()) throw std::invalid_argument("empty trajectory");
        // peak year, earliest on ties
        int peak = 0;
        double best = t.q[0];
        bool tied = false;
        int zeros = 0;
        double mean = 0.0;
        for (std::size_t i = 0; i < t.q.size(); ++i) {
            const double v = t.q[i];
            if (v > best) {
                best = v;
                peak = static_cast<int>(i);
                tied = false;
            } else if (v == best && i > 0) {
                tied = true;
            }
            if (v <= opts.zero_threshold) ++zeros;
            mean += v;
            s.annual_values.push_back(v);
        }
        mean /= t.q.size();
        double ss = 0.0;
        for (double v : t.q) ss += (v - mean) * (v - mean);
        s.within_career_sd.push_back(std::sqrt(ss / t.q.size()));
        s.peak_years.push_back(peak);
        if (tied) ++s.peak_year_ties;
        s.zeros_per_career[zeros] += 1;
        s.zero_years += zeros;
        s.person_years += static_cast<long long>(t.q.size());
        if (static_cast<int>(t.q.size()) > opts.cumulative_year) {
            double cum = 0.0;
            for (int i = 0; i <= opts.cumulative_year; ++i) cum += t.q[i];
            s.cumulative_at_year.push_back(cum);
        }
    }

    // per-year means with trajectory-level bootstrap CIs
    std::vector<std::vector<double>> by_year(max_len);
    for (const auto& t : trajs)
        for (std::size_t i = 0; i < t.q.size(); ++i)
            by_year[i].push_back(t.q[i]);

    std::vector<std::vector<double>> boot_means(
        opts.bootstrap_replicates, std::vector<double>(max_len, 0.0));
    std::vector<std::vector<int>> boot_counts(
        opts.bootstrap_replicates, std::vector<int>(max_len, 0));
    RngStream root(opts.seed);
    const std::size_t n = trajs.size();
    for (int r = 0; r < opts.bootstrap_replicates; ++r) {
        RngStream stream = root.split(r);
        auto& sums = boot_means[r];
        auto& counts = boot_counts[r];
        for (std::size_t i = 0; i < n; ++i) {
            const auto& t = trajs[stream.next_u64() % n];
            for (std::size_t y = 0; y < t.q.size(); ++y) {
                sums[y] += t.q[y];
                counts[y] += 1;
            }
        }
    }
    for (std::size_t y = 0; y < max_len; ++y) {
        YearMeanCI ym;
        ym.mean = mean_of(by_year[y]);
        std::vector<double> reps;
        reps.reserve(opts.bootstrap_replicates);
        for (int r = 0; r < opts.bootstrap_replicates; ++r)
            if (boot_counts[r][y] > 0)
                reps.push_back(boot_means[r][y] / boot_counts[r][y]);
        if (reps.size() >= 2) {
            std::sort(reps.begin(), reps.end());
            const auto quantile = [&](double p) {
                const double idx = p * (reps.size() - 1);
                const std::size_t lo = static_cast<std::size_t>(idx);
                const std::size_t hi = std::min(lo + 1, reps.size() - 1);
                return reps[lo] + (idx - lo) * (reps[hi] - reps[lo]);
            };
            ym.lo = quantile(0.025);
            ym.hi = quantile(0.975);
        } else {
            ym.lo = ym.hi = ym.mean;
        }
        s.per_year_mean.push_back(ym);
    }
    return s;
}

ComparisonReport compare_ensembles(std::span<const Trajectory> a,
                                   std::span<const Trajectory> b,
                                   const SummaryOptions& opts) {
    if (a.empty() || b.empty())
        throw std::invalid_argument("compare_ensembles: empty ensemble");
    ComparisonReport rep{ensemble_summaries(a, opts),
                         ensemble_summaries(b, opts),
                         {},
                         {},
                         {},
                         {},
                         {},
                         0.0};
    std::vector<double> peaks_a(rep.a.peak_years.begin(),
                                rep.a.peak_years.end());
    std::vector<double> peaks_b(rep.b.peak_years.begin(),
                                rep.b.peak_years.end());
    rep.peak_year_ks = ks_two_sample(peaks_a, peaks_b);
    rep.within_sd_ks = ks_two_sample(rep.a.within_career_sd,
                                     rep.b.within_career_sd);
    rep.cumulative_t = welch_t(rep.a.cumulative_at_year,
                               rep.b.cumulative_at_year);
    rep.zero_rate_a = wald_binomial_ci(rep.a.zero_years, rep.a.person_years);
    rep.zero_rate_b = wald_binomial_ci(rep.b.zero_years, rep.b.person_years);
    const std::size_t common = std::min(rep.a.per_year_mean.size(),
                                        rep.b.per_year_mean.size());
    for (std::size_t y = 0; y < common; ++y)
        rep.max_mean_abs_diff =
            std::max(rep.max_mean_abs_diff,
                     std::fabs(rep.a.per_year_mean[y].mean -
                               rep.b.per_year_mean[y].mean));
    return rep;
}

namespace {

nlohmann::ordered_json summary_json(const EnsembleSummary& s) {
    nlohmann::ordered_json j;
    auto means = nlohmann::ordered_json::array();
    for (const auto& m : s.per_year_mean)
        means.push_back({{"mean", m.mean}, {"lo", m.lo}, {"hi", m.hi}});
    j["per_year_mean"] = means;
    j["peak_year_ties"] = s.peak_year_ties;
    nlohmann::ordered_json zeros;
    for (const auto& [k, v] : s.zeros_per_career)
        zeros[std::to_string(k)] = v;
    j["zeros_per_career"] = zeros;
    j["zero_years"] = s.zero_years;
    j["person_years"] = s.person_years;
    return j;
}

}  // namespace

std::string comparison_to_json(const ComparisonReport& report) {
    nlohmann::ordered_json j;
    j["peak_year_ks"] = {{"statistic", report.peak_year_ks.statistic},
                         {"p", report.peak_year_ks.p_value}};
    j["within_sd_ks"] = {{"statistic", report.within_sd_ks.statistic},
                         {"p", report.within_sd_ks.p_value}};
    j["cumulative_t"] = {{"statistic", report.cumulative_t.statistic},
                         {"df", report.cumulative_t.df},
                         {"p", report.cumulative_t.p_value}};
    j["zero_rate_a"] = {{"rate", report.zero_rate_a.estimate},
                        {"lo", report.zero_rate_a.lo},
                        {"hi", report.zero_rate_a.hi}};
    j["zero_rate_b"] = {{"rate", report.zero_rate_b.estimate},
                        {"lo", report.zero_rate_b.lo},
                        {"hi", report.zero_rate_b.hi}};
    j["max_mean_abs_diff"] = report.max_mean_abs_diff;
    j["ensemble_a"] = summary_json(report.a);
    j["ensemble_b"] = summary_json(report.b);
    return j.dump(2) + "\n";
}

}  // namespace pw
