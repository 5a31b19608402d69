#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "oracles.hpp"
#include "prodwalk/stats.hpp"

using namespace pw;

TEST_CASE("two-sample KS handles identical and disjoint samples") {
    const std::vector<double> a{1.0, 2.0, 3.0, 4.0};
    const KsResult same = ks_two_sample(a, a);
    CHECK(same.statistic == 0.0);
    CHECK(same.p_value == doctest::Approx(1.0));

    const std::vector<double> lo{1.0, 2.0, 3.0};
    const std::vector<double> hi{10.0, 11.0, 12.0, 13.0};
    const KsResult far = ks_two_sample(lo, hi);
    CHECK(far.statistic == doctest::Approx(1.0));
    CHECK(far.p_value < 0.1);
}

TEST_CASE("KS statistic matches a brute-force ECDF scan on random input") {
    std::mt19937 urbg(1234);
    std::normal_distribution<double> gauss;
    std::exponential_distribution<double> expo(0.7);
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 2 + static_cast<int>(urbg() % 40);
        const int m = 2 + static_cast<int>(urbg() % 40);
        std::vector<double> a(n), b(m);
        for (double& x : a) x = gauss(urbg);
        for (double& x : b) x = (trial % 2) ? expo(urbg) : gauss(urbg);
        // Duplicate some values across samples to exercise tie handling.
        if (trial % 5 == 0 && m > 3) b[0] = a[0], b[1] = a[1 % n];
        const KsResult r = ks_two_sample(a, b);
        const double d = oracle::ks_two_sample_bruteforce(a, b);
        CHECK(r.statistic == doctest::Approx(d).epsilon(1e-12));
    }
}

TEST_CASE("Kolmogorov survival function matches its defining series") {
    // Independent evaluation of Q(lambda) = 2 sum (-1)^{k-1} exp(-2k^2 l^2).
    for (double lambda : {0.3, 0.5, 0.8, 1.0, 1.36, 2.0, 3.0}) {
        double q = 0.0;
        for (int k = 1; k <= 200; ++k)
            q += 2.0 * ((k % 2) ? 1.0 : -1.0) *
                 std::exp(-2.0 * k * k * lambda * lambda);
        CHECK(kolmogorov_sf(lambda) ==
              doctest::Approx(std::clamp(q, 0.0, 1.0)).epsilon(1e-9));
    }
    CHECK(kolmogorov_sf(1.36) == doctest::Approx(0.05).epsilon(2e-2));
    CHECK(kolmogorov_sf(0.0) == doctest::Approx(1.0));
}

TEST_CASE("Welch t reproduces a hand-computed example and is antisymmetric") {
    // a: mean 10, s^2 = 4, n = 4; b: mean 14, s^2 = 4, n = 4
    // t = (10-14)/sqrt(1+1) = -2.828..., df = 6.
    const std::vector<double> a{8.0, 10.0, 10.0, 12.0};
    const std::vector<double> b{12.0, 14.0, 14.0, 16.0};
    const TTestResult r = welch_t(a, b);
    const double sa2 = 8.0 / 3.0, sb2 = 8.0 / 3.0;
    const double se = std::sqrt(sa2 / 4 + sb2 / 4);
    CHECK(r.statistic == doctest::Approx(-4.0 / se).epsilon(1e-12));
    CHECK(r.df == doctest::Approx(6.0).epsilon(1e-12));
    CHECK(r.p_value > 0.0);
    CHECK(r.p_value < 0.05);

    const TTestResult rev = welch_t(b, a);
    CHECK(rev.statistic == doctest::Approx(-r.statistic));
    CHECK(rev.p_value == doctest::Approx(r.p_value));

    // Identical samples: t = 0, p = 1 even with zero variance.
    const std::vector<double> c{5.0, 5.0, 5.0};
    const TTestResult same = welch_t(c, c);
    CHECK(same.statistic == 0.0);
    CHECK(same.p_value == doctest::Approx(1.0));
}

TEST_CASE("Welch p-value matches the t CDF via numerical integration") {
    const std::vector<double> a{1.1, 2.3, 0.4, 1.8, 2.9, 0.7};
    const std::vector<double> b{2.0, 3.1, 2.8, 3.9};
    const TTestResult r = welch_t(a, b);
    // Two-sided p = 2 * P(T_df > |t|), integrate the t density.
    const double v = r.df;
    const auto density = [v](double x) {
        return std::pow(1.0 + x * x / v, -(v + 1.0) / 2.0);
    };
    const double norm = oracle::integrate(density, -60.0, 60.0, 1e-10);
    const double tail =
        oracle::integrate(density, std::fabs(r.statistic), 60.0, 1e-10);
    CHECK(r.p_value == doctest::Approx(2.0 * tail / norm).epsilon(1e-6));
}

TEST_CASE("Wald binomial interval matches published arithmetic") {
    // 82 of 108: 75.9% with 95% CI (67.9%, 84.0%).
    const BinomialCI ci = wald_binomial_ci(82, 108);
    CHECK(ci.estimate == doctest::Approx(82.0 / 108.0));
    CHECK(ci.lo == doctest::Approx(0.679).epsilon(2e-3));
    CHECK(ci.hi == doctest::Approx(0.840).epsilon(2e-3));

    const BinomialCI zero = wald_binomial_ci(0, 10);
    CHECK(zero.estimate == 0.0);
    CHECK(zero.lo == 0.0);  // clamped to [0, 1]

    const BinomialCI half = wald_binomial_ci(50, 100);
    CHECK(half.estimate == 0.5);
    CHECK(half.lo == doctest::Approx(0.5 - 1.959964 * 0.05).epsilon(1e-4));
    CHECK(half.hi == doctest::Approx(0.5 + 1.959964 * 0.05).epsilon(1e-4));

    CHECK_THROWS_AS(wald_binomial_ci(5, 0), std::invalid_argument);
    CHECK_THROWS_AS(wald_binomial_ci(11, 10), std::invalid_argument);
}

TEST_CASE("corrected zero rate multiplies observed and confirmed rates") {
    // 14.1% observed, 75.9% confirmed on manual check: 9.5% corrected.
    CHECK(corrected_zero_rate(0.141, 0.679) ==
          doctest::Approx(0.0957).epsilon(1e-3));
    CHECK(corrected_zero_rate(0.0, 0.5) == 0.0);
    CHECK(corrected_zero_rate(0.2, 1.0) == doctest::Approx(0.2));
    CHECK_THROWS_AS(corrected_zero_rate(-0.1, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(corrected_zero_rate(0.5, 1.5), std::invalid_argument);
}

TEST_CASE("ensemble summaries compute per-trajectory statistics correctly") {
    std::vector<Trajectory> trajs{
        Trajectory{"a", {0.0, 3.0, 0.0, 5.0}},
        Trajectory{"b", {2.0, 2.0, 2.0, 2.0}},
    };
    SummaryOptions opts;
    opts.cumulative_year = 3;
    opts.bootstrap_replicates = 200;
    const EnsembleSummary s = ensemble_summaries(trajs, opts);

    CHECK(s.person_years == 8);
    CHECK(s.zero_years == 2);
    CHECK(s.zeros_per_career.at(2) == 1);  // trajectory a
    CHECK(s.zeros_per_career.at(0) == 1);  // trajectory b
    REQUIRE(s.peak_years.size() == 2);
    CHECK(s.peak_years[0] == 3);  // max 5.0 at age 3
    CHECK(s.peak_years[1] == 0);  // constant: earliest tie
    CHECK(s.peak_year_ties == 1);
    REQUIRE(s.cumulative_at_year.size() == 2);
    CHECK(s.cumulative_at_year[0] == doctest::Approx(8.0));
    CHECK(s.cumulative_at_year[1] == doctest::Approx(8.0));
    REQUIRE(s.within_career_sd.size() == 2);
    // population SD of {0,3,0,5}: mean 2, var (4+1+4+9)/4 = 4.5
    CHECK(s.within_career_sd[0] == doctest::Approx(std::sqrt(4.5)));
    CHECK(s.within_career_sd[1] == 0.0);
    REQUIRE(s.per_year_mean.size() == 4);
    CHECK(s.per_year_mean[0].mean == doctest::Approx(1.0));
    CHECK(s.per_year_mean[3].mean == doctest::Approx(3.5));
    for (const auto& ym : s.per_year_mean) {
        CHECK(ym.lo <= ym.mean);
        CHECK(ym.mean <= ym.hi);
    }
    CHECK(s.annual_values.size() == 8);

    // Zero-rate identity: zero_years / person_years equals the pooled count.
    long long direct = 0;
    for (const auto& t : trajs)
        direct += std::count(t.q.begin(), t.q.end(), 0.0);
    CHECK(s.zero_years == direct);
}

TEST_CASE("summary means are invariant to trajectory order") {
    std::mt19937 urbg(7);
    std::vector<Trajectory> trajs;
    for (int i = 0; i < 30; ++i) {
        Trajectory t;
        t.person_id = "p" + std::to_string(i);
        for (int y = 0; y < 10; ++y)
            t.q.push_back(static_cast<double>(urbg() % 7));
        trajs.push_back(t);
    }
    SummaryOptions opts;
    opts.bootstrap_replicates = 50;
    const EnsembleSummary before = ensemble_summaries(trajs, opts);
    auto shuffled = trajs;
    std::shuffle(shuffled.begin(), shuffled.end(), urbg);
    const EnsembleSummary after = ensemble_summaries(shuffled, opts);
    for (std::size_t y = 0; y < before.per_year_mean.size(); ++y)
        CHECK(before.per_year_mean[y].mean ==
              doctest::Approx(after.per_year_mean[y].mean).epsilon(1e-12));
    CHECK(before.zero_years == after.zero_years);
    CHECK(before.peak_year_ties == after.peak_year_ties);
}

TEST_CASE("bootstrap per-year CIs achieve near-nominal coverage") {
    // Gaussian ensembles with known mean 5: the 95% CI for the year mean
    // should cover 5 in roughly 95% of repetitions.
    std::mt19937 urbg(99);
    std::normal_distribution<double> gauss(5.0, 2.0);
    int covered = 0;
    const int reps = 400;
    for (int rep = 0; rep < reps; ++rep) {
        std::vector<Trajectory> trajs;
        for (int i = 0; i < 40; ++i) {
            Trajectory t;
            t.q.push_back(gauss(urbg));
            trajs.push_back(t);
        }
        SummaryOptions opts;
        opts.bootstrap_replicates = 300;
        opts.seed = rep;
        const EnsembleSummary s = ensemble_summaries(trajs, opts);
        if (s.per_year_mean[0].lo <= 5.0 && 5.0 <= s.per_year_mean[0].hi)
            ++covered;
    }
    const double coverage = static_cast<double>(covered) / reps;
    CHECK(coverage > 0.90);
    CHECK(coverage <= 0.99);
}

TEST_CASE("comparing an ensemble against itself finds no differences") {
    CareerModel m;
    m.init = {4.65};
    m.change_points = {{}};
    m.stages = {StageParams{3.0, LocationRule::slope(0.0)}};
    m.boundary = BoundaryMode::censor;
    const auto ens = simulate_ensemble(m, 200, kFullTrajectoryLength, 1);

    SummaryOptions opts;
    opts.bootstrap_replicates = 100;
    const ComparisonReport r = compare_ensembles(ens, ens, opts);
    CHECK(r.peak_year_ks.statistic == 0.0);
    CHECK(r.within_sd_ks.statistic == 0.0);
    CHECK(r.cumulative_t.statistic == 0.0);
    CHECK(r.cumulative_t.p_value == doctest::Approx(1.0));
    CHECK(r.max_mean_abs_diff == 0.0);
    CHECK(r.zero_rate_a.estimate == r.zero_rate_b.estimate);

    const auto j = nlohmann::json::parse(comparison_to_json(r));
    CHECK(j["peak_year_ks"]["statistic"].is_number());
    CHECK(j["cumulative_t"]["p"].get<double>() == doctest::Approx(1.0));
    CHECK(j["max_mean_abs_diff"] == 0.0);
}

TEST_CASE("comparison distinguishes same-model from different-model draws") {
    CareerModel m;
    m.init = {4.65};
    m.change_points = {{}};
    m.stages = {StageParams{3.0, LocationRule::slope(0.0)}};
    m.boundary = BoundaryMode::censor;
    CareerModel shifted = m;
    shifted.stages[0].scale = 6.0;

    const auto a = simulate_ensemble(m, 800, kFullTrajectoryLength, 10);
    const auto b = simulate_ensemble(m, 800, kFullTrajectoryLength, 11);
    const auto c = simulate_ensemble(shifted, 800, kFullTrajectoryLength, 12);

    SummaryOptions opts;
    opts.bootstrap_replicates = 100;
    const ComparisonReport same = compare_ensembles(a, b, opts);
    const ComparisonReport diff = compare_ensembles(a, c, opts);
    // Same model: within-career SD distributions agree.
    CHECK(same.within_sd_ks.p_value > 0.01);
    // Different scale: the SD distributions separate decisively.
    CHECK(diff.within_sd_ks.p_value < 1e-6);
    CHECK(diff.within_sd_ks.statistic > same.within_sd_ks.statistic);
    CHECK(diff.max_mean_abs_diff > same.max_mean_abs_diff);
}
