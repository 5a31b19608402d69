#include "prodwalk/classify.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "prodwalk/stats.hpp"

namespace pw {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kVarianceFloor = 1e-12;  // keeps noiseless fits finite

double gaussian_profile_loglik(double rss, int n) {
    const double sigma2 = std::max(rss / n, kVarianceFloor);
    return -0.5 * n * (std::log(2.0 * kPi * sigma2) + 1.0);
}

double aicc(double loglik, int k, int n) {
    const double aic = 2.0 * k - 2.0 * loglik;
    return aic + 2.0 * k * (k + 1.0) / (n - k - 1.0);
}

struct LsFit {
    Eigen::VectorXd coef;
    double rss;
};

LsFit least_squares(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
    LsFit fit;
    fit.coef = X.colPivHouseholderQr().solve(y);
    fit.rss = (y - X * fit.coef).squaredNorm();
    return fit;
}

}  // namespace

CanonicalVerdict classify_canonical(const Trajectory& traj, int breakpoint_min,
                                    int breakpoint_max) {
    const int n = static_cast<int>(traj.q.size());
    if (n < breakpoint_max + 2)
        throw std::invalid_argument(
            "classify_canonical: trajectory too short for breakpoint range");
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) y[i] = traj.q[i];

    // linear: q ~ a + s*t   (k = 3 with the profiled variance)
    Eigen::MatrixXd Xl(n, 2);
    for (int i = 0; i < n; ++i) {
        Xl(i, 0) = 1.0;
        Xl(i, 1) = i;
    }
    const LsFit linear = least_squares(Xl, y);
    const double aicc_linear = aicc(gaussian_profile_loglik(linear.rss, n), 3, n);

    // hinge, continuous at b: q ~ a + s1*min(t,b) + s2*max(t-b,0)  (k = 4)
    double best_aicc = std::numeric_limits<double>::infinity();
    int best_b = -1;
    double best_s1 = 0.0, best_s2 = 0.0;
    for (int b = breakpoint_min; b <= breakpoint_max; ++b) {
        Eigen::MatrixXd Xp(n, 3);
        for (int i = 0; i < n; ++i) {
            Xp(i, 0) = 1.0;
            Xp(i, 1) = std::min(i, b);
            Xp(i, 2) = std::max(i - b, 0);
        }
        const LsFit hinge = least_squares(Xp, y);
        const double a = aicc(gaussian_profile_loglik(hinge.rss, n), 4, n);
        if (a < best_aicc) {
            best_aicc = a;
            best_b = b;
            best_s1 = hinge.coef[1];
            best_s2 = hinge.coef[2];
        }
    }

    CanonicalVerdict v;
    v.aicc_linear = aicc_linear;
    v.aicc_piecewise = best_aicc;
    v.piecewise = best_aicc < aicc_linear;
    if (v.piecewise) {
        v.breakpoint = best_b;
        v.slope1 = best_s1;
        v.slope2 = best_s2;
        v.is_canonical = best_s1 > 0.0 && best_s2 < 0.0 &&
                         std::fabs(best_s1) >= 2.0 * std::fabs(best_s2);
    } else {
        v.slope1 = linear.coef[1];
    }
    return v;
}

FractionCI canonical_fraction(std::span<const Trajectory> ensemble) {
    if (ensemble.empty())
        throw std::invalid_argument("canonical_fraction: empty ensemble");
    int canonical = 0;
    for (const auto& t : ensemble)
        if (classify_canonical(t).is_canonical) ++canonical;
    const auto ci =
        wald_binomial_ci(canonical, static_cast<int>(ensemble.size()));
    return FractionCI{ci.estimate, ci.lo, ci.hi};
}

CareerModel simplified_model(double alpha1, double alpha2,
                             const SweepOptions& opts) {
    CareerModel m;
    m.init = ExponentialInit{opts.lambda0};
    m.change_points = ChangePointSet{{opts.change_year - 1}};
    m.stages = {StageParams{alpha1, LocationRule::fixed(opts.mu)},
                StageParams{alpha2, LocationRule::fixed(opts.mu)}};
    m.boundary = opts.boundary;
    return m;
}

SweepGrid sweep_variances(std::span<const double> alpha1_values,
                          std::span<const double> alpha2_values,
                          const SweepOptions& opts, std::uint64_t seed) {
    if (alpha1_values.empty() || alpha2_values.empty())
        throw std::invalid_argument("sweep_variances: empty grid");
    for (double a : alpha1_values)
        if (!(a > 0.0)) throw std::invalid_argument("alpha grid must be > 0");
    for (double a : alpha2_values)
        if (!(a > 0.0)) throw std::invalid_argument("alpha grid must be > 0");
    SweepGrid grid;
    grid.alpha1_values.assign(alpha1_values.begin(), alpha1_values.end());
    grid.alpha2_values.assign(alpha2_values.begin(), alpha2_values.end());
    RngStream root(seed);
    std::uint64_t cell = 0;
    for (double a1 : alpha1_values) {
        for (double a2 : alpha2_values) {
            const CareerModel m = simplified_model(a1, a2, opts);
            RngStream cell_stream = root.split(cell++);
            std::vector<Trajectory> ens;
            ens.reserve(opts.n_per_cell);
            for (int i = 0; i < opts.n_per_cell; ++i)
                ens.push_back(
                    simulate_trajectory(m, opts.length, cell_stream.split(i)));
            const FractionCI f = canonical_fraction(ens);
            grid.cells.push_back(
                {a1, a2, opts.n_per_cell, f.fraction, f.lo, f.hi});
        }
    }
    return grid;
}

std::string sweep_to_csv(const SweepGrid& grid) {
    std::ostringstream os;
    os << "alpha1,alpha2,n,fraction_canonical,ci_lo,ci_hi\n";
    os.precision(17);
    for (const auto& c : grid.cells)
        os << c.alpha1 << "," << c.alpha2 << "," << c.n << "," << c.fraction
           << "," << c.ci_lo << "," << c.ci_hi << "\n";
    return os.str();
}

std::string verdicts_to_csv(std::span<const Trajectory> trajs,
                            std::span<const CanonicalVerdict> verdicts) {
    if (trajs.size() != verdicts.size())
        throw std::invalid_argument("verdicts_to_csv: size mismatch");
    std::ostringstream os;
    os << "person_id,is_canonical,model,breakpoint,slope1,slope2\n";
    os.precision(17);
    for (std::size_t i = 0; i < trajs.size(); ++i) {
        const auto& v = verdicts[i];
        os << trajs[i].person_id << "," << (v.is_canonical ? 1 : 0) << ","
           << (v.piecewise ? "piecewise" : "linear") << ",";
        if (v.piecewise)
            os << v.breakpoint;
        os << "," << v.slope1 << ",";
        if (v.slope2)
            os << *v.slope2;
        os << "\n";
    }
    return os.str();
}

}  // namespace pw
