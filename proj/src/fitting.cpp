#include "prodwalk/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace pw {

std::vector<ChangePointSet> enumerate_change_point_sets(int min_year,
                                                        int max_year,
                                                        int max_points) {
    if (min_year > max_year)
        throw std::invalid_argument("enumerate_change_point_sets: bad range");
    if (max_points < 1 || max_points > 3)
        throw std::invalid_argument("max_points must be in [1, 3]");
    std::vector<ChangePointSet> out;
    for (int c1 = min_year; c1 <= max_year; ++c1)
        out.push_back({{c1}});
    if (max_points >= 2)
        for (int c1 = min_year; c1 <= max_year; ++c1)
            for (int c2 = c1 + 1; c2 <= max_year; ++c2)
                out.push_back({{c1, c2}});
    if (max_points >= 3)
        for (int c1 = min_year; c1 <= max_year; ++c1)
            for (int c2 = c1 + 1; c2 <= max_year; ++c2)
                for (int c3 = c2 + 1; c3 <= max_year; ++c3)
                    out.push_back({{c1, c2, c3}});
    return out;
}

namespace {

// Inclusive age interval [lo, hi] of the source index t for one stage.
struct StageInterval {
    int lo;
    int hi;  // clipped to the largest observed t
};

std::vector<StageInterval> stage_intervals(const ChangePointSet& cps,
                                           int max_t) {
    std::vector<StageInterval> out;
    int lo = 0;
    for (int c : cps.points) {
        out.push_back({lo, std::min(c, max_t)});
        lo = c + 1;
    }
    out.push_back({lo, max_t});
    return out;
}

std::vector<QDelta> pairs_in(std::span<const Trajectory> trajs, int lo,
                             int hi) {
    std::vector<QDelta> pairs;
    for (const auto& traj : trajs) {
        const int last_t = static_cast<int>(traj.q.size()) - 2;
        for (int t = std::max(lo, 0); t <= std::min(hi, last_t); ++t)
            pairs.push_back({traj.q[t], traj.q[t + 1] - traj.q[t]});
    }
    return pairs;
}

int max_pair_index(std::span<const Trajectory> trajs) {
    int m = -1;
    for (const auto& t : trajs)
        m = std::max(m, static_cast<int>(t.q.size()) - 2);
    return m;
}

}  // namespace

std::vector<StageData> build_stage_data(std::span<const Trajectory> trajs,
                                        const ChangePointSet& cps) {
    if (trajs.empty())
        throw std::invalid_argument("build_stage_data: no trajectories");
    cps.validate(1, std::numeric_limits<int>::max());
    const int max_t = max_pair_index(trajs);
    std::vector<StageData> out;
    int stage = 0;
    for (const auto& iv : stage_intervals(cps, max_t)) {
        StageData sd;
        sd.stage = stage++;
        sd.pairs = pairs_in(trajs, iv.lo, iv.hi);
        out.push_back(std::move(sd));
    }
    return out;
}

StageFit fit_stage(const StageData& data, double global_mode,
                   BoundaryMode boundary) {
    if (data.pairs.size() < 2)
        throw std::invalid_argument("fit_stage: need at least 2 pairs");
    const ScaleFit step1 =
        fit_scale_mle(data.pairs, LocationRule::fixed(global_mode), boundary);
    const double beta = fit_slope_mle(data.pairs, step1.alpha, boundary);
    const ScaleFit step3 =
        fit_scale_mle(data.pairs, LocationRule::slope(beta), boundary);
    return StageFit{{step3.alpha, LocationRule::slope(beta)},
                    step3.log_likelihood,
                    step3.degenerate};
}

FitResult fit_model(std::span<const Trajectory> trajs,
                    std::span<const ChangePointSet> candidates,
                    const FitOptions& opts) {
    if (trajs.empty()) throw std::invalid_argument("fit_model: no trajectories");
    if (candidates.empty())
        throw std::invalid_argument("fit_model: no candidates");

    std::vector<double> first_year;
    std::vector<double> deltas;
    for (const auto& t : trajs) {
        if (t.q.size() < 2)
            throw std::invalid_argument(
                "fit_model: trajectories must have length >= 2");
        first_year.push_back(t.q[0]);
        for (std::size_t i = 0; i + 1 < t.q.size(); ++i)
            deltas.push_back(t.q[i + 1] - t.q[i]);
    }
    const ExponentialInit init = fit_exponential(first_year);
    const double mu_g = estimate_mode(deltas);
    const int max_t = max_pair_index(trajs);

    // Candidates share stage segments, so fit each distinct age interval
    // once and assemble candidates from the cache.
    std::map<std::pair<int, int>, std::optional<StageFit>> cache;
    const auto interval_fit =
        [&](const StageInterval& iv) -> const std::optional<StageFit>& {
        auto [it, inserted] = cache.try_emplace({iv.lo, iv.hi});
        if (inserted) {
            StageData sd{0, pairs_in(trajs, iv.lo, iv.hi)};
            if (sd.pairs.size() >= 2)
                it->second = fit_stage(sd, mu_g, opts.likelihood_boundary);
        }
        return it->second;
    };

    FitResult result;
    result.global_mode = mu_g;
    result.candidates.reserve(candidates.size());
    const CandidateFit* best = nullptr;
    std::vector<StageParams> best_stages;
    for (const auto& cps : candidates) {
        CandidateFit cf{cps, 0.0, 0.0, true};
        std::vector<StageParams> stages;
        for (const auto& iv : stage_intervals(cps, max_t)) {
            const auto& sf = interval_fit(iv);
            if (!sf) {
                cf.valid = false;
                break;
            }
            cf.loglik += sf->log_likelihood;
            stages.push_back(sf->params);
        }
        if (cf.valid) {
            const int k =
                opts.params_per_stage * cps.stage_count() +
                (opts.count_change_points ? static_cast<int>(cps.points.size())
                                          : 0);
            cf.aic = 2.0 * k - 2.0 * cf.loglik;
        } else {
            cf.loglik = -std::numeric_limits<double>::infinity();
            cf.aic = std::numeric_limits<double>::infinity();
        }
        result.candidates.push_back(cf);
        const CandidateFit& stored = result.candidates.back();
        if (stored.valid &&
            (!best || stored.aic < best->aic ||
             (stored.aic == best->aic && cps_less(stored.cps, best->cps)))) {
            best = &stored;
            best_stages = std::move(stages);
        }
    }
    if (!best)
        throw std::runtime_error("fit_model: every candidate was degenerate");
    result.best_model = CareerModel{init, best->cps, std::move(best_stages),
                                    opts.model_boundary};
    return result;
}

BootstrapSummary bootstrap_fit(std::span<const Trajectory> trajs,
                               int replicates, std::uint64_t seed,
                               std::span<const ChangePointSet> candidates,
                               const FitOptions& opts) {
    if (replicates < 1)
        throw std::invalid_argument("bootstrap_fit: replicates must be >= 1");
    const std::size_t n = trajs.size();
    BootstrapSummary bs;
    bs.replicates = replicates;
    RngStream root(seed);
    std::map<std::vector<int>, int> counts;
    for (int r = 0; r < replicates; ++r) {
        RngStream stream = root.split(r);
        std::vector<Trajectory> sample;
        sample.reserve(n);
        for (std::size_t i = 0; i < n; ++i)
            sample.push_back(trajs[stream.next_u64() % n]);
        try {
            FitResult fit = fit_model(sample, candidates, opts);
            counts[fit.best_model.change_points.points] += 1;
            bs.models.push_back(std::move(fit.best_model));
        } catch (const std::exception&) {
            ++bs.failures;
        }
    }
    const int successes = replicates - bs.failures;
    for (const auto& [points, c] : counts)
        bs.frequencies.push_back(
            {ChangePointSet{points}, static_cast<double>(c) / successes});
    std::sort(bs.frequencies.begin(), bs.frequencies.end(),
              [](const auto& a, const auto& b) {
                  if (a.second != b.second) return a.second > b.second;
                  return cps_less(a.first, b.first);
              });
    return bs;
}

namespace {

std::string cps_label(const ChangePointSet& cps) {
    std::string s;
    for (std::size_t i = 0; i < cps.points.size(); ++i) {
        if (i) s += ";";
        s += std::to_string(cps.points[i]);
    }
    return s;
}

}  // namespace

std::string fit_result_to_json(const FitResult& fit) {
    nlohmann::ordered_json j;
    j["best_model"] = nlohmann::ordered_json::parse(
        career_model_to_json(fit.best_model));
    j["global_mode"] = fit.global_mode;
    auto cands = nlohmann::ordered_json::array();
    for (const auto& c : fit.candidates) {
        nlohmann::ordered_json jc;
        jc["change_points"] = c.cps.points;
        jc["loglik"] = c.valid ? nlohmann::ordered_json(c.loglik)
                               : nlohmann::ordered_json(nullptr);
        jc["aic"] = c.valid ? nlohmann::ordered_json(c.aic)
                            : nlohmann::ordered_json(nullptr);
        jc["valid"] = c.valid;
        cands.push_back(jc);
    }
    j["candidates"] = cands;
    return j.dump(2) + "\n";
}

std::string candidates_to_csv(const FitResult& fit) {
    std::vector<const CandidateFit*> order;
    for (const auto& c : fit.candidates) order.push_back(&c);
    std::stable_sort(order.begin(), order.end(), [](auto* a, auto* b) {
        if (a->aic != b->aic) return a->aic < b->aic;
        return cps_less(a->cps, b->cps);
    });
    std::ostringstream os;
    os << "change_points,loglik,aic,rank\n";
    os.precision(17);
    int rank = 1;
    for (const auto* c : order) {
        os << cps_label(c->cps) << ",";
        if (c->valid)
            os << c->loglik << "," << c->aic;
        else
            os << ",";
        os << "," << rank++ << "\n";
    }
    return os.str();
}

std::string bootstrap_to_json(const BootstrapSummary& bs) {
    nlohmann::ordered_json j;
    j["replicates"] = bs.replicates;
    j["failures"] = bs.failures;
    auto freqs = nlohmann::ordered_json::array();
    for (const auto& [cps, f] : bs.frequencies) {
        nlohmann::ordered_json jf;
        jf["change_points"] = cps.points;
        jf["fraction"] = f;
        freqs.push_back(jf);
    }
    j["change_point_frequencies"] = freqs;
    auto models = nlohmann::ordered_json::array();
    for (const auto& m : bs.models)
        models.push_back(nlohmann::ordered_json::parse(career_model_to_json(m)));
    j["models"] = models;
    return j.dump(2) + "\n";
}

std::string bootstrap_frequencies_to_csv(const BootstrapSummary& bs) {
    std::ostringstream os;
    os << "change_points,fraction\n";
    os.precision(17);
    for (const auto& [cps, f] : bs.frequencies)
        os << cps_label(cps) << "," << f << "\n";
    return os.str();
}

}  // namespace pw
