#include "prodwalk/model.hpp"

#include <algorithm>
#include <cstdio>
#include <stdexcept>

#include "json.hpp"

namespace pw {

void ChangePointSet::validate(int min_year, int max_year) const {
    if (points.size() > 3)
        throw std::invalid_argument("at most 3 change points are supported");
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (points[i] < min_year || points[i] > max_year)
            throw std::invalid_argument("change point out of range");
        if (i > 0 && points[i] <= points[i - 1])
            throw std::invalid_argument("change points must strictly increase");
    }
}

bool cps_less(const ChangePointSet& a, const ChangePointSet& b) {
    if (a.points.size() != b.points.size())
        return a.points.size() < b.points.size();
    return a.points < b.points;
}

int stage_of(int t, const ChangePointSet& cps) {
    if (t < 0) throw std::invalid_argument("career age must be >= 0");
    int idx = 0;
    for (int c : cps.points)
        if (c < t) ++idx;
    return idx;
}

void CareerModel::validate() const {
    change_points.validate();
    if (!(init.mean > 0.0))
        throw std::invalid_argument("lambda0 must be > 0");
    if (static_cast<int>(stages.size()) != change_points.stage_count())
        throw std::invalid_argument(
            "stage count must equal change point count + 1");
    for (const auto& s : stages)
        if (!(s.scale > 0.0))
            throw std::invalid_argument("stage scale must be > 0");
}

Trajectory simulate_trajectory(const CareerModel& model, int length,
                               RngStream rng) {
    model.validate();
    if (length < 1) throw std::invalid_argument("length must be >= 1");
    Trajectory traj;
    traj.q.reserve(length);
    double q = sample_initial(model.init, rng);
    traj.q.push_back(q);
    for (int t = 0; t + 1 < length; ++t) {
        const StageParams& sp = model.stages[stage_of(t, model.change_points)];
        LaplaceIncrement inc{sp.mode_rule.mode_at(q), sp.scale, model.boundary,
                             q};
        q = std::max(q + sample_increment(inc, rng), 0.0);
        traj.q.push_back(q);
    }
    return traj;
}

std::vector<Trajectory> simulate_ensemble(const CareerModel& model, int n,
                                          int length, std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("ensemble size must be >= 1");
    model.validate();
    RngStream root(seed);
    std::vector<Trajectory> out;
    out.reserve(n);
    for (int i = 0; i < n; ++i) {
        Trajectory t = simulate_trajectory(model, length, root.split(i));
        t.person_id = "sim" + std::to_string(i);
        out.push_back(std::move(t));
    }
    return out;
}

namespace {

std::string fmt_real(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

const char* boundary_name(BoundaryMode b) {
    return b == BoundaryMode::truncate ? "truncate" : "censor";
}

}  // namespace

std::string career_model_to_json(const CareerModel& model) {
    model.validate();
    std::string s = "{\n";
    s += "  \"lambda0\": " + fmt_real(model.init.mean) + ",\n";
    s += std::string("  \"boundary_mode\": \"") +
         boundary_name(model.boundary) + "\",\n";
    s += "  \"change_points\": [";
    for (std::size_t i = 0; i < model.change_points.points.size(); ++i) {
        if (i) s += ", ";
        s += std::to_string(model.change_points.points[i]);
    }
    s += "],\n  \"stages\": [\n";
    for (std::size_t i = 0; i < model.stages.size(); ++i) {
        const auto& st = model.stages[i];
        s += "    {\"alpha\": " + fmt_real(st.scale) +
             ", \"mode_rule\": {\"type\": \"" +
             (st.mode_rule.kind == LocationRule::Kind::fixed ? "fixed"
                                                             : "slope") +
             "\", \"value\": " + fmt_real(st.mode_rule.value) + "}}";
        if (i + 1 < model.stages.size()) s += ",";
        s += "\n";
    }
    s += "  ]\n}\n";
    return s;
}

CareerModel career_model_from_json(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    CareerModel m;
    m.init.mean = j.at("lambda0").get<double>();
    const std::string b = j.at("boundary_mode").get<std::string>();
    if (b == "truncate")
        m.boundary = BoundaryMode::truncate;
    else if (b == "censor")
        m.boundary = BoundaryMode::censor;
    else
        throw std::invalid_argument("unknown boundary_mode: " + b);
    for (const auto& c : j.at("change_points"))
        m.change_points.points.push_back(c.get<int>());
    for (const auto& st : j.at("stages")) {
        StageParams sp;
        sp.scale = st.at("alpha").get<double>();
        const auto& mr = st.at("mode_rule");
        const std::string type = mr.at("type").get<std::string>();
        const double value = mr.at("value").get<double>();
        if (type == "fixed")
            sp.mode_rule = LocationRule::fixed(value);
        else if (type == "slope")
            sp.mode_rule = LocationRule::slope(value);
        else
            throw std::invalid_argument("unknown mode_rule type: " + type);
        m.stages.push_back(sp);
    }
    m.validate();
    return m;
}

}  // namespace pw
