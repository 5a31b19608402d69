#include "prodwalk/data.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace pw {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur += ch;
        }
    }
    fields.push_back(cur);
    return fields;
}

[[noreturn]] void line_error(const std::string& path, std::size_t line_no,
                             const std::string& what) {
    throw std::invalid_argument(path + ":" + std::to_string(line_no) + ": " +
                             what);
}

double parse_real(const std::string& s, const std::string& path,
                  std::size_t line_no) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        line_error(path, line_no, "malformed number '" + s + "'");
    }
}

int parse_int(const std::string& s, const std::string& path,
              std::size_t line_no) {
    int v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        line_error(path, line_no, "malformed integer '" + s + "'");
    return v;
}

std::ifstream open_or_throw(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open " + path);
    return in;
}

}  // namespace

std::vector<Trajectory> load_trajectories(const std::string& path) {
    std::ifstream in = open_or_throw(path);
    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(in, line))
        throw std::invalid_argument(path + ": empty file");
    ++line_no;
    if (split_csv_line(line) !=
        std::vector<std::string>{"person_id", "career_year", "q"})
        throw std::invalid_argument(path + ": expected header person_id,career_year,q");

    std::vector<std::string> order;
    std::map<std::string, std::map<int, double>> by_person;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto f = split_csv_line(line);
        if (f.size() != 3) line_error(path, line_no, "expected 3 fields");
        const int year = parse_int(f[1], path, line_no);
        const double q = parse_real(f[2], path, line_no);
        if (year < 0) line_error(path, line_no, "negative career_year");
        if (q < 0.0) line_error(path, line_no, "negative q");
        auto [it, fresh] = by_person.try_emplace(f[0]);
        if (fresh) order.push_back(f[0]);
        if (!it->second.emplace(year, q).second)
            line_error(path, line_no,
                       "duplicate (person, year) for " + f[0] + ", year " +
                           f[1]);
    }

    std::vector<Trajectory> out;
    for (const auto& id : order) {
        const auto& years = by_person[id];
        Trajectory t;
        t.person_id = id;
        const int last = years.rbegin()->first;
        t.q.assign(last + 1, 0.0);  // interior gaps are explicit zeros
        for (const auto& [year, q] : years) t.q[year] = q;
        out.push_back(std::move(t));
    }
    return out;
}

std::string trajectories_to_csv(std::span<const Trajectory> trajs) {
    std::ostringstream os;
    os.precision(17);
    os << "person_id,career_year,q\n";
    for (const auto& t : trajs)
        for (std::size_t y = 0; y < t.q.size(); ++y)
            os << t.person_id << "," << y << "," << t.q[y] << "\n";
    return os.str();
}

void save_trajectories(std::span<const Trajectory> trajs,
                       const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << trajectories_to_csv(trajs);
}

PublicationTable load_publications(const std::string& path) {
    std::ifstream in = open_or_throw(path);
    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(in, line))
        throw std::invalid_argument(path + ": empty file");
    ++line_no;
    if (split_csv_line(line) !=
        std::vector<std::string>{"person_id", "calendar_year", "career_age",
                                 "count"})
        throw std::invalid_argument(
            path + ": expected header person_id,calendar_year,career_age,count");
    PublicationTable table;
    std::set<std::pair<std::string, int>> seen;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto f = split_csv_line(line);
        if (f.size() != 4) line_error(path, line_no, "expected 4 fields");
        PublicationRow row;
        row.person_id = f[0];
        row.calendar_year = parse_int(f[1], path, line_no);
        row.career_age = parse_int(f[2], path, line_no);
        row.count = parse_real(f[3], path, line_no);
        if (row.career_age < 0) line_error(path, line_no, "negative career_age");
        if (row.count < 0.0) line_error(path, line_no, "negative count");
        if (!seen.emplace(row.person_id, row.career_age).second)
            line_error(path, line_no, "duplicate (person, career_age)");
        table.rows.push_back(std::move(row));
    }
    return table;
}

AdjustmentTable load_adjustment(const std::string& path) {
    std::ifstream in = open_or_throw(path);
    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(in, line))
        throw std::invalid_argument(path + ": empty file");
    ++line_no;
    const auto header = split_csv_line(line);
    const bool has_offset =
        header == std::vector<std::string>{"year", "multiplier", "offset"};
    if (!has_offset &&
        header != std::vector<std::string>{"year", "multiplier"})
        throw std::invalid_argument(path +
                                 ": expected header year,multiplier[,offset]");
    AdjustmentTable table;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto f = split_csv_line(line);
        if (f.size() != header.size())
            line_error(path, line_no, "field count mismatch");
        const int year = parse_int(f[0], path, line_no);
        AdjustmentEntry e;
        e.multiplier = parse_real(f[1], path, line_no);
        if (!(e.multiplier > 0.0))
            line_error(path, line_no, "multiplier must be > 0");
        if (has_offset) e.offset = parse_real(f[2], path, line_no);
        if (!table.by_year.emplace(year, e).second)
            line_error(path, line_no, "duplicate year");
    }
    return table;
}

std::vector<CohortTrajectory> apply_adjustment(const PublicationTable& pubs,
                                               const AdjustmentTable& adj) {
    std::vector<std::string> order;
    std::map<std::string, std::map<int, const PublicationRow*>> by_person;
    for (const auto& row : pubs.rows) {
        auto [it, fresh] = by_person.try_emplace(row.person_id);
        if (fresh) order.push_back(row.person_id);
        it->second[row.career_age] = &row;
    }
    std::vector<CohortTrajectory> out;
    for (const auto& id : order) {
        const auto& ages = by_person[id];
        CohortTrajectory ct;
        ct.traj.person_id = id;
        const int last = ages.rbegin()->first;
        ct.traj.q.assign(last + 1, 0.0);
        ct.raw_counts.assign(last + 1, 0.0);
        const int age0 = ages.begin()->first;
        const int cal0 = ages.begin()->second->calendar_year - age0;
        ct.start_year = cal0;
        for (int age = 0; age <= last; ++age) {
            const auto it = ages.find(age);
            const double count = it != ages.end() ? it->second->count : 0.0;
            const int year =
                it != ages.end() ? it->second->calendar_year : cal0 + age;
            const auto aj = adj.by_year.find(year);
            if (aj == adj.by_year.end())
                throw std::invalid_argument("adjustment table is missing year " +
                                         std::to_string(year));
            ct.raw_counts[age] = count;
            ct.traj.q[age] =
                count == 0.0
                    ? 0.0
                    : count * aj->second.multiplier + aj->second.offset;
            if (ct.traj.q[age] < 0.0)
                throw std::invalid_argument(
                    "adjustment produced a negative productivity");
        }
        out.push_back(std::move(ct));
    }
    return out;
}

FilterResult filter_inclusion(std::span<const CohortTrajectory> trajs,
                              const FilterOptions& opts) {
    FilterResult res;
    for (const auto& ct : trajs) {
        if (ct.start_year && *ct.start_year < opts.min_start_year) continue;
        double early = 0.0;
        const std::vector<double>& check =
            (!opts.early_check_on_adjusted && !ct.raw_counts.empty())
                ? ct.raw_counts
                : ct.traj.q;
        for (int age = 0;
             age < opts.early_window && age < static_cast<int>(check.size());
             ++age)
            early += check[age];
        if (early < opts.min_early_pubs) continue;
        Trajectory trimmed = ct.traj;
        const bool full =
            static_cast<int>(trimmed.q.size()) >= opts.span;
        if (full) trimmed.q.resize(opts.span);
        res.included.push_back(trimmed);
        if (full) res.full_trajectories.push_back(std::move(trimmed));
    }
    return res;
}

FilterResult filter_inclusion(std::span<const Trajectory> trajs,
                              const FilterOptions& opts) {
    std::vector<CohortTrajectory> cohort;
    cohort.reserve(trajs.size());
    for (const auto& t : trajs) cohort.push_back({t, {}, std::nullopt});
    return filter_inclusion(cohort, opts);
}

}  // namespace pw
