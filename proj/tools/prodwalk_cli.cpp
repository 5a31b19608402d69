// prodwalk: batch front end for the productivity random-walk toolkit.
//
// Subcommands: ingest, fit, bootstrap, simulate, sweep, classify, compare.
// All randomness derives from the --seed flag; identical inputs and seeds
// produce byte-identical artifact files.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "prodwalk/classify.hpp"
#include "prodwalk/data.hpp"
#include "prodwalk/fitting.hpp"
#include "prodwalk/model.hpp"
#include "prodwalk/stats.hpp"

namespace {

namespace fs = std::filesystem;

void write_atomic(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + tmp);
        out << content;
    }
    fs::rename(tmp, path);
}

void check_no_overwrite(const std::vector<std::string>& inputs,
                        const std::vector<std::string>& outputs) {
    for (const auto& in : inputs)
        for (const auto& out : outputs)
            if (!in.empty() && !out.empty() &&
                fs::weakly_canonical(in) == fs::weakly_canonical(out))
                throw std::invalid_argument("output " + out +
                                            " would overwrite input " + in);
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

std::vector<double> parse_grid(const std::string& spec) {
    // start:stop:step, inclusive of stop up to rounding
    double start, stop, step;
    if (std::sscanf(spec.c_str(), "%lf:%lf:%lf", &start, &stop, &step) != 3 ||
        step <= 0.0)
        throw std::invalid_argument("bad grid spec '" + spec +
                                    "', expected start:stop:step");
    std::vector<double> out;
    for (double v = start; v <= stop + 1e-9 * step; v += step)
        out.push_back(v);
    return out;
}

pw::BoundaryMode parse_boundary(const std::string& s) {
    if (s == "truncate") return pw::BoundaryMode::truncate;
    if (s == "censor") return pw::BoundaryMode::censor;
    throw std::invalid_argument("boundary must be 'truncate' or 'censor'");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"productivity random-walk toolkit"};
    app.require_subcommand(1);

    std::string input, input_b, model_path, out, candidates_out, full_out;
    std::string pubs_path, adjust_path;
    std::string boundary = "censor";
    std::string alpha1_spec, alpha2_spec;
    std::uint64_t seed = 0;
    int n = 1000, length = pw::kFullTrajectoryLength, replicates = 1000;
    int max_changepoints = 3;
    double mu = -1.0, lambda0 = 4.65;
    bool filter = false;

    auto* ingest = app.add_subcommand(
        "ingest", "apply the productivity adjustment and emit trajectories");
    ingest->add_option("--pubs", pubs_path, "publications CSV")->required();
    ingest->add_option("--adjust", adjust_path, "adjustment CSV")->required();
    ingest->add_option("--out", out, "trajectories CSV")->required();
    ingest->add_option("--full-out", full_out,
                       "also write the full-trajectory subset here");
    ingest->add_flag("--filter", filter, "apply the cohort inclusion filter");

    auto* fit = app.add_subcommand("fit", "fit the multi-stage model");
    fit->add_option("--input", input, "trajectories CSV")->required();
    fit->add_option("--out", out, "model JSON")->required();
    fit->add_option("--candidates-out", candidates_out, "candidate table CSV");
    fit->add_option("--max-changepoints", max_changepoints, "1-3");
    fit->add_option("--boundary", boundary, "boundary mode stamped on the model");

    auto* boot = app.add_subcommand("bootstrap", "bootstrap the model fit");
    boot->add_option("--input", input, "trajectories CSV")->required();
    boot->add_option("--out", out, "change-point frequency CSV")->required();
    boot->add_option("--replicates", replicates, "bootstrap replicates");
    boot->add_option("--seed", seed, "rng seed")->required();
    boot->add_option("--max-changepoints", max_changepoints, "1-3");

    auto* sim = app.add_subcommand("simulate", "simulate an ensemble");
    sim->add_option("--model", model_path, "model JSON")->required();
    sim->add_option("--out", out, "trajectories CSV")->required();
    sim->add_option("--n", n, "ensemble size");
    sim->add_option("--length", length, "trajectory length");
    sim->add_option("--seed", seed, "rng seed")->required();
    sim->add_option("--boundary", boundary,
                    "override the model's boundary mode");

    auto* sweep = app.add_subcommand("sweep", "canonical-fraction sweep");
    sweep->add_option("--alpha1", alpha1_spec, "start:stop:step")->required();
    sweep->add_option("--alpha2", alpha2_spec, "start:stop:step")->required();
    sweep->add_option("--mu", mu, "fixed increment mode");
    sweep->add_option("--lambda0", lambda0, "initial-productivity mean");
    sweep->add_option("--n", n, "trajectories per cell");
    sweep->add_option("--length", length, "trajectory length");
    sweep->add_option("--seed", seed, "rng seed")->required();
    sweep->add_option("--out", out, "sweep CSV")->required();

    auto* classify = app.add_subcommand("classify", "canonical verdicts");
    classify->add_option("--input", input, "trajectories CSV")->required();
    classify->add_option("--out", out, "verdict CSV")->required();

    auto* compare = app.add_subcommand("compare", "two-ensemble comparison");
    compare->add_option("--input", input, "trajectories CSV (ensemble A)")
        ->required();
    compare->add_option("--input-b", input_b, "trajectories CSV (ensemble B)")
        ->required();
    compare->add_option("--out", out, "report JSON")->required();
    compare->add_option("--seed", seed, "rng seed for bootstrap CIs")
        ->required();
    compare->add_option("--replicates", replicates, "bootstrap replicates");

    CLI11_PARSE(app, argc, argv);

    try {
        check_no_overwrite({input, input_b, model_path, pubs_path, adjust_path},
                           {out, candidates_out, full_out});

        if (*ingest) {
            const auto pubs = pw::load_publications(pubs_path);
            const auto adj = pw::load_adjustment(adjust_path);
            const auto cohort = pw::apply_adjustment(pubs, adj);
            if (filter) {
                const auto res = pw::filter_inclusion(cohort);
                write_atomic(out, pw::trajectories_to_csv(res.included));
                if (!full_out.empty())
                    write_atomic(full_out,
                                 pw::trajectories_to_csv(res.full_trajectories));
                std::cerr << "included " << res.included.size() << " of "
                          << cohort.size() << " trajectories, "
                          << res.full_trajectories.size() << " full\n";
            } else {
                std::vector<pw::Trajectory> trajs;
                for (const auto& ct : cohort) trajs.push_back(ct.traj);
                write_atomic(out, pw::trajectories_to_csv(trajs));
            }
        } else if (*fit) {
            const auto trajs = pw::load_trajectories(input);
            const auto candidates =
                pw::enumerate_change_point_sets(1, 19, max_changepoints);
            pw::FitOptions opts;
            opts.model_boundary = parse_boundary(boundary);
            const auto result = pw::fit_model(trajs, candidates, opts);
            write_atomic(out, pw::career_model_to_json(result.best_model));
            if (!candidates_out.empty())
                write_atomic(candidates_out, pw::candidates_to_csv(result));
            std::cerr << "fitted " << candidates.size() << " candidates over "
                      << trajs.size() << " trajectories\n";
        } else if (*boot) {
            const auto trajs = pw::load_trajectories(input);
            const auto candidates =
                pw::enumerate_change_point_sets(1, 19, max_changepoints);
            const auto bs =
                pw::bootstrap_fit(trajs, replicates, seed, candidates);
            write_atomic(out, pw::bootstrap_frequencies_to_csv(bs));
            std::cerr << bs.replicates - bs.failures << "/" << bs.replicates
                      << " replicates succeeded\n";
        } else if (*sim) {
            auto model = pw::career_model_from_json(read_file(model_path));
            if (sim->count("--boundary"))
                model.boundary = parse_boundary(boundary);
            const auto ens = pw::simulate_ensemble(model, n, length, seed);
            write_atomic(out, pw::trajectories_to_csv(ens));
        } else if (*sweep) {
            pw::SweepOptions opts;
            opts.mu = mu;
            opts.lambda0 = lambda0;
            opts.n_per_cell = n;
            opts.length = length;
            const auto grid = pw::sweep_variances(
                parse_grid(alpha1_spec), parse_grid(alpha2_spec), opts, seed);
            write_atomic(out, pw::sweep_to_csv(grid));
        } else if (*classify) {
            const auto trajs = pw::load_trajectories(input);
            std::vector<pw::CanonicalVerdict> verdicts;
            verdicts.reserve(trajs.size());
            for (const auto& t : trajs)
                verdicts.push_back(pw::classify_canonical(t));
            write_atomic(out, pw::verdicts_to_csv(trajs, verdicts));
        } else if (*compare) {
            const auto a = pw::load_trajectories(input);
            const auto b = pw::load_trajectories(input_b);
            pw::SummaryOptions opts;
            opts.seed = seed;
            opts.bootstrap_replicates = replicates;
            const auto report = pw::compare_ensembles(a, b, opts);
            write_atomic(out, pw::comparison_to_json(report));
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
