// End-to-end tests that drive the installed binary as a subprocess.
// PRODWALK_BIN and PRODWALK_SRC are injected by CTest.
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"

namespace fs = std::filesystem;

namespace {

std::string bin() {
    const char* p = std::getenv("PRODWALK_BIN");
    REQUIRE(p != nullptr);
    return p;
}

std::string src() {
    const char* p = std::getenv("PRODWALK_SRC");
    REQUIRE(p != nullptr);
    return p;
}

fs::path workdir() {
    static const fs::path dir = [] {
        fs::path d = fs::temp_directory_path() /
                     ("prodwalk_cli_" + std::to_string(::getpid()));
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

int run(const std::string& args) {
    const std::string cmd = bin() + " " + args + " 2>/dev/null";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void spit(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    out << text;
}

std::string fixture(const std::string& name) {
    return (fs::path(src()) / "tests" / "fixtures" / name).string();
}

}  // namespace

TEST_CASE("fit recovers the change points of the shipped fixture") {
    const fs::path model = workdir() / "fit.json";
    const fs::path cands = workdir() / "cands.csv";
    const int rc = run("fit --input " + fixture("synthetic_trajectories.csv") +
                       " --out " + model.string() + " --candidates-out " +
                       cands.string());
    REQUIRE(rc == 0);

    const auto j = nlohmann::json::parse(slurp(model));
    CHECK(j["change_points"] == nlohmann::json::array({4, 7, 13}));
    CHECK(j["stages"].size() == 4);
    CHECK(std::fabs(j["lambda0"].get<double>() - 4.65) < 0.5);
    // Stage scales approximate the generator (6.0, 2.0, 4.5, 1.5).
    const std::vector<double> want{6.0, 2.0, 4.5, 1.5};
    for (int i = 0; i < 4; ++i)
        CHECK(std::fabs(j["stages"][i]["alpha"].get<double>() - want[i]) < 0.5);

    const std::string table = slurp(cands);
    CHECK(table.rfind("change_points,loglik,aic,rank", 0) == 0);
    // 1159 candidates plus header.
    CHECK(std::count(table.begin(), table.end(), '\n') == 1160);
    // The best candidate is ranked first.
    std::istringstream is(table);
    std::string header, first;
    std::getline(is, header);
    std::getline(is, first);
    CHECK(first.rfind("4;7;13,", 0) == 0);
}

TEST_CASE("simulate is deterministic and respects boundary overrides") {
    const fs::path a = workdir() / "sim_a.csv";
    const fs::path b = workdir() / "sim_b.csv";
    const std::string base = "simulate --model " + fixture("sharp_model.json") +
                             " --n 50 --length 21 --seed 7 --out ";
    REQUIRE(run(base + a.string()) == 0);
    REQUIRE(run(base + b.string()) == 0);
    CHECK(slurp(a) == slurp(b));  // byte-identical rerun

    const fs::path c = workdir() / "sim_c.csv";
    REQUIRE(run(base + c.string() + " --boundary censor") == 0);
    CHECK(slurp(c) != slurp(a));  // the override changes the draws
    // Censor mode produces exact zeros; the truncate fixture does not.
    CHECK(slurp(c).find(",0\n") != std::string::npos);
}

TEST_CASE("sweep output matches the committed golden file") {
    const fs::path out = workdir() / "sweep.csv";
    REQUIRE(run("sweep --alpha1 2:6:2 --alpha2 1:5:2 --n 200 --seed 99 --out " +
                out.string()) == 0);
    const std::string golden =
        slurp(fs::path(src()) / "tests" / "golden" / "sweep_3x3.csv");
    CHECK(slurp(out) == golden);
}

TEST_CASE("bootstrap and compare reruns are byte-identical") {
    const fs::path b1 = workdir() / "boot1.csv";
    const fs::path b2 = workdir() / "boot2.csv";
    const std::string boot = "bootstrap --input " +
                             fixture("synthetic_trajectories.csv") +
                             " --replicates 5 --seed 11 --max-changepoints 1 "
                             "--out ";
    REQUIRE(run(boot + b1.string()) == 0);
    REQUIRE(run(boot + b2.string()) == 0);
    CHECK(slurp(b1) == slurp(b2));
    CHECK(slurp(b1).rfind("change_points,fraction", 0) == 0);

    const fs::path sim = workdir() / "cmp_sim.csv";
    REQUIRE(run("simulate --model " + fixture("sharp_model.json") +
                " --n 60 --length 21 --seed 3 --out " + sim.string()) == 0);
    const fs::path r1 = workdir() / "cmp1.json";
    const fs::path r2 = workdir() / "cmp2.json";
    const std::string cmp = "compare --input " + sim.string() + " --input-b " +
                            fixture("synthetic_trajectories.csv") +
                            " --replicates 50 --seed 5 --out ";
    REQUIRE(run(cmp + r1.string()) == 0);
    REQUIRE(run(cmp + r2.string()) == 0);
    CHECK(slurp(r1) == slurp(r2));
    const auto j = nlohmann::json::parse(slurp(r1));
    CHECK(j.contains("max_mean_abs_diff"));
}

TEST_CASE("ingest, fit, simulate, classify, and compare compose") {
    // Build a small publication table whose adjusted values replay the
    // first five fixture trajectories, then push it through the pipeline.
    std::ostringstream pubs;
    pubs << "person_id,calendar_year,career_age,count\n";
    std::ostringstream adjust;
    adjust << "year,multiplier\n";
    for (int y = 1990; y <= 1990 + 20; ++y) adjust << y << ",1\n";
    {
        std::ifstream in(fixture("synthetic_trajectories.csv"));
        std::string line;
        std::getline(in, line);  // header
        int rows = 0;
        while (std::getline(in, line) && rows < 5 * 21) {
            const auto c1 = line.find(','), c2 = line.find(',', c1 + 1);
            const std::string id = line.substr(0, c1);
            const int age = std::stoi(line.substr(c1 + 1, c2 - c1 - 1));
            const std::string q = line.substr(c2 + 1);
            pubs << id << "," << 1990 + age << "," << age << "," << q << "\n";
            ++rows;
        }
    }
    const fs::path pubs_csv = workdir() / "pubs.csv";
    const fs::path adj_csv = workdir() / "adjust.csv";
    spit(pubs_csv, pubs.str());
    spit(adj_csv, adjust.str());

    const fs::path trajs = workdir() / "ingested.csv";
    const fs::path full = workdir() / "ingested_full.csv";
    REQUIRE(run("ingest --pubs " + pubs_csv.string() + " --adjust " +
                adj_csv.string() + " --out " + trajs.string() +
                " --full-out " + full.string() + " --filter") == 0);
    CHECK(slurp(trajs) == slurp(full));  // all five spans are complete

    const fs::path model = workdir() / "pipe_model.json";
    REQUIRE(run("fit --input " + trajs.string() + " --max-changepoints 1 "
                "--out " + model.string()) == 0);
    const fs::path resim = workdir() / "pipe_sim.csv";
    REQUIRE(run("simulate --model " + model.string() +
                " --n 40 --length 21 --seed 2 --out " + resim.string()) == 0);
    const fs::path verdicts = workdir() / "pipe_verdicts.csv";
    REQUIRE(run("classify --input " + resim.string() + " --out " +
                verdicts.string()) == 0);
    const std::string vtext = slurp(verdicts);
    CHECK(std::count(vtext.begin(), vtext.end(), '\n') == 41);
    const fs::path report = workdir() / "pipe_report.json";
    REQUIRE(run("compare --input " + trajs.string() + " --input-b " +
                resim.string() + " --replicates 20 --seed 1 --out " +
                report.string()) == 0);
    CHECK(nlohmann::json::parse(slurp(report)).contains("cumulative_t"));
}

TEST_CASE("exit codes distinguish validation errors from missing files") {
    const fs::path out = workdir() / "never.json";
    // Malformed input data: validation error, exit 1.
    const fs::path bad = workdir() / "bad.csv";
    spit(bad, "person_id,career_year,q\na,0,-5\n");
    CHECK(run("fit --input " + bad.string() + " --out " + out.string()) == 1);
    // Nonexistent input file: validation error, exit 1.
    CHECK(run("fit --input /nonexistent.csv --out " + out.string()) == 1);
    // Unreadable model JSON: computation error, exit 2.
    const fs::path junk = workdir() / "junk.json";
    spit(junk, "{not json");
    CHECK(run("simulate --model " + junk.string() + " --seed 1 --out " +
              out.string()) == 2);
    CHECK(!fs::exists(out));  // failed runs leave no artifact behind

    // Refusing to overwrite an input in place.
    const fs::path traj = workdir() / "inplace.csv";
    spit(traj, "person_id,career_year,q\na,0,1\na,1,2\n");
    CHECK(run("fit --input " + traj.string() + " --out " + traj.string()) ==
          1);
    CHECK(slurp(traj).rfind("person_id", 0) == 0);  // input untouched
}
