#include "exlab/cli.hpp"
#include "exlab/errors.hpp"
#include "exlab/path_io.hpp"
#include "exlab/report.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;
using namespace exlab;

namespace {

struct Result {
    int code = -1;
    std::string out;
    std::string err;
};

Result run_cli(std::vector<std::string> args) {
    args.insert(args.begin(), "exlab");
    std::vector<char*> argv;
    for (auto& a : args) argv.push_back(a.data());
    std::ostringstream out;
    std::ostringstream err;
    const int code = cli::main(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

int run_binary(const std::string& args) {
    const int status = std::system((std::string(EXLAB_CLI_PATH) + " " + args + " >/dev/null 2>&1").c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("exlab_cli_" + std::to_string(::getpid()) + "_" +
                                            std::to_string(reinterpret_cast<std::uintptr_t>(this)));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string operator/(const std::string& name) const { return (path / name).string(); }
};

}  // namespace

TEST_CASE("construct twice with one seed writes identical files") {
    TempDir dir;
    const auto a = run_cli({"construct", "--theorem", "1", "-a", "1", "-b", "-1", "--seed", "7", "--dt", "1e-3",
                            "--out", dir / "x1.csv"});
    const auto b = run_cli({"construct", "--theorem", "1", "-a", "1", "-b", "-1", "--seed", "7", "--dt", "1e-3",
                            "--out", dir / "x2.csv"});
    REQUIRE(a.code == 0);
    REQUIRE(b.code == 0);
    const auto x1 = slurp(dir / "x1.csv");
    CHECK(!x1.empty());
    CHECK(x1 == slurp(dir / "x2.csv"));
    CHECK(x1.rfind("# master_seed=7\n", 0) == 0);
    const auto c = run_cli({"construct", "-a", "1", "-b", "-1", "--seed", "8", "--dt", "1e-3", "--out", dir / "x3.csv"});
    CHECK(slurp(dir / "x3.csv") != x1);
}

TEST_CASE("invalid parameters exit 2 and name the parameter") {
    const auto r = run_cli({"simulate", "--what", "skew", "--alpha", "1.5"});
    CHECK(r.code == cli::kInvalidConfig);
    CHECK(r.err.find("--alpha") != std::string::npos);
    CHECK(run_cli({"simulate", "--dt", "-1"}).err.find("--dt") != std::string::npos);
    CHECK(run_cli({"simulate", "--format", "xml"}).code == cli::kInvalidConfig);
    CHECK(run_cli({"construct", "-a", "-1", "-b", "-1"}).err.find("-a") != std::string::npos);
    CHECK(run_cli({"verify", "--theorem", "3"}).code == cli::kInvalidConfig);
    CHECK(run_cli({"simulate", "--seed", "12x"}).err.find("--seed") != std::string::npos);
    CHECK(run_cli({"frobnicate"}).code == cli::kInvalidConfig);
    CHECK(run_cli({}).code == cli::kInvalidConfig);
}

TEST_CASE("simulate writes one file per path and the files round-trip") {
    TempDir dir;
    const auto r = run_cli({"simulate", "--what", "reflected", "--paths", "3", "--dt", "1e-2", "--format", "binary",
                            "--out", dir / "paths"});
    REQUIRE(r.code == 0);
    for (int i = 0; i < 3; ++i) {
        std::ifstream in(dir / ("paths/path_0000" + std::to_string(i) + ".bin"), std::ios::binary);
        REQUIRE(in);
        const auto p = io::read_binary(in);
        CHECK(p.size() == 101);
        CHECK(p.kind == PathKind::reflected);
    }
    CHECK(run_cli({"simulate", "--paths", "2"}).code == cli::kInvalidConfig);
}

TEST_CASE("excursions reads a simulated path and writes ordered intervals") {
    TempDir dir;
    REQUIRE(run_cli({"simulate", "--dt", "1e-3", "--out", dir / "b.json", "--format", "json"}).code == 0);
    const auto r = run_cli({"excursions", "--in", dir / "b.json", "--dt", "1e-3", "--delta-min", "0.01", "--p", "0.25",
                            "--out", dir / "ex.csv"});
    REQUIRE(r.code == 0);
    const auto csv = slurp(dir / "ex.csv");
    CHECK(csv.find("# delta_min=0.01\n") != std::string::npos);
    CHECK(csv.find("g,d,epoch,rank,length,censored\n") != std::string::npos);
    CHECK(fs::exists(dir / "ex.csv.signs.json"));
    CHECK(run_cli({"excursions", "--in", dir / "missing.csv"}).code == cli::kInvalidConfig);
}

TEST_CASE("report: a malformed line is skipped with warning count 1") {
    TempDir dir;
    VerificationReport good;
    good.name = "ok";
    good.statistic = 0.1;
    good.threshold = 1.0;
    good.evaluate();
    {
        std::ofstream f(dir / "r.jsonl");
        f << to_json_line(good) << "\n{broken\n";
    }
    const auto r = run_cli({"report", dir / "r.jsonl", "--out", dir / "r.csv"});
    CHECK(r.code == cli::kOk);
    CHECK(r.out.find("1/1 passed, 1 warning\n") != std::string::npos);
    CHECK(r.err.find("r.jsonl:2") != std::string::npos);
    CHECK(slurp(dir / "r.csv").rfind("name,statistic,rule,threshold,n,passed,seed,mandatory\nok,", 0) == 0);
}

TEST_CASE("report recomputes pass/fail and exits 1 on a failed mandatory check") {
    TempDir dir;
    VerificationReport bad;
    bad.name = "claims_to_pass";
    bad.statistic = 2.0;
    bad.threshold = 1.0;
    bad.passed = true;  // stale verdict; report must recompute it
    {
        std::ofstream f(dir / "r.jsonl");
        f << to_json_line(bad) << "\n";
    }
    const auto r = run_cli({"report", dir / "r.jsonl"});
    CHECK(r.code == cli::kCheckFailed);
    CHECK(r.out.find("0/1 passed, 0 warnings") != std::string::npos);
}

TEST_CASE("verify writes JSON lines and a summary line per report") {
    TempDir dir;
    const auto r = run_cli({"verify", "--theorem", "appendix", "--alpha", "0.5", "--paths", "200", "--dt", "1e-3",
                            "--seed", "5", "--out", dir / "v.jsonl"});
    CHECK(r.code == cli::kOk);
    std::ifstream in(dir / "v.jsonl");
    std::size_t lines = 0;
    for (std::string l; std::getline(in, l); ++lines) {
        const auto rep = report_from_json_line(l);
        CHECK(rep.details.at("master_seed") == "5");
        CHECK(r.out.find(rep.name) != std::string::npos);
    }
    CHECK(lines >= 3);
}

TEST_CASE("verify with too few paths is a numerical failure (exit 3)") {
    CHECK(run_cli({"verify", "--theorem", "1", "-a", "1", "-b", "-1", "--paths", "5", "--dt", "1e-2"}).code ==
          cli::kNumericalFailure);
}

TEST_CASE("flags override the config file; unknown keys are rejected") {
    TempDir dir;
    {
        std::ofstream f(dir / "cfg.json");
        f << R"({"what": "brownian", "dt": 0.1, "horizon": 1.0, "seed": 3})";
    }
    const auto from_file = run_cli({"simulate", "--config", dir / "cfg.json", "--out", dir / "a.csv"});
    REQUIRE(from_file.code == 0);
    std::ifstream a(dir / "a.csv");
    std::string first;
    std::getline(a, first);
    CHECK(first == "# master_seed=3");
    CHECK(io::read_csv(a).size() == 11);

    REQUIRE(run_cli({"simulate", "--config", dir / "cfg.json", "--dt", "0.05", "--seed", "4", "--out", dir / "b.csv"})
                .code == 0);
    std::ifstream b(dir / "b.csv");
    std::getline(b, first);
    CHECK(first == "# master_seed=4");
    CHECK(io::read_csv(b).size() == 21);

    {
        std::ofstream f(dir / "bad.json");
        f << R"({"dt": 0.1, "colour": "blue"})";
    }
    const auto bad = run_cli({"simulate", "--config", dir / "bad.json"});
    CHECK(bad.code == cli::kInvalidConfig);
    CHECK(bad.err.find("colour") != std::string::npos);
}

TEST_CASE("the installed binary: exit codes and EXLAB_SEED") {
    TempDir dir;
    CHECK(run_binary("simulate --what skew --alpha 1.5") == 2);
    CHECK(run_binary("simulate --dt 1e-2 --out " + (dir / "s.csv")) == 0);
    CHECK(run_binary("verify --theorem 1 -a 1 -b -1 --paths 5 --dt 1e-2") == 3);

    // EXLAB_SEED is the default seed; --seed still wins
    CHECK(std::system(("EXLAB_SEED=99 " + std::string(EXLAB_CLI_PATH) + " simulate --dt 1e-2 --out " + (dir / "e.csv") +
                       " >/dev/null")
                          .c_str()) == 0);
    CHECK(slurp(dir / "e.csv").rfind("# master_seed=99\n", 0) == 0);
    CHECK(std::system(("EXLAB_SEED=99 " + std::string(EXLAB_CLI_PATH) + " simulate --dt 1e-2 --seed 1 --out " +
                       (dir / "f.csv") + " >/dev/null")
                          .c_str()) == 0);
    CHECK(slurp(dir / "f.csv").rfind("# master_seed=1\n", 0) == 0);
    CHECK(run_binary("--help") == 0);
}
