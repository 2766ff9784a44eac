#include "exlab/cli.hpp"

#include "exlab/errors.hpp"
#include "exlab/excursions.hpp"
#include "exlab/format.hpp"
#include "exlab/path_io.hpp"
#include "exlab/paths.hpp"
#include "exlab/report.hpp"
#include "exlab/rng.hpp"
#include "exlab/signs.hpp"
#include "exlab/verify.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace exlab::cli {

namespace fs = std::filesystem;

namespace {

template <class T>
std::string show(const T& v) {
    std::ostringstream s;
    s << v;
    return s.str();
}

void require(bool ok, const std::string& message) {
    if (!ok) throw InvalidArgument(message);
}

Coefficient coefficient_for(const RunConfig& cfg) {
    if (cfg.theorem == "2") return Coefficient::odd_piecewise(cfg.breakpoints, cfg.levels);
    return Coefficient::step(cfg.a, cfg.b);
}

ExecPolicy exec_for(const RunConfig& cfg) {
    return cfg.workers > 0 ? ExecPolicy::threads(cfg.workers) : ExecPolicy{};
}

std::string extension(const std::string& format) {
    if (format == "binary") return ".bin";
    if (format == "json") return ".json";
    return ".csv";
}

std::string encode_path(const SamplePath& path, const RunConfig& cfg) {
    std::ostringstream s;
    if (cfg.format == "binary") {
        io::write_binary(s, path);
    } else if (cfg.format == "json") {
        auto j = nlohmann::json::parse(io::to_json(path));
        j["master_seed"] = cfg.seed;
        s << j.dump() << '\n';
    } else {
        s << "# master_seed=" << cfg.seed << '\n';
        io::write_csv(s, path);
    }
    return s.str();
}

SamplePath load_path(const std::string& file) {
    std::ifstream in(file, std::ios::binary);
    require(static_cast<bool>(in), "--in: cannot open '" + file + "'");
    const auto ext = fs::path(file).extension().string();
    if (ext == ".bin") return io::read_binary(in);
    if (ext == ".json") {
        std::stringstream s;
        s << in.rdbuf();
        return io::path_from_json(s.str());
    }
    return io::read_csv(in);
}

void emit(const RunConfig& cfg, const std::string& target, const std::string& bytes, std::ostream& out) {
    if (target.empty() || target == "-") {
        out << bytes;
        return;
    }
    const fs::path p(target);
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    io::atomic_write(p, bytes);
    (void)cfg;
}

std::string numbered(const std::string& dir, std::size_t i, const std::string& ext) {
    char name[32];
    std::snprintf(name, sizeof name, "path_%05zu", i);
    return (fs::path(dir) / (std::string(name) + ext)).string();
}

SamplePath simulate_one(const RunConfig& cfg, std::size_t i) {
    const auto seed = rng::derive_seed(cfg.seed, i, rng::kDriver);
    const auto B = sample_brownian(seed, cfg.horizon, cfg.dt);
    if (cfg.what == "brownian") return B;
    if (cfg.what == "reflected") return reflect_skorokhod(B).Y;
    if (cfg.what == "sde") return euler_sde(coefficient_for(cfg), B);
    auto X = skew_bm(B, cfg.alpha, rng::derive_seed(cfg.seed, i, rng::kSigns));
    X.seed = seed;
    return X;
}

int run_simulate(const RunConfig& cfg, std::ostream& out) {
    const auto ext = extension(cfg.format);
    if (cfg.paths == 1) {
        const auto path = simulate_one(cfg, 0);
        emit(cfg, cfg.out, encode_path(path, cfg), out);
        if (!cfg.out.empty()) out << "simulate " << cfg.what << ": 1 path, " << path.size() << " points -> " << cfg.out << '\n';
        return kOk;
    }
    require(!cfg.out.empty(), "--out: a directory is required when --paths > 1");
    const auto paths = map_paths(cfg.paths, [&](std::size_t i) { return simulate_one(cfg, i); }, exec_for(cfg));
    for (std::size_t i = 0; i < paths.size(); ++i) emit(cfg, numbered(cfg.out, i, ext), encode_path(paths[i], cfg), out);
    out << "simulate " << cfg.what << ": " << cfg.paths << " paths -> " << cfg.out << '\n';
    return kOk;
}

int run_excursions(const RunConfig& cfg, std::ostream& out) {
    SamplePath Y;
    double tol = 0.0;
    if (!cfg.input.empty()) {
        const auto path = load_path(cfg.input);
        if (path.kind == PathKind::brownian) {
            Y = reflect_skorokhod(path).Y;
        } else if (path.kind == PathKind::reflected) {
            Y = path;
        } else {
            Y = path;
            for (auto& v : Y.values) v = std::abs(v);
            tol = 1e-2 * std::sqrt(path.dt);
        }
    } else {
        Y = reflect_skorokhod(sample_brownian(rng::derive_seed(cfg.seed, 0, rng::kDriver), cfg.horizon, cfg.dt)).Y;
    }
    const auto indexing = index_excursions(Y, tol, cfg.effective_delta_min());
    std::ostringstream s;
    if (cfg.format == "csv") {
        s << "# master_seed=" << cfg.seed << '\n';
        s << "# delta_min=" << fmt_double(indexing.delta_min) << '\n';
        s << "# tol=" << fmt_double(indexing.tol) << '\n';
        write_indexing_csv(s, indexing);
    } else {
        auto j = nlohmann::json::parse(indexing_to_json(indexing));
        j["master_seed"] = cfg.seed;
        s << j.dump() << '\n';
    }
    emit(cfg, cfg.out, s.str(), out);
    if (cfg.p) {
        const auto choice = make_iid_sign_choice(indexing, *cfg.p, rng::derive_seed(cfg.seed, 0, rng::kSigns));
        auto j = nlohmann::json::parse(sign_choice_to_json(choice));
        j["master_seed"] = cfg.seed;
        emit(cfg, cfg.out.empty() ? "" : cfg.out + ".signs.json", j.dump() + "\n", out);
    }
    if (!cfg.out.empty())
        out << "excursions: " << indexing.intervals.size() << " intervals, " << indexing.xi.size() << " epoch boundaries, "
            << indexing.discarded << " discarded below delta_min=" << fmt_double(indexing.delta_min) << '\n';
    return kOk;
}

int run_construct(const RunConfig& cfg, std::ostream& out) {
    const auto B = sample_brownian(rng::derive_seed(cfg.seed, 0, rng::kDriver), cfg.horizon, cfg.dt);
    const auto sign_seed = rng::derive_seed(cfg.seed, 0, rng::kSigns);
    const auto sp = cfg.theorem == "2" ? construct_theorem2(B, coefficient_for(cfg), sign_seed)
                                       : construct_theorem1(B, cfg.a, cfg.b, sign_seed);
    std::ostringstream s;
    if (cfg.format == "json") {
        nlohmann::json j;
        j["master_seed"] = cfg.seed;
        j["dt"] = sp.X.dt;
        j["X"] = sp.X.values;
        j["U"] = sp.U.values;
        j["Y"] = sp.Y.values;
        j["choice"] = nlohmann::json::parse(sign_choice_to_json(sp.choice));
        s << j.dump() << '\n';
    } else {
        s << "# master_seed=" << cfg.seed << '\n';
        write_signed_path_csv(s, sp);
    }
    emit(cfg, cfg.out, s.str(), out);
    if (!cfg.out.empty())
        out << "construct theorem " << cfg.theorem << ": " << sp.X.size() << " points, "
            << sp.indexing.intervals.size() << " excursions, p=" << fmt_double(sp.choice.p) << " -> " << cfg.out << '\n';
    return kOk;
}

int run_verify(const RunConfig& cfg, std::ostream& out) {
    SuiteConfig suite;
    suite.n_paths = cfg.paths;
    suite.dt = cfg.dt;
    suite.ctx = CheckContext{cfg.seed, exec_for(cfg)};
    std::vector<VerificationReport> reports;
    if (cfg.theorem == "1") reports = verify_theorem1(cfg.a, cfg.b, suite);
    else if (cfg.theorem == "2") reports = verify_theorem2(coefficient_for(cfg), suite);
    else reports = verify_appendix(cfg.alpha, suite);
    std::string lines;
    for (auto& r : reports) {
        r.note("master_seed", std::to_string(cfg.seed));
        lines += to_json_line(r) + "\n";
    }
    if (cfg.out.empty()) {
        out << lines;
    } else {
        emit(cfg, cfg.out, lines, out);
    }
    for (const auto& r : reports)
        out << (r.passed ? "PASS " : "FAIL ") << r.name << ": " << fmt_double(r.statistic) << ' ' << r.rule << ' '
            << fmt_double(r.threshold) << " (n=" << r.n << ", seed=" << r.seed << ")\n";
    return all_mandatory_passed(reports) ? kOk : kCheckFailed;
}

int run_report(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    std::vector<VerificationReport> reports;
    std::size_t warnings = 0;
    for (const auto& file : cfg.inputs) {
        std::ifstream in(file);
        require(static_cast<bool>(in), "report: cannot open '" + file + "'");
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
            try {
                reports.push_back(report_from_json_line(line));
            } catch (const std::exception& e) {
                ++warnings;
                err << "warning: " << file << ':' << lineno << ": skipped malformed report (" << e.what() << ")\n";
            }
        }
    }
    for (auto& r : reports) r.evaluate();
    print_table(out, reports);
    std::size_t passed = 0;
    for (const auto& r : reports) passed += r.passed ? 1 : 0;
    out << passed << '/' << reports.size() << " passed, " << warnings << " warning" << (warnings == 1 ? "" : "s") << '\n';
    if (!cfg.out.empty()) {
        std::ostringstream s;
        write_reports_csv(s, reports);
        emit(cfg, cfg.out, s.str(), out);
    }
    return all_mandatory_passed(reports) ? kOk : kCheckFailed;
}

void apply_config_file(RunConfig& cfg, const std::string& file) {
    std::ifstream in(file);
    require(static_cast<bool>(in), "--config: cannot open '" + file + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw InvalidArgument("--config: " + std::string(e.what()));
    }
    require(j.is_object(), "--config: expected a flat JSON object");
    for (const auto& [key, v] : j.items()) {
        try {
            if (key == "what") cfg.what = v.get<std::string>();
            else if (key == "theorem") cfg.theorem = v.is_string() ? v.get<std::string>() : std::to_string(v.get<int>());
            else if (key == "a") cfg.a = v.get<double>();
            else if (key == "b") cfg.b = v.get<double>();
            else if (key == "breakpoints") cfg.breakpoints = v.get<std::vector<double>>();
            else if (key == "levels") cfg.levels = v.get<std::vector<double>>();
            else if (key == "alpha") cfg.alpha = v.get<double>();
            else if (key == "p") cfg.p = v.get<double>();
            else if (key == "dt") cfg.dt = v.get<double>();
            else if (key == "horizon") cfg.horizon = v.get<double>();
            else if (key == "paths") cfg.paths = v.get<std::size_t>();
            else if (key == "seed") cfg.seed = v.get<std::uint64_t>();
            else if (key == "eps") cfg.eps = v.get<double>();
            else if (key == "delta_min" || key == "delta-min") cfg.delta_min = v.get<double>();
            else if (key == "out") cfg.out = v.get<std::string>();
            else if (key == "format") cfg.format = v.get<std::string>();
            else if (key == "workers") cfg.workers = v.get<int>();
            else if (key == "in") cfg.input = v.get<std::string>();
            else throw InvalidArgument("--config: unknown key '" + key + "'");
        } catch (const nlohmann::json::exception&) {
            throw InvalidArgument("--config: key '" + key + "' has the wrong type");
        }
    }
}

}  // namespace

void validate(const RunConfig& cfg) {
    require(cfg.command == "simulate" || cfg.command == "excursions" || cfg.command == "construct" ||
                cfg.command == "verify" || cfg.command == "report",
            "unknown command '" + cfg.command + "'");
    require(std::isfinite(cfg.dt) && cfg.dt > 0.0, "--dt must be positive (got " + show(cfg.dt) + ")");
    require(std::isfinite(cfg.horizon) && cfg.horizon >= 0.0, "--horizon must be nonnegative (got " + show(cfg.horizon) + ")");
    require(cfg.horizon == 0.0 || cfg.horizon >= cfg.dt * (1.0 - 1e-9),
            "--horizon must be 0 or at least --dt (got " + show(cfg.horizon) + ")");
    require(cfg.alpha >= 0.0 && cfg.alpha <= 1.0, "--alpha must lie in [0, 1] (got " + show(cfg.alpha) + ")");
    require(!cfg.p || (*cfg.p >= 0.0 && *cfg.p <= 1.0), "--p must lie in [0, 1] (got " + show(cfg.p.value_or(0)) + ")");
    require(cfg.paths >= 1, "--paths must be at least 1");
    require(std::isfinite(cfg.eps) && cfg.eps > 0.0, "--eps must be positive (got " + show(cfg.eps) + ")");
    require(!cfg.delta_min || *cfg.delta_min >= 0.0, "--delta-min must be nonnegative");
    require(cfg.format == "csv" || cfg.format == "json" || cfg.format == "binary",
            "--format must be csv, json or binary (got '" + cfg.format + "')");
    require(cfg.workers >= 0, "--workers must be nonnegative");
    require(cfg.theorem == "1" || cfg.theorem == "2" || cfg.theorem == "appendix",
            "--theorem must be 1, 2 or appendix (got '" + cfg.theorem + "')");
    if (cfg.command == "simulate")
        require(cfg.what == "brownian" || cfg.what == "reflected" || cfg.what == "sde" || cfg.what == "skew",
                "--what must be brownian, reflected, sde or skew (got '" + cfg.what + "')");
    const bool uses_coefficient = cfg.command == "construct" || cfg.command == "verify" ||
                                  (cfg.command == "simulate" && cfg.what == "sde");
    if (uses_coefficient && cfg.theorem == "2") {
        try {
            const auto c = Coefficient::odd_piecewise(cfg.breakpoints, cfg.levels);
            (void)c;
        } catch (const InvalidArgument& e) {
            throw InvalidArgument(std::string("--levels/--breakpoints: ") + e.what());
        }
    } else if (uses_coefficient && cfg.theorem == "1") {
        const bool sde = cfg.command == "simulate";
        require(std::isfinite(cfg.a) && (sde ? cfg.a != 0.0 : cfg.a > 0.0),
                "-a must be " + std::string(sde ? "nonzero" : "positive") + " (got " + show(cfg.a) + ")");
        require(std::isfinite(cfg.b) && (sde ? cfg.b != 0.0 : cfg.b < 0.0),
                "-b must be " + std::string(sde ? "nonzero" : "negative") + " (got " + show(cfg.b) + ")");
    }
    if (cfg.command == "construct") require(cfg.theorem != "appendix", "construct: --theorem must be 1 or 2");
    if (cfg.command == "report") require(!cfg.inputs.empty(), "report: at least one input file is required");
    if (!cfg.input.empty()) require(fs::exists(cfg.input), "--in: no such file '" + cfg.input + "'");
}

int run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    if (cfg.command == "simulate") return run_simulate(cfg, out);
    if (cfg.command == "excursions") return run_excursions(cfg, out);
    if (cfg.command == "construct") return run_construct(cfg, out);
    if (cfg.command == "verify") return run_verify(cfg, out);
    return run_report(cfg, out, err);
}

int main(int argc, char** argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"exlab: excursion sign-choice simulation and verification"};
    app.require_subcommand(1);

    RunConfig flags;
    std::string config_file;
    std::string seed_text;
    app.add_option("--config", config_file, "flat JSON config; explicit flags override it");
    auto* o_what = app.add_option("--what", flags.what, "simulate: brownian | reflected | sde | skew");
    auto* o_theorem = app.add_option("--theorem", flags.theorem, "1 | 2 | appendix");
    auto* o_a = app.add_option("-a", flags.a, "step coefficient on x >= 0");
    auto* o_b = app.add_option("-b", flags.b, "step coefficient on x < 0");
    auto* o_levels = app.add_option("--levels", flags.levels, "odd coefficient levels")->delimiter(',');
    auto* o_bps = app.add_option("--breakpoints", flags.breakpoints, "odd coefficient breakpoints")->delimiter(',');
    auto* o_alpha = app.add_option("--alpha", flags.alpha, "skew parameter");
    double p_value = 0.5;
    auto* o_p = app.add_option("--p", p_value, "sign probability");
    auto* o_dt = app.add_option("--dt", flags.dt, "time step");
    auto* o_horizon = app.add_option("--horizon", flags.horizon, "time horizon");
    auto* o_paths = app.add_option("--paths", flags.paths, "number of paths");
    auto* o_seed = app.add_option("--seed", seed_text, "master seed (default: $EXLAB_SEED or 42)");
    auto* o_eps = app.add_option("--eps", flags.eps, "local-time band width");
    double dm = 0.0;
    auto* o_dm = app.add_option("--delta-min", dm, "minimum excursion length (default 100 dt)");
    auto* o_out = app.add_option("--out", flags.out, "output file or directory");
    auto* o_format = app.add_option("--format", flags.format, "csv | json | binary");
    auto* o_workers = app.add_option("--workers", flags.workers, "worker threads (0: all cores)");
    auto* o_in = app.add_option("--in", flags.input, "input path file");

    auto* simulate = app.add_subcommand("simulate", "generate paths");
    auto* excursions = app.add_subcommand("excursions", "extract and order excursion intervals");
    auto* construct = app.add_subcommand("construct", "build X from a driver and an i.i.d. sign choice");
    auto* verify = app.add_subcommand("verify", "run a verification suite");
    auto* report = app.add_subcommand("report", "merge JSON-lines reports");
    report->add_option("files", flags.inputs, "report files")->required();
    for (auto* sub : {simulate, excursions, construct, verify, report}) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kInvalidConfig;
    }

    try {
        RunConfig cfg;
        cfg.command = app.get_subcommands().front()->get_name();
        if (const char* env = std::getenv("EXLAB_SEED")) {
            try {
                cfg.seed = std::stoull(env);
            } catch (const std::exception&) {
                throw InvalidArgument("EXLAB_SEED must be an unsigned integer");
            }
        }
        if (!config_file.empty()) apply_config_file(cfg, config_file);
        auto given = [](const CLI::Option* o) { return o->count() > 0; };
        if (given(o_what)) cfg.what = flags.what;
        if (given(o_theorem)) cfg.theorem = flags.theorem;
        if (given(o_a)) cfg.a = flags.a;
        if (given(o_b)) cfg.b = flags.b;
        if (given(o_levels)) cfg.levels = flags.levels;
        if (given(o_bps)) cfg.breakpoints = flags.breakpoints;
        if (given(o_alpha)) cfg.alpha = flags.alpha;
        if (given(o_p)) cfg.p = p_value;
        if (given(o_dt)) cfg.dt = flags.dt;
        if (given(o_horizon)) cfg.horizon = flags.horizon;
        if (given(o_paths)) cfg.paths = flags.paths;
        if (given(o_seed)) {
            try {
                std::size_t used = 0;
                cfg.seed = std::stoull(seed_text, &used);
                if (used != seed_text.size()) throw std::invalid_argument("trailing characters");
            } catch (const std::exception&) {
                throw InvalidArgument("--seed must be an unsigned integer (got '" + seed_text + "')");
            }
        }
        if (given(o_eps)) cfg.eps = flags.eps;
        if (given(o_dm)) cfg.delta_min = dm;
        if (given(o_out)) cfg.out = flags.out;
        if (given(o_format)) cfg.format = flags.format;
        if (given(o_workers)) cfg.workers = flags.workers;
        if (given(o_in)) cfg.input = flags.input;
        cfg.inputs = flags.inputs;
        validate(cfg);
        return run(cfg, out, err);
    } catch (const InvalidArgument& e) {
        err << "error: " << e.what() << '\n';
        return kInvalidConfig;
    } catch (const NumericalFailure& e) {
        err << "numerical failure: " << e.what() << '\n';
        return kNumericalFailure;
    } catch (const InsufficientData& e) {
        err << "insufficient data: " << e.what() << '\n';
        return kNumericalFailure;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kNumericalFailure;
    }
}

}  // namespace exlab::cli
