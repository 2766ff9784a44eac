#include "exlab/errors.hpp"
#include "exlab/rng.hpp"
#include "exlab/signs.hpp"
#include "exlab/stats.hpp"
#include "exlab/verify.hpp"
#include "oracles.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <map>

using namespace exlab;
using Catch::Approx;

namespace {

CheckContext serial_ctx(std::uint64_t seed) { return {seed, ExecPolicy::serial()}; }

std::vector<std::string> json_lines(const std::vector<VerificationReport>& rs) {
    std::vector<std::string> out;
    for (const auto& r : rs) out.push_back(to_json_line(r));
    return out;
}

std::map<std::string, double> by_suffix(const std::vector<VerificationReport>& rs) {
    std::map<std::string, double> out;
    for (const auto& r : rs) out[r.name.substr(r.name.find('.') + 1)] = r.statistic;
    return out;
}

}  // namespace

TEST_CASE("signed_half_normal_cdf: limits and symmetric case") {
    for (double x : {-2.0, -0.5, 0.0, 0.3, 1.7}) CHECK(signed_half_normal_cdf(1, -1, 0.5, x) == Approx(oracle::std_normal_cdf(x)));
    CHECK(signed_half_normal_cdf(2, -1, 1.0 / 3.0, 0.0) == Approx(2.0 / 3.0));
    CHECK(signed_half_normal_cdf(2, -1, 1.0 / 3.0, -50.0) == Approx(0.0).margin(1e-15));
    CHECK(signed_half_normal_cdf(2, -1, 1.0 / 3.0, 50.0) == Approx(1.0));
    // P(X <= -1) = (1 - p) P(|N| >= 1)
    CHECK(signed_half_normal_cdf(2, -1, 1.0 / 3.0, -1.0) == Approx(2.0 / 3.0 * 2.0 * oracle::std_normal_cdf(-1.0)));
    // P(X <= 2) = (1 - p) + p P(|N| <= 1) with a = 2
    CHECK(signed_half_normal_cdf(2, -1, 1.0 / 3.0, 2.0) ==
          Approx(2.0 / 3.0 + 1.0 / 3.0 * (2.0 * oracle::std_normal_cdf(1.0) - 1.0)));
}

TEST_CASE("run_check: a failed statistical check is rerun once with a derived seed") {
    std::vector<std::uint64_t> seen;
    auto failing = [&](std::uint64_t s) {
        seen.push_back(s);
        VerificationReport r;
        r.name = "always_fails";
        r.statistic = 1.0;
        r.threshold = 0.0;
        return r.evaluate();
    };
    const auto r = run_check(failing, 9);
    REQUIRE(seen.size() == 2);
    CHECK(seen[0] == 9);
    CHECK(seen[1] == rng::derive_seed(9, 1, rng::kRerun));
    CHECK(r.seed == seen[1]);
    CHECK(r.details.at("rerun") == "1");
    CHECK(r.details.at("first_seed") == "9");
}

TEST_CASE("run_check: passing and exact checks run once") {
    int calls = 0;
    auto pass = [&](std::uint64_t) {
        ++calls;
        VerificationReport r;
        r.statistic = 0.0;
        r.threshold = 1.0;
        return r.evaluate();
    };
    CHECK(run_check(pass, 1).passed);
    CHECK(calls == 1);
    calls = 0;
    auto exact_fail = [&](std::uint64_t) {
        ++calls;
        VerificationReport r;
        r.statistic = 1.0;
        r.threshold = 0.0;
        r.statistical = false;
        return r.evaluate();
    };
    CHECK_FALSE(run_check(exact_fail, 1).passed);
    CHECK(calls == 1);
}

TEST_CASE("run_checks: the group is rerun as a whole") {
    int calls = 0;
    auto group = [&](std::uint64_t s) {
        ++calls;
        VerificationReport ok;
        ok.statistic = 0.0;
        ok.threshold = 1.0;
        VerificationReport flaky;
        flaky.statistic = s == 5 ? 2.0 : 0.0;
        flaky.threshold = 1.0;
        return std::vector<VerificationReport>{ok.evaluate(), flaky.evaluate()};
    };
    const auto rs = run_checks(group, 5);
    CHECK(calls == 2);
    REQUIRE(rs.size() == 2);
    CHECK(rs[0].seed == rng::derive_seed(5, 1, rng::kRerun));
    CHECK(rs[1].passed);
    CHECK(rs[1].details.at("first_statistic") == "2");
}

TEST_CASE("every report carries its seed and the seed reproduces the statistic bitwise") {
    const auto r1 = check_levy_tanaka(300, 1e-3, serial_ctx(77));
    CHECK(r1.seed == 77);
    const auto r2 = check_levy_tanaka(300, 1e-3, serial_ctx(r1.seed));
    CHECK(std::bit_cast<std::uint64_t>(r1.statistic) == std::bit_cast<std::uint64_t>(r2.statistic));
    const auto wrapped = run_check([](std::uint64_t s) { return check_skew_occupation(0.25, 500, 1e-3, serial_ctx(s)); }, 78);
    const auto again = check_skew_occupation(0.25, 500, 1e-3, serial_ctx(wrapped.seed));
    CHECK(wrapped.statistic == again.statistic);
}

TEST_CASE("results do not depend on the worker count") {
    const auto sigma = Coefficient::step(2.0, -1.0);
    const auto serial = check_representation(sigma, 1.0 / 3.0, 60, 1e-3, 1.0, 0.01, serial_ctx(3));
    const auto par = check_representation(sigma, 1.0 / 3.0, 60, 1e-3, 1.0, 0.01, {3, ExecPolicy::threads(4)});
    CHECK(json_lines(serial) == json_lines(par));

    SuiteConfig a{100, 1e-3, serial_ctx(4)};
    SuiteConfig b{100, 1e-3, {4, ExecPolicy::threads(3)}};
    CHECK(json_lines(verify_appendix(0.25, a)) == json_lines(verify_appendix(0.25, b)));
}

TEST_CASE("phi and |x| uniqueness hold bitwise while X differs") {
    const auto phi = check_phi_uniqueness(2.0, -1.0, 30, 1e-3, 1.0, serial_ctx(5));
    CHECK(phi.statistic == 0.0);
    CHECK(phi.passed);
    CHECK_FALSE(phi.statistical);
    CHECK(std::stod(phi.details.at("paths_with_distinct_X")) > 0);
    CHECK(check_phi_adapted(2.0, -1.0, 30, 1e-3, 1.0, serial_ctx(5)).statistic == 0.0);

    const auto sigma = Coefficient::odd_piecewise({1.0}, {1.0, 2.0});
    const auto abs = check_abs_uniqueness(sigma, 30, 1e-3, 2.0, serial_ctx(6));
    CHECK(abs.statistic == 0.0);
    CHECK(std::stod(abs.details.at("paths_with_distinct_X")) > 0);
}

TEST_CASE("check_legall_condition: examples") {
    const std::vector<double> grid{-2, -1, -0.5, -0.1, 0, 0.1, 0.5, 1, 2};
    SECTION("Step(2, -1) with f = x + 9 * 1{x >= 0}") {
        auto sigma = Coefficient::step(2.0, -1.0);
        sigma.with_witness([](double x) { return x + (x >= 0.0 ? 9.0 : 0.0); });
        const auto r = check_legall_condition(sigma, grid);
        CHECK(r.passed);
        CHECK(r.details.at("witness") == "given");
    }
    SECTION("constant sigma with any increasing f") {
        auto sigma = Coefficient::step(1.0, 1.0);
        sigma.with_witness([](double x) { return 1e-3 * x; });
        CHECK(check_legall_condition(sigma, grid).passed);
    }
    SECTION("a jump with a small-slope continuous f fails with a witness pair") {
        auto sigma = Coefficient::step(2.0, -1.0);
        sigma.with_witness([](double x) { return 0.1 * x; });
        const auto r = check_legall_condition(sigma, grid);
        CHECK_FALSE(r.passed);
        const double x = std::stod(r.details.at("pair_x"));
        const double y = std::stod(r.details.at("pair_y"));
        CHECK(x < 0.0);
        CHECK(y >= 0.0);
        // the reported pair violates the inequality
        CHECK(std::pow(sigma(x) - sigma(y), 2) > std::abs(0.1 * x - 0.1 * y));
    }
    SECTION("a witness that is not increasing fails") {
        auto sigma = Coefficient::step(1.0, 1.0);
        sigma.with_witness([](double x) { return -x; });
        const auto r = check_legall_condition(sigma, grid);
        CHECK_FALSE(r.passed);
        CHECK(r.details.count("failure") == 1);
    }
    SECTION("the automatic witness covers piecewise-constant coefficients") {
        CHECK(check_legall_condition(Coefficient::odd_piecewise({1.0}, {1.0, 2.0}), grid).passed);
        CHECK(check_legall_condition(Coefficient::step(2.0, -1.0), grid).passed);
        CHECK(check_legall_condition(Coefficient::odd_piecewise({0.5, 1.5}, {1.0, 3.0, 0.5}), grid).passed);
    }
}

TEST_CASE("legall_witness: x + V * variation") {
    const auto f = legall_witness(Coefficient::step(2.0, -1.0));
    // one jump of size 3 at 0: V = 3, variation below 0 is 0, from 0 on it is 3
    CHECK(f(-1.0) == Approx(-1.0));
    CHECK(f(0.0) == Approx(9.0));
    CHECK(f(1.0) == Approx(10.0));
}

TEST_CASE("signed_count_process: hand path") {
    // dt = 0.1: + excursion on ticks 0..3, - on 3..8, + on 8..10
    const auto X = oracle::path({0, 0.1, 0.2, 0, -0.1, -0.1, -0.1, -0.1, 0, 0.3, 0}, 0.1);
    const auto idle = oracle::path(std::vector<double>(X.size(), 0.0), 0.1);
    // R = c^2 l > c^2 / x^2 reduces to l > 1 / x^2 on both sides
    const auto s = signed_count_process(X, 2.0, -1.0, {1.0, 2.0, 3.0}, idle);
    CHECK(s.N1 == std::vector<std::size_t>{0, 1, 2});
    CHECK(s.N2 == std::vector<std::size_t>{0, 1, 1});
    CHECK(s.Q == std::vector<long long>{0, 0, 1});
    CHECK(s.stop_time == Approx(1.0));

    // a clock reaching the budget at tick 5 keeps only the first excursion
    auto clock = idle;
    for (std::size_t k = 5; k < clock.size(); ++k) clock.values[k] = 1.0;
    const auto early = signed_count_process(X, 2.0, -1.0, {1.0, 2.0, 3.0}, clock);
    CHECK(early.N1 == std::vector<std::size_t>{0, 1, 1});
    CHECK(early.N2 == std::vector<std::size_t>{0, 0, 0});
    CHECK(early.stop_time == Approx(0.5));
    CHECK(early.local_time_norm == 1.0);
}

TEST_CASE("signed_count_process: preconditions") {
    const auto X = oracle::path({0, 0.1, 0}, 0.1);
    const auto clock = oracle::path({0, 0, 0}, 0.1);
    CHECK_THROWS_AS(signed_count_process(X, 1.0, 1.0, {1.0}, clock), InvalidArgument);
    CHECK_THROWS_AS(signed_count_process(X, 2.0, -1.0, {2.0, 1.0}, clock), InvalidArgument);
    CHECK_THROWS_AS(signed_count_process(X, 2.0, -1.0, {}, clock), InvalidArgument);
    CHECK_THROWS_AS(signed_count_process(X, 2.0, -1.0, {1.0}, oracle::path({0, 0}, 0.1)), InvalidArgument);
}

TEST_CASE("signed counts: Q = N1 - N2 on every series and p1 near |b| / (a + |b|)") {
    const auto r = check_signed_counts(2.0, -1.0, {1, 2, 5, 10}, 60, 1e-3, 10.0, serial_ctx(8));
    CHECK(r.details.at("q_identity_violations") == "0");
    CHECK(r.passed);
    CHECK(std::stod(r.details.at("N1")) + std::stod(r.details.at("N2")) >= 50);
    const auto sym = check_signed_counts(1.0, -1.0, {1, 2, 5, 10}, 60, 1e-3, 10.0, serial_ctx(8));
    CHECK(std::stod(sym.details.at("p")) == 0.5);
}

TEST_CASE("excursion_length_law: targets, monotone sweep and preconditions") {
    const auto rs = excursion_length_law({0.2, 0.1, 0.05}, 1.0, 200, 1e-4, 0.25, serial_ctx(9));
    REQUIRE(rs.size() == 4);
    CHECK(std::stod(rs[2].details.at("target")) == Approx(std::sqrt(2.0 / (0.05 * M_PI))));
    CHECK(std::stod(rs[2].details.at("target")) == Approx(3.568).epsilon(1e-3));
    CHECK(rs[3].name == "excursion_length_law_monotone");
    CHECK(rs[3].passed);
    for (const auto& r : rs) CHECK(r.passed);
    CHECK_THROWS_AS(excursion_length_law({1e-4}, 1.0, 10, 1e-4, 0.1, serial_ctx(9)), InvalidArgument);
    CHECK_THROWS_AS(excursion_length_law({0.2}, 1.0, 5, 1e-3, 0.1, serial_ctx(9)), InsufficientData);
}

TEST_CASE("excursion_length_law: x = 2 / pi has target 1") {
    const auto rs = excursion_length_law({2.0 / M_PI}, 1.0, 300, 1e-3, 1.0, serial_ctx(10));
    CHECK(std::stod(rs[0].details.at("target")) == Approx(1.0));
}

TEST_CASE("construction residual shrinks with dt") {
    const auto sweep = construction_residuals(Coefficient::step(2.0, -1.0), {1e-2, 1e-3}, 40, 1.0, serial_ctx(11));
    REQUIRE(sweep.medians.size() == 2);
    CHECK(sweep.medians[1] < sweep.medians[0]);
    CHECK_THROWS_AS(construction_residuals(Coefficient::step(2.0, -1.0), {1.5e-3, 1e-3}, 2, 1.0, serial_ctx(11)),
                    InvalidArgument);
    CHECK(check_residual_decreases(Coefficient::odd_piecewise({1.0}, {1.0, 2.0}), {1e-2, 1e-3}, 40, 1.0, serial_ctx(12))
              .passed);
}

TEST_CASE("Theorem 1 with (1, -1) and skew BM with alpha = 1/2 have the same X_1 law") {
    const double dt = 1e-4;
    const auto x = map_paths(2000, [&](std::size_t i) {
        const auto B = sample_brownian(rng::derive_seed(13, i, rng::kDriver), 1.0, dt);
        return construct_theorem1(B, 1.0, -1.0, rng::derive_seed(13, i, rng::kSigns)).X.values.back();
    });
    const auto y = map_paths(2000, [&](std::size_t i) {
        const auto B = sample_brownian(rng::derive_seed(14, i, rng::kDriver), 1.0, dt);
        return skew_construction(B, 0.5, rng::derive_seed(14, i, rng::kSigns)).X.values.back();
    });
    CHECK(stats::ks_two_sample(x, y).passed);
}

TEST_CASE("|sigma| = 1: the Theorem 2 suite matches the Theorem 1 suite report for report") {
    const SuiteConfig cfg{200, 1e-3, serial_ctx(15)};
    const auto t1 = by_suffix(verify_theorem1(1.0, -1.0, cfg));
    const auto t2 = by_suffix(verify_theorem2(Coefficient::step(1.0, -1.0), cfg));
    std::size_t common = 0;
    for (const auto& [name, stat] : t1) {
        const auto it = t2.find(name);
        if (it == t2.end()) continue;
        ++common;
        INFO(name);
        CHECK(std::bit_cast<std::uint64_t>(stat) == std::bit_cast<std::uint64_t>(it->second));
    }
    CHECK(common >= 4);
}

TEST_CASE("suites on small samples") {
    SECTION("theorem 1 (2, -1)") {
        const auto rs = verify_theorem1(2.0, -1.0, {300, 1e-3, serial_ctx(16)});
        for (const auto& r : rs) {
            INFO(r.name << " " << r.statistic << " " << r.rule << " " << r.threshold);
            CHECK(r.passed);
            CHECK(r.name.rfind("theorem1.", 0) == 0);
        }
    }
    SECTION("theorem 2 OddPiecewise([1], [1, 2])") {
        const auto rs = verify_theorem2(Coefficient::odd_piecewise({1.0}, {1.0, 2.0}), {300, 1e-3, serial_ctx(17)});
        for (const auto& r : rs) {
            INFO(r.name << " " << r.statistic << " " << r.rule << " " << r.threshold);
            CHECK(r.passed);
        }
    }
    SECTION("appendix alpha = 1/4") {
        const auto rs = verify_appendix(0.25, {300, 1e-3, serial_ctx(18)});
        for (const auto& r : rs) {
            INFO(r.name << " " << r.statistic << " " << r.rule << " " << r.threshold);
            CHECK(r.passed);
        }
    }
    CHECK_THROWS_AS(verify_theorem1(1.0, 1.0, {}), InvalidArgument);
    CHECK_THROWS_AS(verify_appendix(1.5, {}), InvalidArgument);
    CHECK_THROWS_AS(verify_theorem2(Coefficient::step(2.0, -1.0), {}), InvalidArgument);
}

TEST_CASE("local-time coherence reports three pairwise medians") {
    const auto rs = check_local_time_coherence(0.02, 40, 1e-4, 0.25, serial_ctx(19));
    REQUIRE(rs.size() == 3);
    CHECK(rs[0].name == "local_time_exact_vs_occupation");
    CHECK(rs[1].name == "local_time_exact_vs_downcrossing");
    CHECK(rs[2].name == "local_time_occupation_vs_downcrossing");
    for (const auto& r : rs) CHECK(r.passed);
}

TEST_CASE("time change checks pass on a Theorem 2 coefficient") {
    for (const auto& r : check_time_change(Coefficient::odd_piecewise({1.0}, {1.0, 2.0}), 5, 1e-3, serial_ctx(20))) {
        INFO(r.name << " " << r.statistic);
        CHECK(r.passed);
    }
}
