#include "exlab/errors.hpp"
#include "exlab/parallel.hpp"
#include "exlab/paths.hpp"
#include "exlab/rng.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <atomic>

using namespace exlab;

TEST_CASE("map_paths: results land at their index for every policy") {
    for (auto policy : {ExecPolicy::serial(), ExecPolicy::threads(1), ExecPolicy::threads(4), ExecPolicy{}}) {
        const auto v = map_paths(1000, [](std::size_t i) { return i * i; }, policy);
        REQUIRE(v.size() == 1000);
        for (std::size_t i = 0; i < v.size(); ++i) REQUIRE(v[i] == i * i);
    }
    CHECK(map_paths(0, [](std::size_t i) { return i; }).empty());
}

TEST_CASE("map_paths: every index runs exactly once") {
    std::vector<std::atomic<int>> hits(500);
    map_paths(500, [&](std::size_t i) { return ++hits[i]; }, ExecPolicy::threads(4));
    for (const auto& h : hits) REQUIRE(h.load() == 1);
}

TEST_CASE("map_paths: seeded paths are identical serially and in parallel") {
    auto f = [](std::size_t i) {
        return reflect_skorokhod(sample_brownian(rng::derive_seed(1, i, rng::kDriver), 1.0, 1e-3)).Y.values;
    };
    CHECK(map_paths(64, f, ExecPolicy::serial()) == map_paths(64, f, ExecPolicy::threads(4)));
}

TEST_CASE("map_paths: an exception in a worker reaches the caller") {
    auto f = [](std::size_t i) -> int {
        if (i == 37) throw NumericalFailure("path 37");
        return 0;
    };
    CHECK_THROWS_AS(map_paths(100, f, ExecPolicy::threads(4)), NumericalFailure);
    CHECK_THROWS_AS(map_paths(100, f, ExecPolicy::serial()), NumericalFailure);
}
