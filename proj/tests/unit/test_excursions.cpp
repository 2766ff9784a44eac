#include "exlab/errors.hpp"
#include "exlab/excursions.hpp"
#include "exlab/paths.hpp"
#include "exlab/rng.hpp"
#include "oracles.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

using namespace exlab;
using Catch::Approx;

namespace {

ExcursionInterval interval(std::size_t begin, std::size_t end, double dt) {
    ExcursionInterval iv;
    iv.begin = begin;
    iv.end = end;
    iv.dt = dt;
    return iv;
}

// Nonnegative path on a dt = 0.1 grid whose zeros are exactly the given ticks.
SamplePath with_zeros(const std::vector<std::size_t>& zeros, std::size_t size) {
    std::vector<double> v(size, 1.0);
    for (auto z : zeros) v[z] = 0.0;
    return oracle::path(v, 0.1, PathKind::reflected);
}

SamplePath reflecting(std::uint64_t seed, double horizon, double dt) {
    return reflect_skorokhod(sample_brownian(seed, horizon, dt)).Y;
}

}  // namespace

TEST_CASE("zero_set: literal scans") {
    CHECK(zero_set(oracle::path({0, 0, 0}), 0.0) == std::vector<std::size_t>{0, 1, 2});
    CHECK(zero_set(oracle::path({0, 1, 0, 2}), 0.0) == std::vector<std::size_t>{0, 2});
    CHECK(zero_set(oracle::path({0.5, 1}), 0.6) == std::vector<std::size_t>{0});
}

TEST_CASE("zero_set: a positive tolerance is a superset and barely moves the long-excursion count") {
    const double dt = 1e-5;
    std::size_t strict = 0;
    std::size_t loose = 0;
    for (std::uint64_t s = 0; s < 10; ++s) {
        const auto Y = reflecting(rng::derive_seed(31, s), 1.0, dt);
        const auto z0 = zero_set(Y, 0.0);
        const auto z1 = zero_set(Y, 1e-2 * std::sqrt(dt));
        REQUIRE(std::includes(z1.begin(), z1.end(), z0.begin(), z0.end()));
        strict += excursion_intervals(Y, 0.0, 100 * dt).intervals.size();
        loose += excursion_intervals(Y, 1e-2 * std::sqrt(dt), 100 * dt).intervals.size();
    }
    REQUIRE(strict > 0);
    CHECK(std::abs(static_cast<double>(loose) - static_cast<double>(strict)) / static_cast<double>(strict) < 0.05);
}

TEST_CASE("excursion_intervals: direct scans") {
    auto ex = excursion_intervals(oracle::path({0, 1, 0, 2, 0}), 0.0, 0.0);
    REQUIRE(ex.intervals.size() == 2);
    CHECK(ex.intervals[0].begin == 0);
    CHECK(ex.intervals[0].end == 2);
    CHECK(ex.intervals[1].begin == 2);
    CHECK(ex.intervals[1].end == 4);
    CHECK_FALSE(ex.intervals[1].censored);

    CHECK(excursion_intervals(oracle::path({0, 0, 0}), 0.0, 0.0).intervals.empty());

    ex = excursion_intervals(oracle::path({0, 1, 2}), 0.0, 0.0);
    REQUIRE(ex.intervals.size() == 1);
    CHECK(ex.intervals[0].censored);
    CHECK(ex.intervals[0].end == 2);
}

TEST_CASE("excursion_intervals: short intervals are discarded and counted") {
    const auto ex = excursion_intervals(oracle::path({0, 1, 0, 1, 1, 1, 0}), 0.0, 3.0);
    REQUIRE(ex.intervals.size() == 1);
    CHECK(ex.intervals[0].begin == 2);
    CHECK(ex.discarded == 1);
    CHECK(ex.discarded_time == 2.0);
}

TEST_CASE("excursion_intervals: disjoint and maximal on reflecting paths") {
    for (std::uint64_t s = 0; s < 10; ++s) {
        const auto Y = reflecting(s, 1.0, 1e-4);
        const auto ex = excursion_intervals(Y, 0.0, 0.0);
        for (std::size_t i = 0; i < ex.intervals.size(); ++i) {
            const auto& iv = ex.intervals[i];
            if (i > 0) REQUIRE(ex.intervals[i - 1].end <= iv.begin);
            for (std::size_t k = iv.begin + 1; k < iv.end; ++k) REQUIRE(Y[k] > 0.0);
            REQUIRE(Y[iv.begin] == 0.0);
            if (!iv.censored) REQUIRE(Y[iv.end] == 0.0);
        }
    }
}

TEST_CASE("excursion_intervals: mean discarded time below 100 dt stays under 2% of the horizon") {
    // Per path the discarded time scales with ell_1 and exceeds 2% about a
    // third of the time; the mean is about sqrt(2 delta / pi) E ell_1 = 1.9%.
    const double dt = 1e-5;
    std::vector<double> discarded;
    for (std::uint64_t s = 0; s < 100; ++s)
        discarded.push_back(excursion_intervals(reflecting(rng::derive_seed(17, s), 1.0, dt), 0.0, 100 * dt).discarded_time);
    CHECK(oracle::sample_mean(discarded) < 0.02);
}

TEST_CASE("epoch_partition: hand enumeration") {
    CHECK(epoch_partition_times({0, 0.5, 2.5, 3.0}, 1.0) == std::vector<double>{0, 2.5});
    CHECK(epoch_partition_times({0, 0.5, 2.5, 3.0}, 0.5) == std::vector<double>{0, 0.5, 2.5, 3.0});
    CHECK(epoch_partition_times({0}, 1.0) == std::vector<double>{0});
    CHECK(epoch_partition({0, 5, 25, 30}, 0.1, 1.0) == std::vector<std::size_t>{0, 25});
    CHECK(epoch_partition({0, 5, 25, 30}, 0.1, 0.5) == std::vector<std::size_t>{0, 5, 25, 30});
}

TEST_CASE("epoch_partition: every boundary is a zero at least one unit after the previous") {
    const auto Y = reflecting(3, 5.0, 1e-4);
    const auto zeros = zero_set(Y, 0.0);
    const auto xi = epoch_partition(zeros, Y.dt, 1.0);
    for (std::size_t i = 1; i < xi.size(); ++i) {
        REQUIRE(Y[xi[i]] == 0.0);
        REQUIRE(xi[i] >= xi[i - 1] + 10000);
        // no zero in [xi_{i-1} + 1, xi_i)
        const auto it = std::lower_bound(zeros.begin(), zeros.end(), xi[i - 1] + 10000);
        REQUIRE(*it == xi[i]);
    }
}

TEST_CASE("order_excursions: hand enumeration of the order") {
    // zero set {0, 0.5, 2.5} on a dt = 0.1 grid
    const auto Y = with_zeros({0, 5, 25}, 26);
    const auto ix = index_excursions(Y, 0.0, 0.0);
    CHECK(ix.xi == std::vector<std::size_t>{0, 25});
    REQUIRE(ix.intervals.size() == 2);
    CHECK(ix.intervals[0].epoch == 1);
    CHECK(ix.intervals[0].rank == 1);
    CHECK(ix.intervals[0].g() == Approx(0.5));
    CHECK(ix.intervals[0].d() == Approx(2.5));
    CHECK(ix.intervals[1].rank == 2);
    CHECK(ix.intervals[1].g() == 0.0);
    CHECK(ix.intervals[1].d() == Approx(0.5));
}

TEST_CASE("order_excursions: equal lengths rank by left endpoint") {
    const auto ix = order_excursions({interval(6, 9, 0.1), interval(1, 4, 0.1)}, {0}, 0.1, 10);
    REQUIRE(ix.intervals.size() == 2);
    CHECK(ix.intervals[0].begin == 1);
    CHECK(ix.intervals[0].rank == 1);
    CHECK(ix.intervals[1].begin == 6);
    CHECK(ix.intervals[1].rank == 2);
}

TEST_CASE("order_excursions: a single interval is (1, 1)") {
    const auto ix = order_excursions({interval(0, 5, 0.1)}, {0}, 0.1, 6);
    REQUIRE(ix.intervals.size() == 1);
    CHECK(ix.intervals[0].epoch == 1);
    CHECK(ix.intervals[0].rank == 1);
}

TEST_CASE("order_excursions: an interval across an epoch boundary is an internal inconsistency") {
    CHECK_THROWS_AS(order_excursions({interval(5, 15, 0.1)}, {0, 10}, 0.1, 20), InternalInconsistency);
}

TEST_CASE("order_excursions: a strict total order within every epoch") {
    for (std::uint64_t s = 0; s < 5; ++s) {
        const auto ix = index_excursions(reflecting(s, 4.0, 1e-4), 0.0, 1e-2);
        std::set<std::pair<std::size_t, std::size_t>> keys;
        for (std::size_t i = 0; i < ix.intervals.size(); ++i) {
            const auto& x = ix.intervals[i];
            REQUIRE(keys.insert({x.epoch, x.rank}).second);
            if (x.epoch < ix.xi.size()) {
                REQUIRE(x.begin >= ix.xi[x.epoch - 1]);
                REQUIRE(x.end <= ix.xi[x.epoch]);
            }
            for (std::size_t j = 0; j < ix.intervals.size(); ++j) {
                const auto& y = ix.intervals[j];
                if (i == j || x.epoch != y.epoch) continue;
                REQUIRE(precedes(x, y) != precedes(y, x));
                REQUIRE(precedes(x, y) == (x.rank < y.rank));
            }
        }
    }
}

TEST_CASE("straddling: hand enumeration and the open-interval convention") {
    const auto Y = with_zeros({0, 5, 25}, 26);
    const auto ix = index_excursions(Y, 0.0, 0.0);
    const auto e = straddling(Y, ix, 1.0);
    REQUIRE(e.has_value());
    CHECK(e->interval.g() == Approx(0.5));
    CHECK(e->interval.d() == Approx(2.5));
    CHECK_FALSE(straddling(Y, ix, 0.5).has_value());
    CHECK_FALSE(straddling(Y, ix, 2.5).has_value());
    CHECK_FALSE(straddling(Y, ix, 0.0).has_value());
}

TEST_CASE("excursions start and end at zero with nonzero interiors") {
    const auto Y = reflecting(12, 2.0, 1e-4);
    const auto ix = index_excursions(Y, 0.0, 1e-3);
    for (const auto& e : decompose(Y, ix)) {
        REQUIRE(e.samples.front() == 0.0);
        if (!e.interval.censored) REQUIRE(e.samples.back() == 0.0);
        for (std::size_t k = 1; k + 1 < e.samples.size(); ++k) REQUIRE(e.samples[k] > 0.0);
    }
}

TEST_CASE("scale_excursion: length over sigma^2, amplitude over |sigma|") {
    // positive tent of length 4 on a dt = 0.1 grid, peak 2 at u = 2
    std::vector<double> v;
    for (int k = 0; k <= 40; ++k) v.push_back(2.0 - std::abs(k - 20) / 10.0);
    v.front() = v.back() = 0.0;
    const auto P = oracle::path(v, 0.1);
    const auto e = make_excursion(P, interval(0, 40, 0.1));
    const auto s = scale_excursion(e, 2.0, -1.0);
    CHECK(s.length == Approx(1.0));
    CHECK(s.samples.size() == 11);
    CHECK(*std::max_element(s.samples.begin(), s.samples.end()) == Approx(1.0));

    std::vector<double> neg(v);
    for (auto& x : neg) x = -x;
    const auto n = scale_excursion(make_excursion(oracle::path(neg, 0.1), interval(0, 40, 0.1)), 1.0, -1.0);
    CHECK(n.length == Approx(4.0));
    CHECK(*std::min_element(n.samples.begin(), n.samples.end()) == Approx(-2.0));
}

TEST_CASE("scale_excursion: the order of a positive and a negative excursion can flip") {
    std::vector<double> v(41, 0.0);
    for (int k = 1; k < 30; ++k) v[k] = 1.0;   // positive, length 3.0
    for (int k = 31; k < 40; ++k) v[k] = -1.0;  // negative, length 1.0
    const auto P = oracle::path(v, 0.1);
    const auto pos = make_excursion(P, interval(0, 30, 0.1));
    const auto neg = make_excursion(P, interval(30, 40, 0.1));
    CHECK(precedes(pos, neg));
    const auto sp = scale_excursion(pos, 2.0, -1.0);
    const auto sn = scale_excursion(neg, 2.0, -1.0);
    CHECK(sp.length == Approx(0.75));
    CHECK(sn.length == Approx(1.0));
    CHECK(precedes(sn, sp));
}

TEST_CASE("scale_excursion rejects mixed signs") {
    const auto P = oracle::path({0, 1, -1, 0}, 0.1);
    CHECK_THROWS_AS(scale_excursion(make_excursion(P, interval(0, 3, 0.1)), 2.0, -1.0), InvalidArgument);
}

TEST_CASE("label_ito_mckean: hand walk of the probe sequence") {
    const auto l = label_ito_mckean({interval(3, 12, 0.1), interval(15, 18, 0.1)});
    REQUIRE(l.labels.size() == 2);
    REQUIRE(l.labels[0].has_value());
    REQUIRE(l.labels[1].has_value());
    CHECK(l.labels[0]->first == 1);
    CHECK(l.labels[1]->first == 2);
    CHECK(l.unlabeled == 0);

    const auto one = label_ito_mckean({interval(5, 15, 0.1)});
    CHECK(one.labels[0]->first == 1);
}

TEST_CASE("label_ito_mckean: intervals below the probe resolution stay unlabeled") {
    const auto l = label_ito_mckean({interval(11, 12, 0.1), interval(3, 7, 0.1)}, 1);
    CHECK_FALSE(l.labels[0].has_value());
    REQUIRE(l.labels[1].has_value());
    CHECK(l.labels[1]->first == 1);
    CHECK(l.unlabeled == 1);
}

TEST_CASE("label_ito_mckean: probe order 1, 1/2, 3/2, 2, 1/4, ...") {
    // one interval around each of the first probes, listed out of order
    const auto l = label_ito_mckean({interval(24, 26, 0.01), interval(195, 205, 0.01), interval(145, 155, 0.01),
                                     interval(45, 55, 0.01), interval(95, 105, 0.01)});
    std::vector<std::uint64_t> n;
    for (const auto& x : l.labels) n.push_back(x->first);
    CHECK(n == std::vector<std::uint64_t>{5, 4, 3, 2, 1});
}

TEST_CASE("label_ito_mckean labels every interval above the automatic depth") {
    const auto ix = index_excursions(reflecting(5, 3.0, 1e-4), 0.0, 1e-2);
    const auto l = label_ito_mckean(ix.intervals);
    CHECK(l.unlabeled == 0);
    std::set<std::uint64_t> seen;
    for (const auto& x : l.labels) REQUIRE(seen.insert(x->first).second);
    CHECK(*seen.rbegin() == seen.size());
}

TEST_CASE("label_blumenthal: hand bucketing") {
    const auto l = label_blumenthal({interval(0, 20, 0.1), interval(25, 32, 0.1), interval(40, 46, 0.1)});
    CHECK(*l.labels[0] == LabelKey{1, 1});
    CHECK(*l.labels[1] == LabelKey{2, 1});
    CHECK(*l.labels[2] == LabelKey{2, 2});
    CHECK(label_blumenthal({}).labels.empty());
}

TEST_CASE("label_blumenthal: a length of exactly 1/n falls in bucket n + 1") {
    CHECK(*label_blumenthal({interval(0, 5, 0.1)}).labels[0] == LabelKey{3, 1});
    CHECK(*label_blumenthal({interval(0, 10, 0.1)}).labels[0] == LabelKey{2, 1});
    CHECK(*label_blumenthal({interval(0, 25, 0.01)}).labels[0] == LabelKey{5, 1});
}

TEST_CASE("relabel: identical labelings give the identity") {
    const auto ix = index_excursions(reflecting(8, 2.0, 1e-4), 0.0, 1e-2);
    const auto e = label_epochs(ix.intervals);
    for (const auto& [from, to] : relabel(ix.intervals, e, e)) CHECK(from == to);
}

TEST_CASE("relabel: epoch order against Blumenthal buckets by hand") {
    const auto ix = index_excursions(with_zeros({0, 5, 25}, 26), 0.0, 0.0);
    const auto map = relabel(ix.intervals, label_epochs(ix.intervals), label_blumenthal(ix.intervals));
    CHECK(map.at({1, 1}) == LabelKey{1, 1});
    CHECK(map.at({1, 2}) == LabelKey{3, 1});
}

TEST_CASE("relabel: transported signs keep their multiset and interval") {
    const auto ix = index_excursions(reflecting(9, 3.0, 1e-4), 0.0, 1e-2);
    const auto e = label_epochs(ix.intervals);
    const auto b = label_blumenthal(ix.intervals);
    const auto m = label_ito_mckean(ix.intervals);
    std::map<LabelKey, int> signs;
    for (std::size_t i = 0; i < ix.intervals.size(); ++i) signs[*e.labels[i]] = i % 3 == 0 ? 1 : -1;
    const auto to_b = transport(signs, relabel(ix.intervals, e, b));
    const auto to_m = transport(signs, relabel(ix.intervals, e, m));
    for (std::size_t i = 0; i < ix.intervals.size(); ++i) {
        CHECK(to_b.at(*b.labels[i]) == signs.at(*e.labels[i]));
        CHECK(to_m.at(*m.labels[i]) == signs.at(*e.labels[i]));
    }
    auto positives = [](const std::map<LabelKey, int>& s) {
        return std::count_if(s.begin(), s.end(), [](const auto& kv) { return kv.second > 0; });
    };
    CHECK(positives(to_b) == positives(signs));
    CHECK(positives(to_m) == positives(signs));
}

TEST_CASE("relabel: mismatched interval sets are rejected") {
    const std::vector<ExcursionInterval> ivs{interval(0, 5, 0.1), interval(6, 9, 0.1)};
    Labeling a{"a", {LabelKey{1, 1}, LabelKey{1, 2}}, 0};
    Labeling b{"b", {LabelKey{1, 1}, std::nullopt}, 1};
    CHECK_THROWS_AS(relabel(ivs, a, b), InvalidArgument);
}

TEST_CASE("indexing serialization is idempotent") {
    const auto ix = index_excursions(reflecting(14, 3.0, 1e-4), 0.0, 1e-2);
    const auto text = indexing_to_json(ix);
    const auto back = indexing_from_json(text);
    CHECK(indexing_to_json(back) == text);
    REQUIRE(back.intervals.size() == ix.intervals.size());
    CHECK(back.xi == ix.xi);
    // re-ordering the reloaded intervals reproduces the labels
    auto shuffled = back.intervals;
    std::reverse(shuffled.begin(), shuffled.end());
    const auto again = order_excursions(shuffled, back.xi, back.dt, back.size);
    for (std::size_t i = 0; i < ix.intervals.size(); ++i) {
        CHECK(again.intervals[i].begin == ix.intervals[i].begin);
        CHECK(again.intervals[i].rank == ix.intervals[i].rank);
        CHECK(again.intervals[i].epoch == ix.intervals[i].epoch);
    }
}

TEST_CASE("indexing CSV has one row per interval") {
    const auto ix = index_excursions(with_zeros({0, 5, 25}, 26), 0.0, 0.0);
    std::stringstream s;
    write_indexing_csv(s, ix);
    std::string line;
    std::getline(s, line);
    CHECK(line == "g,d,epoch,rank,length,censored");
    std::size_t rows = 0;
    while (std::getline(s, line)) ++rows;
    CHECK(rows == 2);
}
