#pragma once

// Zero sets, excursion intervals and their labelings.
//
// Interval endpoints are stored as grid ticks so that equal lengths compare
// equal exactly; times are ticks * dt.

#include "exlab/paths.hpp"

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace exlab {

/// Open interval (g, d) = (begin * dt, end * dt) on which the path is away
/// from zero. A censored interval was still open at the horizon; its d is the
/// horizon and its length a lower bound.
struct ExcursionInterval {
    std::size_t begin = 0;
    std::size_t end = 0;
    double dt = 1.0;
    bool censored = false;
    std::size_t epoch = 0;  // 0 until ordered
    std::size_t rank = 0;   // 0 until ordered

    std::size_t ticks() const { return end - begin; }
    double g() const { return static_cast<double>(begin) * dt; }
    double d() const { return static_cast<double>(end) * dt; }
    double length() const { return static_cast<double>(ticks()) * dt; }
    bool contains(double t) const { return g() < t && t < d(); }
};

/// The within-epoch order: longer first, then smaller left endpoint.
inline bool precedes(const ExcursionInterval& x, const ExcursionInterval& y) {
    if (x.ticks() != y.ticks()) return x.ticks() > y.ticks();
    return x.begin < y.begin;
}

struct ExtractedIntervals {
    std::vector<ExcursionInterval> intervals;
    std::size_t discarded = 0;
    double discarded_time = 0.0;
};

/// Epoch boundaries xi_0 = 0 < xi_1 < ... (in ticks) and the ordered intervals.
/// Intervals with epoch == xi.size() lie after the last boundary (open epoch).
struct ExcursionIndexing {
    std::vector<std::size_t> xi;
    std::vector<ExcursionInterval> intervals;  // sorted by (epoch, rank)
    double dt = 1.0;
    std::size_t size = 1;  // grid points of the source path
    double delta_min = 0.0;
    double tol = 0.0;
    double epoch_unit = 1.0;
    std::size_t discarded = 0;

    double xi_time(std::size_t i) const { return static_cast<double>(xi[i]) * dt; }
    double horizon() const { return static_cast<double>(size - 1) * dt; }
    /// Intervals of epoch i in rank order.
    std::vector<ExcursionInterval> epoch(std::size_t i) const;
    /// Index into `intervals` of (epoch, rank), or nullopt.
    std::optional<std::size_t> find(std::size_t epoch, std::size_t rank) const;
};

/// A path restricted to an excursion interval and shifted to start at time 0.
struct Excursion {
    ExcursionInterval interval;
    std::vector<double> samples;
    double dt = 1.0;
    double length = 0.0;
    std::optional<int> sign;
};

/// Grid indices with Y <= tol.
std::vector<std::size_t> zero_set(const SamplePath& Y, double tol);

/// Maximal runs of `false` in the zero mask, bounded by zero indices. Runs
/// shorter than delta_min are dropped and counted.
ExtractedIntervals intervals_from_mask(const std::vector<bool>& zero, double dt, double delta_min);

/// Intervals on which Y > tol.
ExtractedIntervals excursion_intervals(const SamplePath& Y, double tol, double delta_min);

/// xi_{i+1} = first zero index at or after xi_i + unit; stops when none is left.
std::vector<std::size_t> epoch_partition(const std::vector<std::size_t>& zeros, double dt, double unit = 1.0);
/// Same rule on arbitrary zero times; returns times.
std::vector<double> epoch_partition_times(const std::vector<double>& zeros, double unit = 1.0);

/// Assigns (epoch, rank). Throws InternalInconsistency for an interval that
/// straddles an epoch boundary.
ExcursionIndexing order_excursions(std::vector<ExcursionInterval> intervals, std::vector<std::size_t> xi,
                                   double dt, std::size_t size);

/// Zero set, intervals, epochs and ordering in one pass.
ExcursionIndexing index_excursions(const SamplePath& Y, double tol, double delta_min, double epoch_unit = 1.0);

/// The indexed interval containing t, or nullopt when t is not inside one.
std::optional<Excursion> straddling(const SamplePath& Y, const ExcursionIndexing& indexing, double t);

Excursion make_excursion(const SamplePath& path, const ExcursionInterval& interval);
std::vector<Excursion> decompose(const SamplePath& path, const ExcursionIndexing& indexing);

/// s_{a,b}(e)(u) = e(sigma^2 u) / |sigma| with sigma = a on positive and b on
/// negative excursions, resampled on the source grid.
Excursion scale_excursion(const Excursion& e, double a, double b);

/// Order of excursions by (length desc, g asc) on their own lengths.
bool precedes(const Excursion& x, const Excursion& y);

// ---------------------------------------------------------------------------
// Alternative numberings

using LabelKey = std::pair<std::uint64_t, std::uint64_t>;

/// A numbering of intervals: entries[i] labels intervals[i] of the source.
struct Labeling {
    std::string scheme;
    std::vector<std::optional<LabelKey>> labels;
    std::size_t unlabeled = 0;
};

/// Depth needed so that every interval longer than min_length meets a probe.
std::size_t ito_mckean_depth(double min_length, double max_right_end);

/// Probe sequence 1, 1/2, 3/2, 2, 1/4, ...: level k holds the odd multiples of
/// 2^-k below k + 1, then k + 1. Interval n holds the first probe that no
/// earlier interval holds. Labels are (n, 0).
Labeling label_ito_mckean(const std::vector<ExcursionInterval>& intervals, std::size_t max_level = 0);

/// (n, k): bucket n holds lengths in (1/n, 1/(n-1)], bucket 1 lengths > 1;
/// k ranks left to right within the bucket.
Labeling label_blumenthal(const std::vector<ExcursionInterval>& intervals);

/// (epoch, rank) as assigned by order_excursions.
Labeling label_epochs(const std::vector<ExcursionInterval>& intervals);

/// Map from labels of `a` to labels of `b` over the same intervals. Throws
/// InvalidArgument when the labeled interval sets differ.
std::map<LabelKey, LabelKey> relabel(const std::vector<ExcursionInterval>& intervals, const Labeling& a,
                                     const Labeling& b);

/// Moves label-indexed values through a correspondence.
template <class T>
std::map<LabelKey, T> transport(const std::map<LabelKey, T>& values, const std::map<LabelKey, LabelKey>& map) {
    std::map<LabelKey, T> out;
    for (const auto& [key, v] : values) out.emplace(map.at(key), v);
    return out;
}

// ---------------------------------------------------------------------------
// Serialization

std::string indexing_to_json(const ExcursionIndexing& indexing);
ExcursionIndexing indexing_from_json(std::string_view text);
void write_indexing_csv(std::ostream& out, const ExcursionIndexing& indexing);

}  // namespace exlab
