#include "exlab/excursions.hpp"

#include "exlab/errors.hpp"
#include "exlab/format.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <ostream>
#include <set>
#include <tuple>

namespace exlab {

namespace {

constexpr double kSlack = 1e-9;
constexpr std::size_t kMaxProbeLevel = 60;

std::size_t unit_ticks(double unit, double dt) {
    if (!(unit > 0.0) || !std::isfinite(unit)) throw InvalidArgument("epoch unit must be positive");
    if (!(dt > 0.0)) throw InvalidArgument("dt must be positive");
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(unit / dt - kSlack)));
}

double interpolate_samples(const std::vector<double>& s, double dt, double u) {
    if (u <= 0.0) return s.front();
    const double x = u / dt;
    const auto k = static_cast<std::size_t>(std::floor(x));
    if (k + 1 >= s.size()) return s.back();
    const double w = x - static_cast<double>(k);
    return s[k] + w * (s[k + 1] - s[k]);
}

int definite_sign(const std::vector<double>& samples) {
    bool pos = false;
    bool neg = false;
    for (std::size_t k = 1; k + 1 < samples.size(); ++k) {
        if (samples[k] > 0.0) pos = true;
        else if (samples[k] < 0.0) neg = true;
        else return 0;
    }
    if (pos == neg) return 0;
    return pos ? 1 : -1;
}

// Smallest probe at the lowest level that lies in (g, d).
std::optional<std::pair<std::size_t, double>> first_probe(double g, double d, std::size_t max_level) {
    if (g < 1.0 && 1.0 < d) return std::make_pair(std::size_t{0}, 1.0);
    for (std::size_t k = 1; k <= max_level; ++k) {
        const double scale = std::ldexp(1.0, static_cast<int>(k));
        const double cap = static_cast<double>(k + 1);
        double n = std::floor(g * scale) + 1.0;
        if (std::fmod(n, 2.0) == 0.0) n += 1.0;
        const double v = n / scale;
        if (v > g && v < d && v < cap) return std::make_pair(k, v);
        if (g < cap && cap < d) return std::make_pair(k, cap);
    }
    return std::nullopt;
}

}  // namespace

std::vector<ExcursionInterval> ExcursionIndexing::epoch(std::size_t i) const {
    std::vector<ExcursionInterval> out;
    for (const auto& iv : intervals)
        if (iv.epoch == i) out.push_back(iv);
    return out;
}

std::optional<std::size_t> ExcursionIndexing::find(std::size_t e, std::size_t r) const {
    const auto it = std::lower_bound(intervals.begin(), intervals.end(), std::make_pair(e, r),
                                     [](const ExcursionInterval& iv, const std::pair<std::size_t, std::size_t>& key) {
                                         return std::tie(iv.epoch, iv.rank) < std::tie(key.first, key.second);
                                     });
    if (it == intervals.end() || it->epoch != e || it->rank != r) return std::nullopt;
    return static_cast<std::size_t>(it - intervals.begin());
}

std::vector<std::size_t> zero_set(const SamplePath& Y, double tol) {
    if (!(tol >= 0.0)) throw InvalidArgument("tol must be nonnegative");
    std::vector<std::size_t> out;
    for (std::size_t k = 0; k < Y.size(); ++k)
        if (Y.values[k] <= tol) out.push_back(k);
    return out;
}

ExtractedIntervals intervals_from_mask(const std::vector<bool>& zero, double dt, double delta_min) {
    if (!(delta_min >= 0.0)) throw InvalidArgument("delta_min must be nonnegative");
    ExtractedIntervals out;
    const std::size_t n = zero.size();
    std::size_t i = 0;
    while (i < n) {
        if (zero[i]) {
            ++i;
            continue;
        }
        const std::size_t start = i;
        while (i < n && !zero[i]) ++i;
        ExcursionInterval iv;
        iv.dt = dt;
        iv.begin = start == 0 ? 0 : start - 1;
        iv.censored = i == n;
        iv.end = iv.censored ? n - 1 : i;
        if (iv.end == iv.begin) continue;
        if (iv.length() < delta_min) {
            ++out.discarded;
            out.discarded_time += iv.length();
            continue;
        }
        out.intervals.push_back(iv);
    }
    return out;
}

ExtractedIntervals excursion_intervals(const SamplePath& Y, double tol, double delta_min) {
    if (!(tol >= 0.0)) throw InvalidArgument("tol must be nonnegative");
    std::vector<bool> zero(Y.size());
    for (std::size_t k = 0; k < Y.size(); ++k) zero[k] = Y.values[k] <= tol;
    return intervals_from_mask(zero, Y.dt, delta_min);
}

std::vector<std::size_t> epoch_partition(const std::vector<std::size_t>& zeros, double dt, double unit) {
    const std::size_t u = unit_ticks(unit, dt);
    std::vector<std::size_t> xi{0};
    for (;;) {
        const auto it = std::lower_bound(zeros.begin(), zeros.end(), xi.back() + u);
        if (it == zeros.end()) break;
        xi.push_back(*it);
    }
    return xi;
}

std::vector<double> epoch_partition_times(const std::vector<double>& zeros, double unit) {
    if (!(unit > 0.0) || !std::isfinite(unit)) throw InvalidArgument("epoch unit must be positive");
    std::vector<double> xi{0.0};
    for (;;) {
        const auto it = std::lower_bound(zeros.begin(), zeros.end(), xi.back() + unit);
        if (it == zeros.end()) break;
        xi.push_back(*it);
    }
    return xi;
}

ExcursionIndexing order_excursions(std::vector<ExcursionInterval> intervals, std::vector<std::size_t> xi, double dt,
                                   std::size_t size) {
    if (xi.empty() || xi.front() != 0) throw InvalidArgument("epoch boundaries must start at 0");
    if (!std::is_sorted(xi.begin(), xi.end())) throw InvalidArgument("epoch boundaries must increase");
    for (auto& iv : intervals) {
        const auto e = static_cast<std::size_t>(std::upper_bound(xi.begin(), xi.end(), iv.begin) - xi.begin());
        if (e < xi.size() && iv.end > xi[e])
            throw InternalInconsistency("excursion interval (" + fmt_double(iv.g()) + ", " + fmt_double(iv.d()) +
                                        ") straddles epoch boundary " + fmt_double(static_cast<double>(xi[e]) * dt));
        iv.epoch = e;
    }
    std::sort(intervals.begin(), intervals.end(), [](const ExcursionInterval& x, const ExcursionInterval& y) {
        if (x.epoch != y.epoch) return x.epoch < y.epoch;
        return precedes(x, y);
    });
    for (std::size_t i = 0; i < intervals.size(); ++i) {
        const bool first = i == 0 || intervals[i - 1].epoch != intervals[i].epoch;
        intervals[i].rank = first ? 1 : intervals[i - 1].rank + 1;
    }
    ExcursionIndexing out;
    out.xi = std::move(xi);
    out.intervals = std::move(intervals);
    out.dt = dt;
    out.size = size;
    return out;
}

ExcursionIndexing index_excursions(const SamplePath& Y, double tol, double delta_min, double epoch_unit) {
    const auto zeros = zero_set(Y, tol);
    auto extracted = excursion_intervals(Y, tol, delta_min);
    auto out = order_excursions(std::move(extracted.intervals), epoch_partition(zeros, Y.dt, epoch_unit), Y.dt,
                                Y.size());
    out.delta_min = delta_min;
    out.tol = tol;
    out.epoch_unit = epoch_unit;
    out.discarded = extracted.discarded;
    return out;
}

Excursion make_excursion(const SamplePath& path, const ExcursionInterval& interval) {
    if (interval.end >= path.size()) throw InvalidArgument("excursion interval beyond the path");
    Excursion e;
    e.interval = interval;
    e.dt = path.dt;
    e.length = interval.length();
    e.samples.assign(path.values.begin() + static_cast<std::ptrdiff_t>(interval.begin),
                     path.values.begin() + static_cast<std::ptrdiff_t>(interval.end) + 1);
    return e;
}

std::vector<Excursion> decompose(const SamplePath& path, const ExcursionIndexing& indexing) {
    std::vector<Excursion> out;
    out.reserve(indexing.intervals.size());
    for (const auto& iv : indexing.intervals) out.push_back(make_excursion(path, iv));
    return out;
}

std::optional<Excursion> straddling(const SamplePath& Y, const ExcursionIndexing& indexing, double t) {
    if (!(t >= 0.0) || t > Y.horizon() * (1.0 + kSlack)) throw InvalidArgument("t outside the path's horizon");
    for (const auto& iv : indexing.intervals)
        if (iv.contains(t)) return make_excursion(Y, iv);
    return std::nullopt;
}

Excursion scale_excursion(const Excursion& e, double a, double b) {
    const int observed = definite_sign(e.samples);
    if (observed == 0) throw InvalidArgument("excursion has no definite sign");
    if (e.sign && *e.sign != observed) throw InvalidArgument("excursion sign disagrees with its samples");
    const double sigma = observed > 0 ? a : b;
    if (sigma == 0.0) throw InvalidArgument("scaling coefficient must be nonzero");
    const double s2 = sigma * sigma;
    const double amp = std::abs(sigma);
    Excursion out;
    out.interval = e.interval;
    out.dt = e.dt;
    out.sign = observed;
    out.length = e.length / s2;
    const auto m = static_cast<std::size_t>(std::floor(out.length / e.dt + kSlack));
    out.samples.reserve(m + 1);
    for (std::size_t k = 0; k <= m; ++k)
        out.samples.push_back(interpolate_samples(e.samples, e.dt, s2 * static_cast<double>(k) * e.dt) / amp);
    return out;
}

bool precedes(const Excursion& x, const Excursion& y) {
    if (x.length != y.length) return x.length > y.length;
    return x.interval.g() < y.interval.g();
}

// ---------------------------------------------------------------------------

std::size_t ito_mckean_depth(double min_length, double max_right_end) {
    if (!(min_length > 0.0)) return kMaxProbeLevel;
    const double fine = std::ceil(std::log2(2.0 / min_length));
    const double far = std::ceil(max_right_end);
    const double k = std::max({fine, far, 0.0}) + 1.0;
    return std::min(kMaxProbeLevel, static_cast<std::size_t>(k));
}

Labeling label_ito_mckean(const std::vector<ExcursionInterval>& intervals, std::size_t max_level) {
    Labeling out;
    out.scheme = "ito-mckean";
    out.labels.assign(intervals.size(), std::nullopt);
    if (intervals.empty()) return out;
    if (max_level == 0) {
        double min_len = intervals.front().length();
        double max_d = 0.0;
        for (const auto& iv : intervals) {
            min_len = std::min(min_len, iv.length());
            max_d = std::max(max_d, iv.d());
        }
        max_level = ito_mckean_depth(min_len, max_d);
    }
    std::vector<std::tuple<std::size_t, double, std::size_t>> keys;
    for (std::size_t i = 0; i < intervals.size(); ++i) {
        const auto probe = first_probe(intervals[i].g(), intervals[i].d(), max_level);
        if (probe) keys.emplace_back(probe->first, probe->second, i);
        else ++out.unlabeled;
    }
    std::sort(keys.begin(), keys.end());
    for (std::size_t n = 0; n < keys.size(); ++n) out.labels[std::get<2>(keys[n])] = LabelKey{n + 1, 0};
    return out;
}

Labeling label_blumenthal(const std::vector<ExcursionInterval>& intervals) {
    Labeling out;
    out.scheme = "blumenthal";
    out.labels.assign(intervals.size(), std::nullopt);
    std::map<std::uint64_t, std::vector<std::size_t>> buckets;
    for (std::size_t i = 0; i < intervals.size(); ++i) {
        const double len = intervals[i].length();
        const auto n = len > 1.0 ? std::uint64_t{1} : static_cast<std::uint64_t>(std::floor(1.0 / len)) + 1;
        buckets[n].push_back(i);
    }
    for (auto& [n, members] : buckets) {
        std::sort(members.begin(), members.end(),
                  [&](std::size_t x, std::size_t y) { return intervals[x].begin < intervals[y].begin; });
        for (std::size_t k = 0; k < members.size(); ++k) out.labels[members[k]] = LabelKey{n, k + 1};
    }
    return out;
}

Labeling label_epochs(const std::vector<ExcursionInterval>& intervals) {
    Labeling out;
    out.scheme = "epoch";
    out.labels.assign(intervals.size(), std::nullopt);
    for (std::size_t i = 0; i < intervals.size(); ++i) {
        if (intervals[i].epoch == 0 || intervals[i].rank == 0) ++out.unlabeled;
        else out.labels[i] = LabelKey{intervals[i].epoch, intervals[i].rank};
    }
    return out;
}

std::map<LabelKey, LabelKey> relabel(const std::vector<ExcursionInterval>& intervals, const Labeling& a,
                                     const Labeling& b) {
    if (a.labels.size() != intervals.size() || b.labels.size() != intervals.size())
        throw InvalidArgument("labelings do not cover the same intervals");
    std::map<LabelKey, LabelKey> out;
    std::set<LabelKey> targets;
    for (std::size_t i = 0; i < intervals.size(); ++i) {
        if (a.labels[i].has_value() != b.labels[i].has_value())
            throw InvalidArgument("interval (" + fmt_double(intervals[i].g()) + ", " + fmt_double(intervals[i].d()) +
                                  ") is labeled by " + (a.labels[i] ? a.scheme : b.scheme) + " only");
        if (!a.labels[i]) continue;
        if (!out.emplace(*a.labels[i], *b.labels[i]).second || !targets.insert(*b.labels[i]).second)
            throw InvalidArgument("labeling is not injective");
    }
    return out;
}

// ---------------------------------------------------------------------------

std::string indexing_to_json(const ExcursionIndexing& indexing) {
    nlohmann::json j;
    std::vector<double> xi_times;
    for (std::size_t i = 0; i < indexing.xi.size(); ++i) xi_times.push_back(indexing.xi_time(i));
    j["xi"] = xi_times;
    j["xi_ticks"] = indexing.xi;
    j["dt"] = indexing.dt;
    j["size"] = indexing.size;
    j["delta_min"] = indexing.delta_min;
    j["tol"] = indexing.tol;
    j["epoch_unit"] = indexing.epoch_unit;
    j["discarded"] = indexing.discarded;
    auto& arr = j["intervals"] = nlohmann::json::array();
    for (const auto& iv : indexing.intervals) {
        arr.push_back({{"g", iv.g()},
                       {"d", iv.d()},
                       {"begin", iv.begin},
                       {"end", iv.end},
                       {"epoch", iv.epoch},
                       {"rank", iv.rank},
                       {"censored", iv.censored}});
    }
    return j.dump();
}

ExcursionIndexing indexing_from_json(std::string_view text) {
    const auto j = nlohmann::json::parse(text);
    ExcursionIndexing out;
    out.dt = j.at("dt").get<double>();
    out.size = j.at("size").get<std::size_t>();
    out.xi = j.at("xi_ticks").get<std::vector<std::size_t>>();
    out.delta_min = j.value("delta_min", 0.0);
    out.tol = j.value("tol", 0.0);
    out.epoch_unit = j.value("epoch_unit", 1.0);
    out.discarded = j.value("discarded", std::size_t{0});
    for (const auto& e : j.at("intervals")) {
        ExcursionInterval iv;
        iv.dt = out.dt;
        iv.begin = e.at("begin").get<std::size_t>();
        iv.end = e.at("end").get<std::size_t>();
        iv.epoch = e.at("epoch").get<std::size_t>();
        iv.rank = e.at("rank").get<std::size_t>();
        iv.censored = e.value("censored", false);
        if (iv.end <= iv.begin || iv.end >= out.size) throw InvalidArgument("malformed interval in indexing");
        out.intervals.push_back(iv);
    }
    return out;
}

void write_indexing_csv(std::ostream& out, const ExcursionIndexing& indexing) {
    out << "g,d,epoch,rank,length,censored\n";
    for (const auto& iv : indexing.intervals)
        out << fmt_double(iv.g()) << ',' << fmt_double(iv.d()) << ',' << iv.epoch << ',' << iv.rank << ','
            << fmt_double(iv.length()) << ',' << (iv.censored ? 1 : 0) << '\n';
}

}  // namespace exlab
