#include "exlab/signs.hpp"

#include "exlab/errors.hpp"
#include "exlab/format.hpp"
#include "exlab/rng.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdio>
#include <ostream>

namespace exlab {

namespace {

// Grid indices strictly inside an interval; a censored interval also owns its
// last point.
std::pair<std::size_t, std::size_t> interior(const ExcursionInterval& iv) {
    return {iv.begin + 1, iv.censored ? iv.end + 1 : iv.end};
}

ExcursionIndexing exact_indexing(const SamplePath& Y, double epoch_unit) {
    return index_excursions(Y, 0.0, 0.0, epoch_unit);
}

SignedPath assemble(SamplePath Y, Coefficient coefficient, double p, std::uint64_t seed, double epoch_unit) {
    SignedPath sp;
    sp.indexing = exact_indexing(Y, epoch_unit);
    sp.choice = make_iid_sign_choice(sp.indexing, p, seed);
    sp.U = sign_process(sp.choice, sp.indexing);
    sp.Y = std::move(Y);
    sp.coefficient = std::move(coefficient);
    return sp;
}

}  // namespace

int SignChoice::at(std::size_t epoch, std::size_t rank) const {
    const auto it = assignment.find(LabelKey{epoch, rank});
    if (it == assignment.end()) throw InvalidArgument("no sign for this (epoch, rank)");
    return it->second;
}

std::size_t SignChoice::positives() const {
    std::size_t n = 0;
    for (const auto& [key, s] : assignment) n += s > 0 ? 1 : 0;
    return n;
}

std::string indexing_fingerprint(const ExcursionIndexing& indexing) {
    std::uint64_t h = rng::mix64(indexing.size);
    for (const auto& iv : indexing.intervals) {
        h = rng::mix64(h ^ iv.begin);
        h = rng::mix64(h ^ iv.end);
        h = rng::mix64(h ^ (iv.epoch << 32 | iv.rank));
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

SignChoice make_iid_sign_choice(const ExcursionIndexing& indexing, double p, std::uint64_t seed) {
    if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument("sign probability p must lie in [0, 1]");
    SignChoice choice;
    choice.p = p;
    choice.seed = seed;
    choice.indexing_ref = indexing_fingerprint(indexing);
    for (const auto& iv : indexing.intervals)
        choice.assignment[LabelKey{iv.epoch, iv.rank}] = rng::uniform_at(seed, iv.epoch, iv.rank) < p ? 1 : -1;
    return choice;
}

SamplePath sign_process(const SignChoice& choice, const ExcursionIndexing& indexing) {
    SamplePath U{indexing.dt, std::vector<double>(indexing.size, 1.0), choice.seed, PathKind::derived};
    for (const auto& iv : indexing.intervals) {
        const double s = choice.at(iv.epoch, iv.rank);
        const auto [lo, hi] = interior(iv);
        for (std::size_t k = lo; k < hi; ++k) U.values[k] = s;
    }
    return U;
}

double phi_map(double a, double b, double x) {
    if (a == 0.0 || b == 0.0) throw InvalidArgument("phi needs nonzero a and b");
    return x >= 0.0 ? x / a : x / b;
}

double FoldMap::operator()(double x) const {
    return kind == Kind::abs ? std::abs(x) : phi_map(a, b, x);
}

SignedPath construct_theorem1(const SamplePath& B, double a, double b, std::uint64_t sign_seed, double epoch_unit) {
    if (!(a > 0.0) || !(b < 0.0)) throw InvalidArgument("construction needs a > 0 > b");
    auto sp = assemble(reflect_skorokhod(B).Y, Coefficient::step(a, b), b / (b - a), sign_seed, epoch_unit);
    sp.X = SamplePath{B.dt, std::vector<double>(B.size()), B.seed, PathKind::derived};
    for (std::size_t k = 0; k < B.size(); ++k) sp.X.values[k] = sigma_step(a, b, sp.U.values[k]) * sp.Y.values[k];
    return sp;
}

SignedPath construct_theorem2(const SamplePath& B, const Coefficient& sigma, std::uint64_t sign_seed,
                              double epoch_unit) {
    if (!sigma.is_odd()) throw InvalidArgument("coefficient must be odd");
    if (!sigma.sign_compatible()) throw InvalidArgument("coefficient must satisfy x * sigma(x) >= 0");
    if (!(sigma.c_min() > 0.0)) throw InvalidArgument("|sigma| must be bounded away from 0");
    auto sp = assemble(euler_reflected_sde(sigma, B).Y, sigma, 0.5, sign_seed, epoch_unit);
    sp.X = SamplePath{B.dt, std::vector<double>(B.size()), B.seed, PathKind::derived};
    for (std::size_t k = 0; k < B.size(); ++k) sp.X.values[k] = sp.U.values[k] * sp.Y.values[k];
    return sp;
}

SignedPath skew_construction(const SamplePath& B, double alpha, std::uint64_t seed, double epoch_unit) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw InvalidArgument("alpha must lie in [0, 1]");
    auto sp = assemble(reflect_skorokhod(B).Y, Coefficient::step(1.0, -1.0), alpha, seed, epoch_unit);
    sp.X = SamplePath{B.dt, std::vector<double>(B.size()), B.seed, PathKind::derived};
    for (std::size_t k = 0; k < B.size(); ++k) sp.X.values[k] = sp.U.values[k] * sp.Y.values[k];
    return sp;
}

SamplePath skew_bm(const SamplePath& B, double alpha, std::uint64_t seed) {
    return skew_construction(B, alpha, seed).X;
}

SamplePath reconstruct(const std::vector<Excursion>& excursions, const std::map<LabelKey, int>& signs,
                       std::size_t size, double dt) {
    SamplePath X{dt, std::vector<double>(size, 0.0), 0, PathKind::derived};
    for (const auto& e : excursions) {
        const auto it = signs.find(LabelKey{e.interval.epoch, e.interval.rank});
        if (it == signs.end()) throw InvalidArgument("excursion without a sign");
        const double s = it->second;
        const auto [lo, hi] = interior(e.interval);
        if (hi > size) throw InvalidArgument("excursion beyond the target grid");
        for (std::size_t k = lo; k < hi; ++k) X.values[k] = s * e.samples[k - e.interval.begin];
    }
    return X;
}

std::optional<int> sample_at_stopping_time(const SignedPath& sp, const StoppingRule& rule) {
    if (const auto* hit = std::get_if<FirstHit>(&rule)) {
        if (!(hit->level > 0.0)) throw InvalidArgument("first-hit level must be positive");
        for (std::size_t k = 0; k < sp.Y.size(); ++k)
            if (sp.Y.values[k] >= hit->level) return static_cast<int>(sp.U.values[k]);
        return std::nullopt;
    }
    const double t = std::get<FixedTime>(rule).t;
    if (!(t >= 0.0) || t > sp.Y.horizon()) return std::nullopt;
    return static_cast<int>(sp.U.values[sp.Y.index_at(t)]);
}

std::vector<bool> solution_zero_mask(const SamplePath& X, double tol) {
    if (!(tol >= 0.0)) throw InvalidArgument("tol must be nonnegative");
    const auto& x = X.values;
    std::vector<bool> zero(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) zero[k] = std::abs(x[k]) <= tol;
    for (std::size_t k = 0; k + 1 < x.size(); ++k) {
        if (zero[k] || zero[k + 1]) continue;
        if ((x[k] > 0.0) != (x[k + 1] > 0.0)) zero[std::abs(x[k]) <= std::abs(x[k + 1]) ? k : k + 1] = true;
    }
    return zero;
}

ExtractedSigns extract_sign_choice(const SamplePath& X, const FoldMap& fold, double tol, double delta_min,
                                   double epoch_unit) {
    X.validate();
    ExtractedSigns out;
    out.Y = SamplePath{X.dt, std::vector<double>(X.size()), X.seed, PathKind::derived};
    for (std::size_t k = 0; k < X.size(); ++k) out.Y.values[k] = fold(X.values[k]);

    const auto mask = solution_zero_mask(X, tol);
    std::vector<std::size_t> zeros;
    for (std::size_t k = 0; k < mask.size(); ++k)
        if (mask[k]) zeros.push_back(k);
    auto extracted = intervals_from_mask(mask, X.dt, delta_min);
    auto indexing = order_excursions(std::move(extracted.intervals), epoch_partition(zeros, X.dt, epoch_unit), X.dt,
                                     X.size());
    indexing.delta_min = delta_min;
    indexing.tol = tol;
    indexing.epoch_unit = epoch_unit;
    indexing.discarded = extracted.discarded;

    const std::size_t total = indexing.intervals.size();
    std::vector<ExcursionInterval> kept;
    kept.reserve(total);
    for (const auto& iv : indexing.intervals) {
        std::size_t pos = 0;
        std::size_t neg = 0;
        const auto [lo, hi] = interior(iv);
        for (std::size_t k = lo; k < hi; ++k) (X.values[k] > 0.0 ? pos : neg) += 1;
        if (pos > 0 && neg > 0) {
            ++out.mixed;
            continue;
        }
        out.choice.assignment[LabelKey{iv.epoch, iv.rank}] = pos > 0 ? 1 : -1;
        kept.push_back(iv);
    }
    indexing.intervals = std::move(kept);
    out.degraded = static_cast<double>(out.mixed) > 0.01 * static_cast<double>(total);
    out.choice.seed = X.seed;
    out.choice.p = out.choice.assignment.empty()
                       ? 0.5
                       : static_cast<double>(out.choice.positives()) / static_cast<double>(out.choice.assignment.size());
    out.choice.indexing_ref = indexing_fingerprint(indexing);
    out.indexing = std::move(indexing);
    return out;
}

std::string sign_choice_to_json(const SignChoice& choice) {
    nlohmann::json j;
    j["p"] = choice.p;
    j["seed"] = choice.seed;
    j["indexing_ref"] = choice.indexing_ref;
    auto& arr = j["assignment"] = nlohmann::json::array();
    for (const auto& [key, s] : choice.assignment) arr.push_back({{"epoch", key.first}, {"rank", key.second}, {"sign", s}});
    return j.dump();
}

SignChoice sign_choice_from_json(std::string_view text) {
    const auto j = nlohmann::json::parse(text);
    SignChoice c;
    c.p = j.at("p").get<double>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.indexing_ref = j.value("indexing_ref", std::string{});
    for (const auto& e : j.at("assignment")) {
        const int s = e.at("sign").get<int>();
        if (s != 1 && s != -1) throw InvalidArgument("sign must be +1 or -1");
        c.assignment[LabelKey{e.at("epoch").get<std::uint64_t>(), e.at("rank").get<std::uint64_t>()}] = s;
    }
    return c;
}

void write_signed_path_csv(std::ostream& out, const SignedPath& sp) {
    out << "# seed=" << sp.X.seed << '\n';
    out << "# sign_seed=" << sp.choice.seed << '\n';
    out << "# p=" << fmt_double(sp.choice.p) << '\n';
    out << "# dt=" << fmt_double(sp.X.dt) << '\n';
    out << "t,X,U,Y\n";
    for (std::size_t k = 0; k < sp.X.size(); ++k)
        out << fmt_double(sp.X.time(k)) << ',' << fmt_double(sp.X.values[k]) << ',' << sp.U.values[k] << ','
            << fmt_double(sp.Y.values[k]) << '\n';
}

}  // namespace exlab
