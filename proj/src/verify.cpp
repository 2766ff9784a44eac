#include "exlab/verify.hpp"

#include "exlab/errors.hpp"
#include "exlab/excursions.hpp"
#include "exlab/format.hpp"
#include "exlab/localtime.hpp"
#include "exlab/rng.hpp"
#include "exlab/signs.hpp"
#include "exlab/stats.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>

namespace exlab {

namespace {

std::uint64_t driver_seed(std::uint64_t master, std::size_t i) {
    return rng::derive_seed(master, i, rng::kDriver);
}

std::uint64_t sign_seed(std::uint64_t master, std::size_t i) {
    return rng::derive_seed(master, i, rng::kSigns);
}

std::uint64_t second_sign_seed(std::uint64_t master, std::size_t i) {
    return rng::derive_seed(sign_seed(master, i), 1, rng::kSigns);
}

bool same_bits(double x, double y) {
    return std::bit_cast<std::uint64_t>(x) == std::bit_cast<std::uint64_t>(y);
}

std::size_t bit_mismatches(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) return std::max(x.size(), y.size());
    std::size_t n = 0;
    for (std::size_t k = 0; k < x.size(); ++k) n += same_bits(x[k], y[k]) ? 0 : 1;
    return n;
}

VerificationReport exact_report(std::string name, double mismatches, std::size_t n, std::uint64_t seed) {
    VerificationReport r;
    r.name = std::move(name);
    r.statistic = mismatches;
    r.threshold = 0.0;
    r.rule = "<=";
    r.n = n;
    r.seed = seed;
    r.statistical = false;
    return r.evaluate();
}

// Theorem 1 construction for a sign-changing step, Theorem 2 otherwise.
SignedPath construct(const Coefficient& sigma, const SamplePath& B, std::uint64_t seed) {
    if (sigma.sign_changing_step()) return construct_theorem1(B, sigma.a(), sigma.b(), seed);
    return construct_theorem2(B, sigma, seed);
}


FoldMap fold_for(const Coefficient& sigma) {
    return sigma.sign_changing_step() ? FoldMap::phi(sigma.a(), sigma.b()) : FoldMap::absolute();
}

SamplePath coarsen(const SamplePath& B, std::size_t stride) {
    SamplePath out{B.dt * static_cast<double>(stride), {}, B.seed, B.kind};
    for (std::size_t k = 0; k < B.size(); k += stride) out.values.push_back(B.values[k]);
    return out;
}

double sup_residual(const SignedPath& sp, const SamplePath& B) {
    double integral = 0.0;
    double worst = 0.0;
    for (std::size_t k = 0; k + 1 < B.size(); ++k) {
        integral += sp.coefficient(sp.X.values[k]) * (B.values[k + 1] - B.values[k]);
        worst = std::max(worst, std::abs(sp.X.values[k + 1] - integral));
    }
    return worst;
}

struct PositiveCount {
    bool nonzero = false;
    bool positive = false;
};

VerificationReport positive_fraction(const std::function<SignedPath(std::size_t)>& make, double p, std::size_t n_paths,
                                     const CheckContext& ctx, std::string name) {
    const auto counts = map_paths(
        n_paths,
        [&](std::size_t i) {
            const auto sp = make(i);
            const std::size_t k = sp.X.index_at(1.0);
            return PositiveCount{sp.Y.values[k] > 0.0, sp.X.values[k] > 0.0};
        },
        ctx.exec);
    std::size_t nonzero = 0;
    std::size_t positive = 0;
    for (const auto& c : counts) {
        nonzero += c.nonzero ? 1 : 0;
        positive += c.positive ? 1 : 0;
    }
    auto r = stats::frequency_test(positive, nonzero, p, std::move(name));
    r.seed = ctx.seed;
    r.note("paths", static_cast<double>(n_paths));
    r.note("zero_at_t", static_cast<double>(n_paths - nonzero));
    r.note("unconditional_frequency", static_cast<double>(positive) / static_cast<double>(n_paths));
    return r;
}

std::vector<double> marginal_samples(const std::function<SignedPath(std::size_t)>& make, std::size_t n_paths,
                                     const CheckContext& ctx) {
    return map_paths(
        n_paths,
        [&](std::size_t i) {
            const auto sp = make(i);
            return sp.X.values[sp.X.index_at(1.0)];
        },
        ctx.exec);
}

std::string prefixed(const std::string& prefix, const std::string& name) {
    return prefix + "." + name;
}

void add(std::vector<VerificationReport>& out, const std::string& prefix, VerificationReport r) {
    r.name = prefixed(prefix, r.name);
    out.push_back(std::move(r));
}

void add_all(std::vector<VerificationReport>& out, const std::string& prefix, std::vector<VerificationReport> rs) {
    for (auto& r : rs) add(out, prefix, std::move(r));
}

}  // namespace

VerificationReport run_check(const Check& check, std::uint64_t seed) {
    auto first = check(seed);
    first.seed = seed;
    if (first.passed || !first.statistical) return first;
    const auto retry_seed = rng::derive_seed(seed, 1, rng::kRerun);
    auto second = check(retry_seed);
    second.seed = retry_seed;
    second.note("rerun", "1");
    second.note("first_seed", std::to_string(seed));
    second.note("first_statistic", first.statistic);
    return second;
}

std::vector<VerificationReport> run_checks(const CheckGroup& checks, std::uint64_t seed) {
    auto first = checks(seed);
    for (auto& r : first) r.seed = seed;
    const bool retry = std::any_of(first.begin(), first.end(), [](const auto& r) { return !r.passed && r.statistical; });
    if (!retry) return first;
    const auto retry_seed = rng::derive_seed(seed, 1, rng::kRerun);
    auto second = checks(retry_seed);
    for (std::size_t j = 0; j < second.size(); ++j) {
        second[j].seed = retry_seed;
        second[j].note("rerun", "1");
        second[j].note("first_seed", std::to_string(seed));
        if (j < first.size()) second[j].note("first_statistic", first[j].statistic);
    }
    return second;
}

double signed_half_normal_cdf(double a, double b, double p, double x) {
    if (x < 0.0) return (1.0 - p) * 2.0 * stats::normal_cdf(x / std::abs(b));
    return (1.0 - p) + p * (2.0 * stats::normal_cdf(x / a) - 1.0);
}

// ---------------------------------------------------------------------------

VerificationReport check_levy_tanaka(std::size_t n_paths, double dt, const CheckContext& ctx) {
    const auto sigma = Coefficient::step(1.0, -1.0);
    const auto samples = map_paths(
        n_paths,
        [&](std::size_t i) {
            const auto X = euler_sde(sigma, sample_brownian(driver_seed(ctx.seed, i), 1.0, dt));
            return X.values.back();
        },
        ctx.exec);
    auto r = stats::ks_test(samples, stats::normal_cdf, "levy_tanaka_ks");
    r.seed = ctx.seed;
    r.note("dt", dt);
    return r;
}

namespace {

struct PairMismatch {
    std::size_t mismatches = 0;
    bool distinct = false;
};

}  // namespace

VerificationReport check_phi_uniqueness(double a, double b, std::size_t n_paths, double dt, double horizon,
                                        const CheckContext& ctx) {
    const auto res = map_paths(
        n_paths,
        [&](std::size_t i) {
            const auto B = sample_brownian(driver_seed(ctx.seed, i), horizon, dt);
            const auto x1 = construct_theorem1(B, a, b, sign_seed(ctx.seed, i));
            const auto x2 = construct_theorem1(B, a, b, second_sign_seed(ctx.seed, i));
            PairMismatch m;
            for (std::size_t k = 0; k < B.size(); ++k) {
                const double f1 = phi_map(a, b, x1.X.values[k]);
                const double f2 = phi_map(a, b, x2.X.values[k]);
                m.mismatches += same_bits(f1, f2) && same_bits(f1, x1.Y.values[k]) ? 0 : 1;
            }
            m.distinct = bit_mismatches(x1.X.values, x2.X.values) > 0;
            return m;
        },
        ctx.exec);
    std::size_t total = 0;
    std::size_t distinct = 0;
    for (const auto& m : res) {
        total += m.mismatches;
        distinct += m.distinct ? 1 : 0;
    }
    auto r = exact_report("phi_uniqueness", static_cast<double>(total), n_paths, ctx.seed);
    r.note("paths_with_distinct_X", static_cast<double>(distinct));
    return r;
}

VerificationReport check_phi_adapted(double a, double b, std::size_t n_paths, double dt, double horizon,
                                     const CheckContext& ctx) {
    const auto res = map_paths(
        n_paths,
        [&](std::size_t i) {
            const auto B = sample_brownian(driver_seed(ctx.seed, i), horizon, dt);
            const auto sp = construct_theorem1(B, a, b, sign_seed(ctx.seed, i));
            const auto Y = reflect_skorokhod(B).Y;
            std::vector<double> folded(sp.X.size());
            for (std::size_t k = 0; k < folded.size(); ++k) folded[k] = phi_map(a, b, sp.X.values[k]);
            return bit_mismatches(folded, Y.values);
        },
        ctx.exec);
    std::size_t total = 0;
    for (auto m : res) total += m;
    return exact_report("phi_adapted", static_cast<double>(total), n_paths, ctx.seed);
}

VerificationReport check_abs_uniqueness(const Coefficient& sigma, std::size_t n_paths, double dt, double horizon,
                                        const CheckContext& ctx) {
    const auto res = map_paths(
        n_paths,
        [&](std::size_t i) {
            const auto B = sample_brownian(driver_seed(ctx.seed, i), horizon, dt);
            const auto x1 = construct_theorem2(B, sigma, sign_seed(ctx.seed, i));
            const auto x2 = construct_theorem2(B, sigma, second_sign_seed(ctx.seed, i));
            PairMismatch m;
            for (std::size_t k = 0; k < B.size(); ++k) {
                const double f1 = std::abs(x1.X.values[k]);
                const double f2 = std::abs(x2.X.values[k]);
                m.mismatches += same_bits(f1, f2) && same_bits(f1, x1.Y.values[k]) ? 0 : 1;
            }
            m.distinct = bit_mismatches(x1.X.values, x2.X.values) > 0;
            return m;
        },
        ctx.exec);
    std::size_t total = 0;
    std::size_t distinct = 0;
    for (const auto& m : res) {
        total += m.mismatches;
        distinct += m.distinct ? 1 : 0;
    }
    auto r = exact_report("abs_uniqueness", static_cast<double>(total), n_paths, ctx.seed);
    r.note("paths_with_distinct_X", static_cast<double>(distinct));
    return r;
}

VerificationReport check_sign_at_first_hit(double a, double b, double level, std::size_t n_paths, double dt,
                                           double horizon, double tolerance, const CheckContext& ctx) {
    const auto res = map_paths(
        n_paths,
        [&](std::size_t i) {
            const auto B = sample_brownian(driver_seed(ctx.seed, i), horizon, dt);
            const auto sp = construct_theorem1(B, a, b, sign_seed(ctx.seed, i));
            return sample_at_stopping_time(sp, FirstHit{level});
        },
        ctx.exec);
    std::size_t hits = 0;
    std::size_t plus = 0;
    for (const auto& s : res) {
        if (!s) continue;
        ++hits;
        plus += *s > 0 ? 1 : 0;
    }
    auto r = stats::frequency_test(plus, hits, b / (b - a), "sign_at_first_hit", tolerance);
    r.seed = ctx.seed;
    r.note("level", level);
    r.note("missed", static_cast<double>(n_paths - hits));
    return r;
}

VerificationReport check_skew_occupation(double alpha, std::size_t n_paths, double dt, const CheckContext& ctx) {
    auto make = [&](std::size_t i) {
        return skew_construction(sample_brownian(driver_seed(ctx.seed, i), 1.0, dt), alpha, sign_seed(ctx.seed, i));
    };
    auto r = positive_fraction(make, alpha, n_paths, ctx, "skew_occupation");
    r.note("alpha", alpha);
    return r;
}

VerificationReport check_construction_marginal(double a, double b, std::size_t n_paths, double dt,
                                               const CheckContext& ctx) {
    auto make = [&](std::size_t i) {
        return construct_theorem1(sample_brownian(driver_seed(ctx.seed, i), 1.0, dt), a, b, sign_seed(ctx.seed, i));
    };
    const double p = b / (b - a);
    auto r = stats::ks_test(marginal_samples(make, n_paths, ctx),
                            [&](double x) { return signed_half_normal_cdf(a, b, p, x); }, "marginal_ks");
    r.seed = ctx.seed;
    return r;
}

VerificationReport check_skew_marginal(double alpha, std::size_t n_paths, double dt, const CheckContext& ctx) {
    auto make = [&](std::size_t i) {
        return skew_construction(sample_brownian(driver_seed(ctx.seed, i), 1.0, dt), alpha, sign_seed(ctx.seed, i));
    };
    auto r = stats::ks_test(marginal_samples(make, n_paths, ctx),
                            [&](double x) { return signed_half_normal_cdf(1.0, -1.0, alpha, x); }, "skew_marginal_ks");
    r.seed = ctx.seed;
    r.note("alpha", alpha);
    return r;
}

VerificationReport check_hitting_time(double eps, std::size_t n_paths, double dt, double tolerance,
                                      const CheckContext& ctx) {
    const double max_horizon = std::max(1.0, 100.0 * eps * eps);
    const auto times = map_paths(
        n_paths, [&](std::size_t i) { return first_passage_reflected(driver_seed(ctx.seed, i), eps, dt, max_horizon); },
        ctx.exec);
    std::vector<double> hit;
    for (const auto& t : times)
        if (t) hit.push_back(*t);
    if (hit.size() < stats::kMinKsSamples) throw InsufficientData("too few first passages");
    const double m = stats::mean(hit);
    double var = 0.0;
    for (double t : hit) var += (t - m) * (t - m);
    var /= static_cast<double>(hit.size() - 1);
    VerificationReport r;
    r.name = "hitting_time";
    r.statistic = std::abs(m / (eps * eps) - 1.0);
    r.threshold = tolerance;
    r.rule = "<";
    r.n = hit.size();
    r.seed = ctx.seed;
    r.note("mean", m);
    r.note("target", eps * eps);
    r.note("standard_error", std::sqrt(var / static_cast<double>(hit.size())));
    r.note("missed", static_cast<double>(n_paths - hit.size()));
    return r.evaluate();
}

ResidualSweep construction_residuals(const Coefficient& sigma, const std::vector<double>& dts, std::size_t n_paths,
                                     double horizon, const CheckContext& ctx) {
    if (dts.empty()) throw InvalidArgument("empty dt sweep");
    const double fine = *std::min_element(dts.begin(), dts.end());
    std::vector<std::size_t> strides;
    for (double dt : dts) {
        const double ratio = dt / fine;
        const double stride = std::round(ratio);
        if (std::abs(ratio - stride) > 1e-9 * ratio) throw InvalidArgument("dt sweep must be integer multiples");
        strides.push_back(static_cast<std::size_t>(stride));
    }
    const auto per_path = map_paths(
        n_paths,
        [&](std::size_t i) {
            const auto B = sample_brownian(driver_seed(ctx.seed, i), horizon, fine);
            std::vector<double> r;
            for (std::size_t s : strides) {
                const auto Bs = s == 1 ? B : coarsen(B, s);
                r.push_back(sup_residual(construct(sigma, Bs, sign_seed(ctx.seed, i)), Bs));
            }
            return r;
        },
        ctx.exec);
    ResidualSweep out;
    out.dts = dts;
    for (std::size_t j = 0; j < dts.size(); ++j) {
        std::vector<double> col;
        for (const auto& r : per_path) col.push_back(r[j]);
        out.medians.push_back(stats::median(col));
    }
    return out;
}

VerificationReport check_residual_decreases(const Coefficient& sigma, const std::vector<double>& dts,
                                            std::size_t n_paths, double horizon, const CheckContext& ctx) {
    if (dts.size() < 2) throw InvalidArgument("residual trend needs at least two step sizes");
    const auto sweep = construction_residuals(sigma, dts, n_paths, horizon, ctx);
    double worst = 0.0;
    for (std::size_t j = 0; j + 1 < sweep.medians.size(); ++j)
        worst = std::max(worst, sweep.medians[j + 1] / sweep.medians[j]);
    VerificationReport r;
    r.name = "construction_residual_trend";
    r.statistic = worst;
    r.threshold = 1.0;
    r.rule = "<";
    r.n = n_paths;
    r.seed = ctx.seed;
    for (std::size_t j = 0; j < sweep.dts.size(); ++j) r.note("median_at_dt_" + fmt_double(sweep.dts[j]), sweep.medians[j]);
    return r.evaluate();
}

VerificationReport check_quadratic_variation(const Coefficient& sigma, std::size_t n_paths, double dt,
                                             const CheckContext& ctx) {
    const auto errs = map_paths(
        n_paths,
        [&](std::size_t i) {
            const auto X = euler_sde(sigma, sample_brownian(driver_seed(ctx.seed, i), 1.0, dt));
            const double qv = quadratic_variation(X, X.steps());
            const double iv = integrated_variance(X, sigma, X.steps());
            return std::abs(qv - iv) / iv;
        },
        ctx.exec);
    VerificationReport r;
    r.name = "quadratic_variation";
    r.statistic = stats::median(errs);
    r.threshold = 0.05;
    r.rule = "<";
    r.n = n_paths;
    r.seed = ctx.seed;
    r.note("dt", dt);
    return r.evaluate();
}

namespace {

struct ExtractedSample {
    std::vector<int> signs;
    std::vector<double> lengths;
    std::size_t mixed = 0;
    std::size_t intervals = 0;
};

}  // namespace

std::vector<VerificationReport> check_representation(const Coefficient& sigma, double p, std::size_t n_paths,
                                                     double dt, double horizon, double min_length,
                                                     const CheckContext& ctx) {
    const double tol = 1e-2 * std::sqrt(dt);
    const auto fold = fold_for(sigma);
    const auto per_path = map_paths(
        n_paths,
        [&](std::size_t i) {
            const auto X = euler_sde(sigma, sample_brownian(driver_seed(ctx.seed, i), horizon, dt));
            const auto ext = extract_sign_choice(X, fold, tol, min_length);
            ExtractedSample s;
            s.mixed = ext.mixed;
            s.intervals = ext.indexing.intervals.size() + ext.mixed;
            for (const auto& iv : ext.indexing.intervals) {
                if (iv.censored) continue;
                s.signs.push_back(ext.choice.at(iv.epoch, iv.rank));
                s.lengths.push_back(iv.length());
            }
            return s;
        },
        ctx.exec);
    ExtractedSample pooled;
    for (const auto& s : per_path) {
        pooled.signs.insert(pooled.signs.end(), s.signs.begin(), s.signs.end());
        pooled.lengths.insert(pooled.lengths.end(), s.lengths.begin(), s.lengths.end());
        pooled.mixed += s.mixed;
        pooled.intervals += s.intervals;
    }
    std::vector<VerificationReport> out;
    VerificationReport size;
    size.name = "representation_sample_size";
    size.statistic = static_cast<double>(pooled.signs.size());
    size.threshold = 500.0;
    size.rule = ">=";
    size.n = pooled.signs.size();
    size.seed = ctx.seed;
    size.note("mixed_sign_intervals", static_cast<double>(pooled.mixed));
    size.note("min_length", min_length);
    out.push_back(size.evaluate());
    out.push_back(stats::chi_square_signs(pooled.signs, p, "representation_chi_square"));
    out.push_back(stats::sign_length_correlation(pooled.signs, pooled.lengths, "representation_sign_length_correlation"));
    out.push_back(stats::quartile_homogeneity(pooled.signs, pooled.lengths, "representation_quartile_homogeneity"));
    for (auto& r : out) {
        r.seed = ctx.seed;
        r.note("surrogate", "independence of signs from the path is tested through these surrogates only");
    }
    return out;
}

std::vector<VerificationReport> check_local_time_coherence(double eps, std::size_t n_paths, double dt,
                                                           double tolerance, const CheckContext& ctx) {
    struct Triple {
        double exact = 0.0;
        double occupation = 0.0;
        double downcrossing = 0.0;
    };
    const auto unit = Coefficient::step(1.0, 1.0);
    const auto res = map_paths(
        n_paths,
        [&](std::size_t i) {
            const auto B = sample_brownian(driver_seed(ctx.seed, i), 1.0, dt);
            const auto r = reflect_skorokhod(B);
            Triple t;
            t.exact = 2.0 * r.ell.values.back();
            t.occupation = local_time_occupation(r.Y, unit, eps, 1.0, true, Grid::reflected).value;
            t.downcrossing = local_time_downcrossing(r.Y, eps, 1.0, Grid::reflected).value;
            return t;
        },
        ctx.exec);
    std::vector<double> e_o;
    std::vector<double> e_d;
    std::vector<double> o_d;
    for (const auto& t : res) {
        if (!(t.exact > 0.0)) continue;
        e_o.push_back(std::abs(t.exact - t.occupation) / t.exact);
        e_d.push_back(std::abs(t.exact - t.downcrossing) / t.exact);
        o_d.push_back(std::abs(t.occupation - t.downcrossing) / t.exact);
    }
    auto make = [&](const char* name, const std::vector<double>& v) {
        VerificationReport r;
        r.name = name;
        r.statistic = stats::median(v);
        r.threshold = tolerance;
        r.rule = "<";
        r.n = v.size();
        r.seed = ctx.seed;
        r.note("eps", eps);
        r.note("calibration", kDowncrossingCalibration);
        r.note("grid_overshoot", grid_overshoot(dt));
        return r.evaluate();
    };
    return {make("local_time_exact_vs_occupation", e_o), make("local_time_exact_vs_downcrossing", e_d),
            make("local_time_occupation_vs_downcrossing", o_d)};
}

VerificationReport check_reconstruction(double alpha, std::size_t n_paths, double dt, double horizon,
                                        const CheckContext& ctx) {
    const auto res = map_paths(
        n_paths,
        [&](std::size_t i) {
            const auto sp = skew_construction(sample_brownian(driver_seed(ctx.seed, i), horizon, dt), alpha,
                                              sign_seed(ctx.seed, i));
            const auto ext = extract_sign_choice(sp.X, FoldMap::absolute(), 0.0, 0.0);
            const auto rebuilt = reconstruct(decompose(ext.Y, ext.indexing), ext.choice.assignment, sp.X.size(), sp.X.dt);
            std::size_t bad = bit_mismatches(rebuilt.values, sp.X.values);
            bad += ext.choice.assignment == sp.choice.assignment ? 0 : 1;
            return bad;
        },
        ctx.exec);
    std::size_t total = 0;
    for (auto b : res) total += b;
    auto r = exact_report("reconstruction", static_cast<double>(total), n_paths, ctx.seed);
    r.note("alpha", alpha);
    return r;
}

VerificationReport check_label_equivalence(double alpha, std::size_t n_paths, double dt, double horizon,
                                           const CheckContext& ctx) {
    struct Tally {
        std::size_t mismatches = 0;
        std::vector<int> by_epoch;
        std::vector<int> by_ito;
        std::vector<int> by_blumenthal;
        std::size_t intervals = 0;
    };
    const auto res = map_paths(
        n_paths,
        [&](std::size_t i) {
            const auto sp = skew_construction(sample_brownian(driver_seed(ctx.seed, i), horizon, dt), alpha,
                                              sign_seed(ctx.seed, i));
            const auto& ivs = sp.indexing.intervals;
            const auto ep = label_epochs(ivs);
            const auto im = label_ito_mckean(ivs);
            const auto bl = label_blumenthal(ivs);
            Tally t;
            t.intervals = ivs.size();
            t.mismatches += ep.unlabeled + im.unlabeled + bl.unlabeled;
            const auto to_im = transport(sp.choice.assignment, relabel(ivs, ep, im));
            const auto to_bl = transport(sp.choice.assignment, relabel(ivs, ep, bl));
            for (std::size_t k = 0; k < ivs.size(); ++k) {
                if (!ep.labels[k] || !im.labels[k] || !bl.labels[k]) continue;
                const int s = sp.choice.assignment.at(*ep.labels[k]);
                t.mismatches += to_im.at(*im.labels[k]) == s && to_bl.at(*bl.labels[k]) == s ? 0 : 1;
            }
            for (const auto& [key, s] : sp.choice.assignment) t.by_epoch.push_back(s);
            for (const auto& [key, s] : to_im) t.by_ito.push_back(s);
            for (const auto& [key, s] : to_bl) t.by_blumenthal.push_back(s);
            return t;
        },
        ctx.exec);
    std::size_t mismatches = 0;
    std::size_t intervals = 0;
    std::vector<int> e;
    std::vector<int> im;
    std::vector<int> bl;
    for (const auto& t : res) {
        mismatches += t.mismatches;
        intervals += t.intervals;
        e.insert(e.end(), t.by_epoch.begin(), t.by_epoch.end());
        im.insert(im.end(), t.by_ito.begin(), t.by_ito.end());
        bl.insert(bl.end(), t.by_blumenthal.begin(), t.by_blumenthal.end());
    }
    // Statistics of the transported sequences must agree bitwise.
    auto stat = [&](const std::vector<int>& s) {
        return stats::frequency_test(static_cast<std::size_t>(std::count(s.begin(), s.end(), 1)), s.size(), alpha)
            .statistic;
    };
    if (!e.empty()) {
        const double se = stat(e);
        mismatches += same_bits(se, stat(im)) ? 0 : 1;
        mismatches += same_bits(se, stat(bl)) ? 0 : 1;
    }
    auto r = exact_report("label_equivalence", static_cast<double>(mismatches), intervals, ctx.seed);
    r.note("paths", static_cast<double>(n_paths));
    return r;
}

std::vector<VerificationReport> check_time_change(const Coefficient& sigma, std::size_t n_paths, double dt,
                                                  const CheckContext& ctx) {
    struct Res {
        double round_trip = 0.0;
        double zero_transfer = 0.0;
        std::size_t zeros = 0;
    };
    const auto res = map_paths(
        n_paths,
        [&](std::size_t i) {
            const auto sp = construct(sigma, sample_brownian(driver_seed(ctx.seed, i), 1.0, dt), sign_seed(ctx.seed, i));
            const auto& X = sp.X;
            const auto tc = time_change(X, sigma);
            Res r;
            for (std::size_t k = 0; k < X.size(); ++k)
                r.round_trip = std::max(r.round_trip, std::abs(tc.inverse_at(tc.A[k]) - X.time(k)) / dt);
            const auto Xt = apply_time_change(X, tc, dt).path;
            double step = 0.0;
            for (std::size_t k = 0; k + 1 < X.size(); ++k) step = std::max(step, std::abs(X.values[k + 1] - X.values[k]));
            for (std::size_t k = 0; k < X.size(); ++k) {
                if (X.values[k] != 0.0) continue;
                ++r.zeros;
                const double s = tc.A[k];
                if (s > Xt.horizon()) continue;
                const double v = std::abs(Xt.interpolate(s));
                r.zero_transfer = std::max(r.zero_transfer, step > 0.0 ? v / step : v);
            }
            return r;
        },
        ctx.exec);
    double rt = 0.0;
    double zt = 0.0;
    std::size_t zeros = 0;
    for (const auto& r : res) {
        rt = std::max(rt, r.round_trip);
        zt = std::max(zt, r.zero_transfer);
        zeros += r.zeros;
    }
    VerificationReport a;
    a.name = "time_change_round_trip";
    a.statistic = rt;
    a.threshold = 1.0;
    a.rule = "<=";
    a.n = n_paths;
    a.seed = ctx.seed;
    a.statistical = false;
    a.note("unit", "grid steps");
    VerificationReport b;
    b.name = "time_change_zero_transfer";
    b.statistic = zt;
    b.threshold = 1.0;
    b.rule = "<=";
    b.n = zeros;
    b.seed = ctx.seed;
    b.statistical = false;
    b.note("unit", "largest path increment");
    return {a.evaluate(), b.evaluate()};
}

// ---------------------------------------------------------------------------

std::vector<VerificationReport> excursion_length_law(const std::vector<double>& xs, double t, std::size_t n_paths,
                                                     double dt, double tolerance, const CheckContext& ctx) {
    if (xs.empty()) throw InvalidArgument("no length thresholds");
    for (double x : xs)
        if (!(x >= 10.0 * dt)) throw InvalidArgument("length threshold must be at least 10 dt");
    if (!(t > 0.0)) throw InvalidArgument("t must be positive");
    const double horizon = t + *std::max_element(xs.begin(), xs.end());
    struct Res {
        std::vector<std::size_t> counts;
        double ell = 0.0;
    };
    const auto res = map_paths(
        n_paths,
        [&](std::size_t i) {
            const auto r = reflect_skorokhod(sample_brownian(driver_seed(ctx.seed, i), horizon, dt));
            const auto ext = excursion_intervals(r.Y, 0.0, 0.0);
            Res out;
            out.counts.assign(xs.size(), 0);
            for (const auto& iv : ext.intervals) {
                if (!(iv.g() < t)) continue;
                for (std::size_t j = 0; j < xs.size(); ++j) out.counts[j] += iv.length() > xs[j] ? 1 : 0;
            }
            out.ell = r.ell.values[r.ell.index_at(t)];
            return out;
        },
        ctx.exec);
    double ell_sum = 0.0;
    std::vector<double> totals(xs.size(), 0.0);
    for (const auto& r : res) {
        ell_sum += r.ell;
        for (std::size_t j = 0; j < xs.size(); ++j) totals[j] += static_cast<double>(r.counts[j]);
    }
    std::vector<VerificationReport> out;
    std::vector<std::pair<double, double>> estimates;
    for (std::size_t j = 0; j < xs.size(); ++j) {
        if (totals[j] < 100.0) throw InsufficientData("fewer than 100 pooled excursions longer than " + fmt_double(xs[j]));
        const double ratio = totals[j] / ell_sum;
        const double target = std::sqrt(2.0 / (std::numbers::pi * xs[j]));
        estimates.emplace_back(xs[j], ratio);
        VerificationReport r;
        r.name = "excursion_length_law_x=" + fmt_double(xs[j]);
        r.statistic = std::abs(ratio / target - 1.0);
        r.threshold = tolerance;
        r.rule = "<";
        r.n = static_cast<std::size_t>(totals[j]);
        r.seed = ctx.seed;
        r.note("ratio", ratio);
        r.note("target", target);
        r.note("t", t);
        r.note("local_time", "ell = Y - B (symmetric normalization)");
        out.push_back(r.evaluate());
    }
    std::sort(estimates.begin(), estimates.end());
    std::size_t violations = 0;
    for (std::size_t j = 0; j + 1 < estimates.size(); ++j) violations += estimates[j + 1].second < estimates[j].second ? 0 : 1;
    VerificationReport mono;
    mono.name = "excursion_length_law_monotone";
    mono.statistic = static_cast<double>(violations);
    mono.threshold = 0.0;
    mono.rule = "<=";
    mono.n = n_paths;
    mono.seed = ctx.seed;
    out.push_back(mono.evaluate());
    return out;
}

ExcursionCountSeries signed_count_process(const SamplePath& X, double a, double b, const std::vector<double>& x_grid,
                                          const SamplePath& clock, double budget) {
    if (!(a > 0.0) || !(b < 0.0)) throw InvalidArgument("signed counts need a > 0 > b");
    if (x_grid.empty() || !std::is_sorted(x_grid.begin(), x_grid.end()))
        throw InvalidArgument("x grid must be nonempty and increasing");
    for (double x : x_grid)
        if (!(x > 0.0)) throw InvalidArgument("x grid must be positive");
    if (clock.size() != X.size()) throw InvalidArgument("local-time clock lives on a different grid");
    std::size_t stop = clock.size() - 1;
    for (std::size_t k = 0; k < clock.size(); ++k) {
        if (clock.values[k] >= budget) {
            stop = k;
            break;
        }
    }
    const auto ext = extract_sign_choice(X, FoldMap::phi(a, b), 0.0, 0.0);
    ExcursionCountSeries s;
    s.x = x_grid;
    s.N1.assign(x_grid.size(), 0);
    s.N2.assign(x_grid.size(), 0);
    s.local_time_norm = clock.values[stop];
    s.stop_time = clock.time(stop);
    for (const auto& iv : ext.indexing.intervals) {
        if (iv.censored || iv.end > stop) continue;
        const int sign = ext.choice.at(iv.epoch, iv.rank);
        const double c2 = sign > 0 ? a * a : b * b;
        const double R = c2 * iv.length();
        for (std::size_t j = 0; j < x_grid.size(); ++j) {
            if (!(R > c2 / (x_grid[j] * x_grid[j]))) continue;
            (sign > 0 ? s.N1 : s.N2)[j] += 1;
        }
    }
    for (std::size_t j = 0; j < x_grid.size(); ++j)
        s.Q.push_back(static_cast<long long>(s.N1[j]) - static_cast<long long>(s.N2[j]));
    return s;
}

VerificationReport check_signed_counts(double a, double b, const std::vector<double>& x_grid, std::size_t n_paths,
                                       double dt, double horizon, const CheckContext& ctx) {
    const auto series = map_paths(
        n_paths,
        [&](std::size_t i) {
            const auto B = sample_brownian(driver_seed(ctx.seed, i), horizon, dt);
            const auto sp = construct_theorem1(B, a, b, sign_seed(ctx.seed, i));
            return signed_count_process(sp.X, a, b, x_grid, reflect_skorokhod(B).ell);
        },
        ctx.exec);
    const std::size_t top = x_grid.size() - 1;
    std::size_t n1 = 0;
    std::size_t n2 = 0;
    std::size_t q_violations = 0;
    for (const auto& s : series) {
        n1 += s.N1[top];
        n2 += s.N2[top];
        for (std::size_t j = 0; j < s.x.size(); ++j)
            q_violations += s.Q[j] == static_cast<long long>(s.N1[j]) - static_cast<long long>(s.N2[j]) ? 0 : 1;
    }
    if (n1 + n2 < stats::kMinSigns) throw InsufficientData("too few counted excursions");
    const double p1 = std::abs(b) / (a + std::abs(b));
    auto r = stats::frequency_test(n1, n1 + n2, p1, "signed_count_split");
    r.seed = ctx.seed;
    r.note("N1", static_cast<double>(n1));
    r.note("N2", static_cast<double>(n2));
    r.note("x", x_grid[top]);
    r.note("q_identity_violations", static_cast<double>(q_violations));
    if (q_violations > 0) {
        r.passed = false;
        r.statistical = false;
    }
    return r;
}

// ---------------------------------------------------------------------------

Coefficient::Witness legall_witness(const Coefficient& sigma) {
    const auto jumps = sigma.jumps();
    double total = 0.0;
    for (const auto& j : jumps) total += std::abs(j.after - j.before);
    return [jumps, total](double x) {
        double var = 0.0;
        for (const auto& j : jumps)
            if (j.inclusive ? x >= j.at : x > j.at) var += std::abs(j.after - j.before);
        return x + total * var;
    };
}

VerificationReport check_legall_condition(const Coefficient& sigma, std::vector<double> grid) {
    const auto f = sigma.witness() ? *sigma.witness() : legall_witness(sigma);
    // Neighbours of a jump sit a relative 1e-9 away: close enough to see the
    // jump, far enough that x + c stays strictly increasing in floating point.
    for (const auto& j : sigma.jumps()) {
        const double h = 1e-9 * std::max(1.0, std::abs(j.at));
        grid.push_back(j.at);
        grid.push_back(j.at - h);
        grid.push_back(j.at + h);
    }
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    std::vector<double> s(grid.size());
    std::vector<double> fx(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        s[i] = sigma(grid[i]);
        fx[i] = f(grid[i]);
    }
    double worst = -INFINITY;
    std::size_t wi = 0;
    std::size_t wj = 0;
    bool monotone = true;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        for (std::size_t j = i + 1; j < grid.size(); ++j) {
            if (!(fx[j] > fx[i]) && monotone) {
                monotone = false;
                wi = i;
                wj = j;
            }
            const double ds = s[i] - s[j];
            const double gap = ds * ds - std::abs(fx[i] - fx[j]);
            if (gap > worst && monotone) {
                worst = gap;
                wi = i;
                wj = j;
            }
        }
    }
    VerificationReport r;
    r.name = "legall_condition";
    r.statistic = monotone ? worst : INFINITY;
    r.threshold = 0.0;
    r.rule = "<=";
    r.n = grid.size();
    r.statistical = false;
    r.note("witness", sigma.witness() ? "given" : "x + V * cumulative variation");
    if (grid.size() >= 2) {
        r.note("pair_x", grid[wi]);
        r.note("pair_y", grid[wj]);
    }
    if (!monotone) r.note("failure", "witness is not strictly increasing");
    return r.evaluate();
}

// ---------------------------------------------------------------------------

std::vector<VerificationReport> verify_theorem1(double a, double b, const SuiteConfig& cfg) {
    if (!(a > 0.0) || !(b < 0.0)) throw InvalidArgument("theorem 1 suite needs a > 0 > b");
    const auto sigma = Coefficient::step(a, b);
    const double p = b / (b - a);
    const auto n = cfg.n_paths;
    const auto dt = cfg.dt;
    const auto exec = cfg.ctx.exec;
    auto with = [exec](std::uint64_t s) { return CheckContext{s, exec}; };
    std::vector<VerificationReport> out;
    const std::string pre = "theorem1";
    if (a == 1.0 && b == -1.0)
        add(out, pre, run_check([&](std::uint64_t s) { return check_levy_tanaka(n, dt, with(s)); }, cfg.ctx.seed));
    add(out, pre,
        run_check([&](std::uint64_t s) { return check_construction_marginal(a, b, n, dt, with(s)); }, cfg.ctx.seed));
    add(out, pre,
        run_check([&](std::uint64_t s) { return check_phi_uniqueness(a, b, std::min<std::size_t>(n, 100), dt, 1.0, with(s)); },
                  cfg.ctx.seed));
    add(out, pre,
        run_check([&](std::uint64_t s) { return check_phi_adapted(a, b, std::min<std::size_t>(n, 100), dt, 1.0, with(s)); },
                  cfg.ctx.seed));
    add(out, pre,
        run_check([&](std::uint64_t s) { return check_sign_at_first_hit(a, b, 0.5, n, dt, 2.0, -1.0, with(s)); },
                  cfg.ctx.seed));
    add(out, pre, run_check([&](std::uint64_t s) {
            return check_residual_decreases(sigma, {10.0 * dt, dt}, std::min<std::size_t>(n, 200), 1.0, with(s));
        },
                            cfg.ctx.seed));
    add_all(out, pre,
            run_checks([&](std::uint64_t s) { return check_representation(sigma, p, n, dt, 1.0, 0.01, with(s)); },
                       cfg.ctx.seed));
    return out;
}

std::vector<VerificationReport> verify_theorem2(const Coefficient& sigma, const SuiteConfig& cfg) {
    if (!sigma.is_odd() || !(sigma.c_min() > 0.0)) throw InvalidArgument("theorem 2 suite needs an odd coefficient");
    const auto n = cfg.n_paths;
    const auto dt = cfg.dt;
    const auto exec = cfg.ctx.exec;
    auto with = [exec](std::uint64_t s) { return CheckContext{s, exec}; };
    const std::string pre = "theorem2";
    std::vector<VerificationReport> out;
    std::vector<double> grid;
    for (int i = -60; i <= 60; ++i) grid.push_back(0.05 * i);
    add(out, pre, check_legall_condition(sigma, grid));
    add(out, pre,
        run_check([&](std::uint64_t s) { return check_abs_uniqueness(sigma, std::min<std::size_t>(n, 100), dt, 1.0, with(s)); },
                  cfg.ctx.seed));
    add(out, pre, run_check([&](std::uint64_t s) {
            return check_residual_decreases(sigma, {10.0 * dt, dt}, std::min<std::size_t>(n, 200), 1.0, with(s));
        },
                            cfg.ctx.seed));
    add(out, pre, run_check([&](std::uint64_t s) { return check_quadratic_variation(sigma, std::min<std::size_t>(n, 100), dt, with(s)); },
                            cfg.ctx.seed));
    add_all(out, pre,
            run_checks([&](std::uint64_t s) { return check_representation(sigma, 0.5, n, dt, 1.0, 0.01, with(s)); },
                       cfg.ctx.seed));
    add(out, pre, run_check([&](std::uint64_t s) {
            auto make = [&](std::size_t i) {
                return construct_theorem2(sample_brownian(driver_seed(s, i), 1.0, dt), sigma, sign_seed(s, i));
            };
            return positive_fraction(make, 0.5, n, with(s), "positive_fraction");
        },
                            cfg.ctx.seed));
    add_all(out, pre, check_time_change(sigma, std::min<std::size_t>(n, 20), dt, cfg.ctx));
    return out;
}

std::vector<VerificationReport> verify_appendix(double alpha, const SuiteConfig& cfg) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw InvalidArgument("alpha must lie in [0, 1]");
    const auto n = cfg.n_paths;
    const auto dt = cfg.dt;
    const auto exec = cfg.ctx.exec;
    auto with = [exec](std::uint64_t s) { return CheckContext{s, exec}; };
    const std::string pre = "appendix";
    std::vector<VerificationReport> out;
    add(out, pre, run_check([&](std::uint64_t s) { return check_reconstruction(alpha, std::min<std::size_t>(n, 100), dt, 2.0, with(s)); },
                            cfg.ctx.seed));
    add(out, pre, run_check([&](std::uint64_t s) { return check_skew_occupation(alpha, n, dt, with(s)); }, cfg.ctx.seed));
    if (alpha > 0.0 && alpha < 1.0)
        add(out, pre, run_check([&](std::uint64_t s) { return check_skew_marginal(alpha, n, dt, with(s)); }, cfg.ctx.seed));
    add(out, pre,
        run_check([&](std::uint64_t s) { return check_label_equivalence(alpha, std::min<std::size_t>(n, 100), dt, 2.0, with(s)); },
                  cfg.ctx.seed));
    return out;
}

}  // namespace exlab
