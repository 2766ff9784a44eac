#pragma once

// Sign choices over ordered excursions and the constructions built on them:
// X = sigma_{a,b}(U) Y for the step equation, X = U Y for odd coefficients,
// skew Brownian motion, and the inverse map from a solution back to (Y, U).

#include "exlab/excursions.hpp"
#include "exlab/paths.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

namespace exlab {

/// One sign per (epoch, rank).
struct SignChoice {
    double p = 0.5;
    std::uint64_t seed = 0;
    std::map<LabelKey, int> assignment;
    std::string indexing_ref;

    int at(std::size_t epoch, std::size_t rank) const;
    std::size_t positives() const;
};

struct SignedPath {
    SamplePath X;
    SamplePath U;
    SamplePath Y;
    Coefficient coefficient = Coefficient::step(1.0, -1.0);
    ExcursionIndexing indexing;
    SignChoice choice;
};

/// Short hex digest of an indexing's interval layout.
std::string indexing_fingerprint(const ExcursionIndexing& indexing);

/// U_{i,j} = +1 iff uniform(seed; i, j) < p. The draw depends only on
/// (seed, epoch, rank), never on the path values or on iteration order.
SignChoice make_iid_sign_choice(const ExcursionIndexing& indexing, double p, std::uint64_t seed);

/// U on the grid: the assigned sign inside each interval, +1 elsewhere.
SamplePath sign_process(const SignChoice& choice, const ExcursionIndexing& indexing);

double phi_map(double a, double b, double x);
constexpr double sigma_step(double a, double b, double x) { return x >= 0.0 ? a : b; }

/// X = sigma_{a,b}(U) Y with Y the Skorokhod reflection of B and U i.i.d.
/// with P(U = +1) = b / (b - a).
SignedPath construct_theorem1(const SamplePath& B, double a, double b, std::uint64_t sign_seed,
                              double epoch_unit = 1.0);

/// X = U Y with Y the reflected Euler solution under |sigma| and U i.i.d.
/// fair signs.
SignedPath construct_theorem2(const SamplePath& B, const Coefficient& sigma, std::uint64_t sign_seed,
                              double epoch_unit = 1.0);

/// X = U Y with P(U = +1) = alpha.
SignedPath skew_construction(const SamplePath& B, double alpha, std::uint64_t seed, double epoch_unit = 1.0);
SamplePath skew_bm(const SamplePath& B, double alpha, std::uint64_t seed);

/// Rebuilds a path from its excursions: zero off the intervals, sign * samples
/// on each interval.
SamplePath reconstruct(const std::vector<Excursion>& excursions, const std::map<LabelKey, int>& signs,
                       std::size_t size, double dt);

struct FirstHit {
    double level;
};
struct FixedTime {
    double t;
};
using StoppingRule = std::variant<FirstHit, FixedTime>;

/// U at the stopping index, or nullopt when the rule never fires.
std::optional<int> sample_at_stopping_time(const SignedPath& sp, const StoppingRule& rule);

/// How a solution is folded onto the half line.
struct FoldMap {
    enum class Kind { phi, abs } kind = Kind::abs;
    double a = 1.0;
    double b = -1.0;

    static FoldMap phi(double a, double b) { return {Kind::phi, a, b}; }
    static FoldMap absolute() { return {}; }
    double operator()(double x) const;
};

struct ExtractedSigns {
    SamplePath Y;
    SignChoice choice;
    ExcursionIndexing indexing;
    std::size_t mixed = 0;
    bool degraded = false;
};

/// Grid points counted as zeros of X: |X| <= tol, plus the smaller-|X| end of
/// every step across which X changes sign.
std::vector<bool> solution_zero_mask(const SamplePath& X, double tol);

/// Y = fold(X), intervals from solution_zero_mask, U = sgn(X) inside each
/// interval. Intervals holding both signs are dropped and counted; more than
/// 1% of them sets `degraded`.
ExtractedSigns extract_sign_choice(const SamplePath& X, const FoldMap& fold, double tol, double delta_min,
                                   double epoch_unit = 1.0);

std::string sign_choice_to_json(const SignChoice& choice);
SignChoice sign_choice_from_json(std::string_view text);
void write_signed_path_csv(std::ostream& out, const SignedPath& sp);

}  // namespace exlab
