#pragma once

// Local time at 0 of a discretized path.
//
// Normalizations, for a reflecting path Y = B + ell:
//   semimartingale L^0(Y) = 2 ell   (one-sided occupation (1/eps) int 1[0,eps)(Y) d<Y>)
//   symmetric      Lhat(Y) = ell    ((1/2eps) int 1(-eps,eps)(Y) d<Y>)
//   downcrossings  eps * D(eps) -> ell, so kDowncrossingCalibration * eps * D -> L^0.

#include "exlab/paths.hpp"

#include <cstdint>
#include <iosfwd>
#include <string_view>
#include <vector>

namespace exlab {

/// c in c * eps * D_t(eps) -> L^0_t(Y); fixed by the calibration fixture test.
inline constexpr double kDowncrossingCalibration = 2.0;

/// -zeta(1/2) / sqrt(2 pi): the mean gap between the running minimum of BM
/// sampled on a grid of step dt and its continuous minimum is beta sqrt(dt).
inline constexpr double kGridOvershoot = 0.5825971579390106;

/// How an estimator reads the grid samples.
///   raw:       the samples are the path.
///   reflected: the samples are a discrete Skorokhod reflection of BM, which sits
///              kGridOvershoot sqrt(dt) below the continuous reflection; bands and
///              crossing levels are shifted by that amount.
enum class Grid { raw, reflected };

/// kGridOvershoot * sqrt(dt).
double grid_overshoot(double dt);

enum class LocalTimeMethod { downcrossing, occupation, symmetric, exact_reflecting };
std::string_view to_string(LocalTimeMethod m);

struct LocalTimeEstimate {
    double t = 0.0;
    double value = 0.0;
    LocalTimeMethod method = LocalTimeMethod::exact_reflecting;
    double eps = 0.0;
    std::uint64_t seed = 0;
};

/// Completed eps -> 0 crossings by time t: sigma_i = first time Y >= eps after
/// tau_{i-1}, tau_i = first time Y <= tol after sigma_i.
std::size_t downcrossings(const SamplePath& Y, double eps, double t, double tol = 0.0);

/// c * eps * D_t(eps) as an estimate of L^0_t. With Grid::reflected the
/// crossings of eps by the continuous path are detected at eps - 2 beta sqrt(dt):
/// one overshoot for the reflection, one for monitoring the maximum on the grid.
LocalTimeEstimate local_time_downcrossing(const SamplePath& Y, double eps, double t, Grid grid = Grid::raw);

/// 2 ell on the whole grid, ell recomputed from B. Throws InvalidArgument unless
/// Y is exactly the reflection of B.
SamplePath local_time_exact_path(const SamplePath& Y, const SamplePath& B);
LocalTimeEstimate local_time_exact_reflecting(const SamplePath& Y, const SamplePath& B, double t);

/// Left-point Riemann sum of the occupation integral with d<X> = sigma^2(X) dt
/// over [0, t): band [0, eps) scaled by 1/eps when one_sided, else band
/// (-eps, eps) scaled by 1/(2 eps). With Grid::reflected the band is applied to
/// X + beta sqrt(dt).
LocalTimeEstimate local_time_occupation(const SamplePath& X, const Coefficient& sigma, double eps, double t,
                                        bool one_sided, Grid grid = Grid::raw);

/// |X_t| - sum_k sgn(X_k) (X_{k+1} - X_k) over the grid up to t.
double tanaka_residual(const SamplePath& X, double t);

void write_estimates_csv(std::ostream& out, const std::vector<LocalTimeEstimate>& estimates);

}  // namespace exlab
