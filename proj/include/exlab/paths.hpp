#pragma once

// Discretized paths on a uniform grid: Brownian drivers, the Skorokhod
// reflection, Euler-Maruyama solutions of driftless SDEs and the time change
// A_t = int_0^t sigma^2(X_s) ds together with its inverse.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string_view>
#include <vector>

namespace exlab {

enum class PathKind { brownian, reflected, sde, derived };

std::string_view to_string(PathKind kind);
PathKind path_kind_from_string(std::string_view name);

/// Values of a process on the grid t_k = k * dt, k = 0..size()-1.
struct SamplePath {
    double dt = 1.0;
    std::vector<double> values;
    std::uint64_t seed = 0;
    PathKind kind = PathKind::derived;

    std::size_t size() const { return values.size(); }
    std::size_t steps() const { return values.empty() ? 0 : values.size() - 1; }
    double time(std::size_t k) const { return static_cast<double>(k) * dt; }
    double horizon() const { return time(steps()); }
    double operator[](std::size_t k) const { return values[k]; }

    /// Grid index of the last grid time <= t (clamped to the path).
    std::size_t index_at(double t) const;
    /// Linear interpolation at an arbitrary time in [0, horizon].
    double interpolate(double t) const;

    /// Throws InvalidArgument unless dt > 0, size >= 1 and all values finite.
    void validate() const;
};

/// Sign with the right-continuous convention sgn(0) = +1.
constexpr double sgn(double x) { return x >= 0.0 ? 1.0 : -1.0; }

/// A diffusion coefficient: either the step function a*1{x>=0} + b*1{x<0},
/// or an odd piecewise-constant function sigma(x) = levels[k] * sgn(x) on the
/// k-th band of |x| (bands are [0,b_1), [b_1,b_2), ..., [b_n, inf)).
class Coefficient {
public:
    enum class Variant { step, odd_piecewise };

    using Witness = std::function<double(double)>;

    static Coefficient step(double a, double b);
    static Coefficient odd_piecewise(std::vector<double> breakpoints, std::vector<double> levels);

    Coefficient& with_witness(Witness f);

    double operator()(double x) const;
    double abs_at(double x) const;

    Variant variant() const { return variant_; }
    bool is_step() const { return variant_ == Variant::step; }
    double a() const { return a_; }
    double b() const { return b_; }
    const std::vector<double>& breakpoints() const { return breakpoints_; }
    const std::vector<double>& levels() const { return levels_; }

    /// Bounds of |sigma|; both strictly positive for every valid coefficient.
    double c_min() const;
    double c_max() const;

    /// Odd on R \ {0}.
    bool is_odd() const;
    /// x * sigma(x) >= 0 everywhere.
    bool sign_compatible() const;
    /// The regime a > 0 > b of the step equation.
    bool sign_changing_step() const { return is_step() && a_ > 0.0 && b_ < 0.0; }

    struct Jump {
        double at;
        double before;
        double after;
        bool inclusive;  // true: sigma(at) == after, false: sigma(at) == before
    };
    std::vector<Jump> jumps() const;

    const std::optional<Witness>& witness() const { return witness_; }

private:
    Coefficient() = default;

    Variant variant_ = Variant::step;
    double a_ = 1.0;
    double b_ = 1.0;
    std::vector<double> breakpoints_;
    std::vector<double> levels_;
    std::optional<Witness> witness_;
};

/// Reflected path Y >= 0 and the boundary term that keeps it nonnegative.
struct ReflectedPath {
    SamplePath Y;
    SamplePath ell;
};

/// A_t = int_0^t sigma^2(X_s) ds on the source grid and its inverse
/// alpha_s = inf{t : A_t > s} sampled on a target grid.
struct TimeChange {
    std::vector<double> A;
    std::vector<double> alpha;
    double source_dt = 1.0;
    double target_dt = 1.0;

    /// A at an arbitrary source time (linear interpolation).
    double forward_at(double t) const;
    /// alpha at an arbitrary target time s in [0, A.back()].
    double inverse_at(double s) const;
};

struct TimeChangedPath {
    SamplePath path;
    bool truncated = false;
};

/// Brownian motion started at 0: increments N(0, dt) from the Philox stream
/// keyed by `seed`. horizon must be 0 or at least dt.
SamplePath sample_brownian(std::uint64_t seed, double horizon, double dt);

/// Skorokhod map: Y = B + ell, ell_t = -min(0, inf_{s<=t} B_s).
ReflectedPath reflect_skorokhod(const SamplePath& B);

/// Euler-Maruyama for X_t = int_0^t sigma(X_s) dB_s started at 0.
SamplePath euler_sde(const Coefficient& sigma, const SamplePath& B);

/// Euler step with |sigma| followed by projection onto [0, inf); the projected
/// mass accumulates in the boundary term.
ReflectedPath euler_reflected_sde(const Coefficient& sigma, const SamplePath& B);

/// Hitting time of `level` by the reflected path of sample_brownian(seed, ., dt),
/// generated step by step and stopped at the hit. Bitwise consistent with
/// scanning reflect_skorokhod(sample_brownian(seed, max_horizon, dt)).Y.
std::optional<double> first_passage_reflected(std::uint64_t seed, double level, double dt,
                                              double max_horizon);

/// Time change of X under sigma; target_dt <= 0 means "same as X.dt".
TimeChange time_change(const SamplePath& X, const Coefficient& sigma, double target_dt = 0.0);

/// X resampled at alpha(s_m), s_m = m * target_dt. A target_horizon beyond
/// A's range is truncated and flagged; target_horizon < 0 uses A's range.
TimeChangedPath apply_time_change(const SamplePath& X, const TimeChange& tc, double target_dt,
                                  double target_horizon = -1.0);

/// Discrete quadratic variation sum (X_{k+1} - X_k)^2 up to grid index `upto`.
double quadratic_variation(const SamplePath& X, std::size_t upto);
/// Left-point Riemann sum of sigma^2(X_k) dt up to grid index `upto`.
double integrated_variance(const SamplePath& X, const Coefficient& sigma, std::size_t upto);

}  // namespace exlab
