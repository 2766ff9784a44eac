#include "exlab/paths.hpp"

#include "exlab/errors.hpp"
#include "exlab/rng.hpp"

#include <boost/random/normal_distribution.hpp>

#include <algorithm>
#include <cmath>
#include <string>

namespace exlab {

namespace {

constexpr double kGridSlack = 1e-9;

std::size_t grid_steps(double horizon, double dt) {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidArgument("dt must be positive and finite");
    if (!(horizon >= 0.0) || !std::isfinite(horizon)) throw InvalidArgument("horizon must be nonnegative");
    if (horizon == 0.0) return 0;
    if (horizon < dt * (1.0 - kGridSlack)) throw InvalidArgument("horizon must be 0 or at least dt");
    return static_cast<std::size_t>(std::floor(horizon / dt + kGridSlack));
}

}  // namespace

std::string_view to_string(PathKind kind) {
    switch (kind) {
        case PathKind::brownian: return "brownian";
        case PathKind::reflected: return "reflected";
        case PathKind::sde: return "sde";
        case PathKind::derived: return "derived";
    }
    return "derived";
}

PathKind path_kind_from_string(std::string_view name) {
    if (name == "brownian") return PathKind::brownian;
    if (name == "reflected") return PathKind::reflected;
    if (name == "sde") return PathKind::sde;
    if (name == "derived") return PathKind::derived;
    throw InvalidArgument("unknown path kind '" + std::string(name) + "'");
}

std::size_t SamplePath::index_at(double t) const {
    if (values.empty()) throw InvalidArgument("empty path");
    if (t <= 0.0) return 0;
    const auto k = static_cast<std::size_t>(std::floor(t / dt + kGridSlack));
    return std::min(k, steps());
}

double SamplePath::interpolate(double t) const {
    if (values.empty()) throw InvalidArgument("empty path");
    if (t <= 0.0) return values.front();
    const double x = t / dt;
    const auto k = static_cast<std::size_t>(std::floor(x));
    if (k >= steps()) return values.back();
    const double w = x - static_cast<double>(k);
    if (w == 0.0) return values[k];
    return values[k] + w * (values[k + 1] - values[k]);
}

void SamplePath::validate() const {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidArgument("path dt must be positive");
    if (values.empty()) throw InvalidArgument("path must hold at least one value");
    for (double v : values)
        if (!std::isfinite(v)) throw InvalidArgument("path holds a non-finite value");
    if (kind == PathKind::reflected)
        for (double v : values)
            if (v < 0.0) throw InvalidArgument("reflected path holds a negative value");
}

// ---------------------------------------------------------------------------
// Coefficient

Coefficient Coefficient::step(double a, double b) {
    if (!std::isfinite(a) || !std::isfinite(b) || a == 0.0 || b == 0.0)
        throw InvalidArgument("step coefficient needs finite nonzero a and b");
    Coefficient c;
    c.variant_ = Variant::step;
    c.a_ = a;
    c.b_ = b;
    return c;
}

Coefficient Coefficient::odd_piecewise(std::vector<double> breakpoints, std::vector<double> levels) {
    if (levels.size() != breakpoints.size() + 1)
        throw InvalidArgument("odd piecewise coefficient needs one more level than breakpoints");
    for (std::size_t i = 0; i < breakpoints.size(); ++i) {
        if (!(breakpoints[i] > 0.0) || !std::isfinite(breakpoints[i]))
            throw InvalidArgument("breakpoints must be positive and finite");
        if (i > 0 && !(breakpoints[i] > breakpoints[i - 1]))
            throw InvalidArgument("breakpoints must be strictly increasing");
    }
    for (double l : levels)
        if (!(l > 0.0) || !std::isfinite(l)) throw InvalidArgument("levels must be positive and finite");
    Coefficient c;
    c.variant_ = Variant::odd_piecewise;
    c.breakpoints_ = std::move(breakpoints);
    c.levels_ = std::move(levels);
    return c;
}

Coefficient& Coefficient::with_witness(Witness f) {
    witness_ = std::move(f);
    return *this;
}

double Coefficient::abs_at(double x) const {
    if (variant_ == Variant::step) return std::abs(x >= 0.0 ? a_ : b_);
    const double r = std::abs(x);
    const auto band = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), r) - breakpoints_.begin();
    return levels_[static_cast<std::size_t>(band)];
}

double Coefficient::operator()(double x) const {
    if (variant_ == Variant::step) return x >= 0.0 ? a_ : b_;
    return sgn(x) * abs_at(x);
}

double Coefficient::c_min() const {
    if (variant_ == Variant::step) return std::min(std::abs(a_), std::abs(b_));
    return *std::min_element(levels_.begin(), levels_.end());
}

double Coefficient::c_max() const {
    if (variant_ == Variant::step) return std::max(std::abs(a_), std::abs(b_));
    return *std::max_element(levels_.begin(), levels_.end());
}

bool Coefficient::is_odd() const {
    return variant_ == Variant::odd_piecewise || b_ == -a_;
}

bool Coefficient::sign_compatible() const {
    return variant_ == Variant::odd_piecewise || (a_ > 0.0 && b_ < 0.0);
}

std::vector<Coefficient::Jump> Coefficient::jumps() const {
    std::vector<Jump> out;
    auto add = [&out](double at, double before, double after, bool inclusive) {
        if (before != after) out.push_back({at, before, after, inclusive});
    };
    if (variant_ == Variant::step) {
        add(0.0, b_, a_, true);
        return out;
    }
    // |x| = b_k already belongs to the outer band, so on the negative side the
    // value at -b_k is the left one.
    for (std::size_t k = breakpoints_.size(); k-- > 0;) add(-breakpoints_[k], -levels_[k + 1], -levels_[k], false);
    add(0.0, -levels_[0], levels_[0], true);
    for (std::size_t k = 0; k < breakpoints_.size(); ++k) add(breakpoints_[k], levels_[k], levels_[k + 1], true);
    return out;
}

// ---------------------------------------------------------------------------
// Paths

SamplePath sample_brownian(std::uint64_t seed, double horizon, double dt) {
    const std::size_t n = grid_steps(horizon, dt);
    SamplePath B;
    B.dt = dt;
    B.seed = seed;
    B.kind = PathKind::brownian;
    B.values.resize(n + 1);
    B.values[0] = 0.0;
    rng::PhiloxEngine engine(seed);
    boost::random::normal_distribution<double> normal(0.0, 1.0);
    const double scale = std::sqrt(dt);
    double x = 0.0;
    for (std::size_t k = 1; k <= n; ++k) {
        x += scale * normal(engine);
        B.values[k] = x;
    }
    return B;
}

ReflectedPath reflect_skorokhod(const SamplePath& B) {
    B.validate();
    if (B.values[0] != 0.0) throw InvalidArgument("driver must start at 0");
    ReflectedPath out;
    out.Y = SamplePath{B.dt, std::vector<double>(B.size()), B.seed, PathKind::reflected};
    out.ell = SamplePath{B.dt, std::vector<double>(B.size()), B.seed, PathKind::derived};
    double running_min = 0.0;
    for (std::size_t k = 0; k < B.size(); ++k) {
        running_min = std::min(running_min, B.values[k]);
        const double ell = -running_min;
        out.ell.values[k] = ell;
        out.Y.values[k] = B.values[k] + ell;
    }
    return out;
}

SamplePath euler_sde(const Coefficient& sigma, const SamplePath& B) {
    B.validate();
    SamplePath X{B.dt, std::vector<double>(B.size()), B.seed, PathKind::sde};
    double x = 0.0;
    X.values[0] = x;
    for (std::size_t k = 0; k + 1 < B.size(); ++k) {
        x += sigma(x) * (B.values[k + 1] - B.values[k]);
        X.values[k + 1] = x;
    }
    return X;
}

ReflectedPath euler_reflected_sde(const Coefficient& sigma, const SamplePath& B) {
    B.validate();
    if (!(sigma.c_min() > 0.0)) throw InvalidArgument("|sigma| must be bounded away from 0");
    ReflectedPath out;
    out.Y = SamplePath{B.dt, std::vector<double>(B.size()), B.seed, PathKind::reflected};
    out.ell = SamplePath{B.dt, std::vector<double>(B.size()), B.seed, PathKind::derived};
    double y = 0.0;
    double ell = 0.0;
    for (std::size_t k = 0; k + 1 < B.size(); ++k) {
        const double free = y + sigma.abs_at(y) * (B.values[k + 1] - B.values[k]);
        if (free < 0.0) {
            ell -= free;
            y = 0.0;
        } else {
            y = free;
        }
        out.Y.values[k + 1] = y;
        out.ell.values[k + 1] = ell;
    }
    return out;
}

std::optional<double> first_passage_reflected(std::uint64_t seed, double level, double dt,
                                              double max_horizon) {
    const std::size_t n = grid_steps(max_horizon, dt);
    if (level <= 0.0) return 0.0;
    rng::PhiloxEngine engine(seed);
    boost::random::normal_distribution<double> normal(0.0, 1.0);
    const double scale = std::sqrt(dt);
    double b = 0.0;
    double running_min = 0.0;
    for (std::size_t k = 1; k <= n; ++k) {
        b += scale * normal(engine);
        running_min = std::min(running_min, b);
        if (b + (-running_min) >= level) return static_cast<double>(k) * dt;
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Time change

double TimeChange::forward_at(double t) const {
    if (A.empty()) throw InvalidArgument("empty time change");
    if (t <= 0.0) return A.front();
    const double x = t / source_dt;
    const auto k = static_cast<std::size_t>(std::floor(x));
    if (k + 1 >= A.size()) return A.back();
    const double w = x - static_cast<double>(k);
    return A[k] + w * (A[k + 1] - A[k]);
}

double TimeChange::inverse_at(double s) const {
    if (A.empty()) throw InvalidArgument("empty time change");
    if (s <= 0.0) return 0.0;
    if (s > A.back()) throw InvalidArgument("time-change argument beyond the range of A");
    // first k with A[k] >= s; A is strictly increasing
    const auto it = std::lower_bound(A.begin(), A.end(), s);
    const auto k = static_cast<std::size_t>(it - A.begin());
    if (*it == s) return static_cast<double>(k) * source_dt;
    const double lo = A[k - 1];
    const double w = (s - lo) / (A[k] - lo);
    return (static_cast<double>(k - 1) + w) * source_dt;
}

TimeChange time_change(const SamplePath& X, const Coefficient& sigma, double target_dt) {
    X.validate();
    if (!(sigma.c_min() > 0.0)) throw InvalidArgument("|sigma| must be bounded away from 0");
    TimeChange tc;
    tc.source_dt = X.dt;
    tc.target_dt = target_dt > 0.0 ? target_dt : X.dt;
    tc.A.resize(X.size());
    double acc = 0.0;
    tc.A[0] = 0.0;
    for (std::size_t k = 0; k + 1 < X.size(); ++k) {
        const double s = sigma(X.values[k]);
        acc += s * s * X.dt;
        tc.A[k + 1] = acc;
    }
    const auto m = static_cast<std::size_t>(std::floor(acc / tc.target_dt + kGridSlack));
    tc.alpha.reserve(m + 1);
    for (std::size_t j = 0; j <= m; ++j) {
        const double s = std::min(static_cast<double>(j) * tc.target_dt, acc);
        tc.alpha.push_back(tc.inverse_at(s));
    }
    return tc;
}

TimeChangedPath apply_time_change(const SamplePath& X, const TimeChange& tc, double target_dt,
                                  double target_horizon) {
    X.validate();
    if (tc.A.size() != X.size() || tc.source_dt != X.dt)
        throw InvalidArgument("time change was not derived from this path's grid");
    if (!(target_dt > 0.0)) throw InvalidArgument("target dt must be positive");
    const double range = tc.A.back();
    TimeChangedPath out;
    double horizon = target_horizon < 0.0 ? range : target_horizon;
    if (horizon > range * (1.0 + kGridSlack)) {
        out.truncated = true;
        horizon = range;
    }
    const auto m = static_cast<std::size_t>(std::floor(horizon / target_dt + kGridSlack));
    out.path = SamplePath{target_dt, {}, X.seed, PathKind::derived};
    out.path.values.reserve(m + 1);
    for (std::size_t j = 0; j <= m; ++j) {
        const double s = std::min(static_cast<double>(j) * target_dt, range);
        out.path.values.push_back(X.interpolate(tc.inverse_at(s)));
    }
    return out;
}

double quadratic_variation(const SamplePath& X, std::size_t upto) {
    upto = std::min(upto, X.steps());
    double acc = 0.0;
    for (std::size_t k = 0; k < upto; ++k) {
        const double d = X.values[k + 1] - X.values[k];
        acc += d * d;
    }
    return acc;
}

double integrated_variance(const SamplePath& X, const Coefficient& sigma, std::size_t upto) {
    upto = std::min(upto, X.steps());
    double acc = 0.0;
    for (std::size_t k = 0; k < upto; ++k) {
        const double s = sigma(X.values[k]);
        acc += s * s * X.dt;
    }
    return acc;
}

}  // namespace exlab
