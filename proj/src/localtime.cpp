#include "exlab/localtime.hpp"

#include "exlab/errors.hpp"
#include "exlab/format.hpp"

#include <cmath>
#include <ostream>

namespace exlab {

std::string_view to_string(LocalTimeMethod m) {
    switch (m) {
        case LocalTimeMethod::downcrossing: return "downcrossing";
        case LocalTimeMethod::occupation: return "occupation";
        case LocalTimeMethod::symmetric: return "symmetric";
        case LocalTimeMethod::exact_reflecting: return "exact_reflecting";
    }
    return "unknown";
}

std::size_t downcrossings(const SamplePath& Y, double eps, double t, double tol) {
    if (!(eps > tol)) throw InvalidArgument("eps must exceed the zero tolerance");
    const std::size_t upto = Y.index_at(t);
    std::size_t count = 0;
    bool above = false;
    for (std::size_t k = 0; k <= upto; ++k) {
        if (!above) {
            above = Y.values[k] >= eps;
        } else if (Y.values[k] <= tol) {
            ++count;
            above = false;
        }
    }
    return count;
}

double grid_overshoot(double dt) { return kGridOvershoot * std::sqrt(dt); }

LocalTimeEstimate local_time_downcrossing(const SamplePath& Y, double eps, double t, Grid grid) {
    if (!(eps > 0.0)) throw InvalidArgument("eps must be positive");
    const double level = grid == Grid::reflected ? eps - 2.0 * grid_overshoot(Y.dt) : eps;
    if (!(level > 0.0)) throw InvalidArgument("eps is below the grid correction 2 beta sqrt(dt)");
    const auto d = downcrossings(Y, level, t);
    return {Y.time(Y.index_at(t)), kDowncrossingCalibration * eps * static_cast<double>(d),
            LocalTimeMethod::downcrossing, eps, Y.seed};
}

SamplePath local_time_exact_path(const SamplePath& Y, const SamplePath& B) {
    if (Y.size() != B.size() || Y.dt != B.dt) throw InvalidArgument("Y and B live on different grids");
    auto r = reflect_skorokhod(B);
    if (r.Y.values != Y.values) throw InvalidArgument("Y is not the reflection of this driver");
    for (auto& v : r.ell.values) v *= 2.0;
    return r.ell;
}

LocalTimeEstimate local_time_exact_reflecting(const SamplePath& Y, const SamplePath& B, double t) {
    const auto L = local_time_exact_path(Y, B);
    const auto k = L.index_at(t);
    return {L.time(k), L.values[k], LocalTimeMethod::exact_reflecting, 0.0, B.seed};
}

LocalTimeEstimate local_time_occupation(const SamplePath& X, const Coefficient& sigma, double eps, double t,
                                        bool one_sided, Grid grid) {
    if (!(eps > 0.0)) throw InvalidArgument("eps must be positive");
    const double shift = grid == Grid::reflected ? grid_overshoot(X.dt) : 0.0;
    const std::size_t upto = X.index_at(t);
    double acc = 0.0;
    for (std::size_t k = 0; k < upto; ++k) {
        const double x = X.values[k] + shift;
        const bool in = one_sided ? (x >= 0.0 && x < eps) : std::abs(x) < eps;
        if (!in) continue;
        const double s = sigma(x);
        acc += s * s * X.dt;
    }
    const double value = one_sided ? acc / eps : acc / (2.0 * eps);
    return {X.time(upto), value, one_sided ? LocalTimeMethod::occupation : LocalTimeMethod::symmetric, eps, X.seed};
}

double tanaka_residual(const SamplePath& X, double t) {
    if (X.values.empty() || X.values[0] != 0.0) throw InvalidArgument("path must start at 0");
    const std::size_t upto = X.index_at(t);
    double integral = 0.0;
    for (std::size_t k = 0; k < upto; ++k) integral += sgn(X.values[k]) * (X.values[k + 1] - X.values[k]);
    return std::abs(X.values[upto]) - integral;
}

void write_estimates_csv(std::ostream& out, const std::vector<LocalTimeEstimate>& estimates) {
    out << "t,method,eps,value,seed\n";
    for (const auto& e : estimates)
        out << fmt_double(e.t) << ',' << to_string(e.method) << ',' << fmt_double(e.eps) << ','
            << fmt_double(e.value) << ',' << e.seed << '\n';
}

}  // namespace exlab
