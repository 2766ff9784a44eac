#include "exlab/stats.hpp"

#include "exlab/errors.hpp"

#include <boost/math/distributions/chi_squared.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

namespace exlab::stats {

double normal_cdf(double x) {
    return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

double median(std::vector<double> v) {
    if (v.empty()) throw InsufficientData("median of an empty sample");
    const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
    std::nth_element(v.begin(), mid, v.end());
    if (v.size() % 2 == 1) return *mid;
    const double hi = *mid;
    const double lo = *std::max_element(v.begin(), mid);
    return 0.5 * (lo + hi);
}

double mean(const std::vector<double>& v) {
    if (v.empty()) throw InsufficientData("mean of an empty sample");
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw InvalidArgument("correlation needs two equal samples of size >= 2");
    const double mx = mean(x);
    const double my = mean(y);
    double sxy = 0.0;
    double sxx = 0.0;
    double syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0) return 0.0;
    return sxy / std::sqrt(sxx * syy);
}

double chi_square_sf(double x, double dof) {
    if (std::isinf(x)) return 0.0;
    if (x <= 0.0) return 1.0;
    return boost::math::cdf(boost::math::complement(boost::math::chi_squared(dof), x));
}

namespace {

double chi_square_critical(double dof) {
    return boost::math::quantile(boost::math::complement(boost::math::chi_squared(dof), kChiSquareLevel));
}

// (observed - expected)^2 / expected, with 0/0 = 0 and x/0 = inf.
double chi_term(double observed, double expected) {
    const double d = observed - expected;
    if (expected == 0.0) return d == 0.0 ? 0.0 : INFINITY;
    return d * d / expected;
}

void check_signs(const std::vector<int>& signs) {
    for (int s : signs)
        if (s != 1 && s != -1) throw InvalidArgument("signs must be +1 or -1");
}

}  // namespace

VerificationReport ks_test(std::vector<double> samples, const std::function<double(double)>& cdf, std::string name) {
    if (samples.empty()) throw InvalidArgument("KS test on an empty sample");
    if (samples.size() < kMinKsSamples) throw InsufficientData("KS test needs at least 30 samples");
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double D = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double F = cdf(samples[i]);
        D = std::max({D, static_cast<double>(i + 1) / n - F, F - static_cast<double>(i) / n});
    }
    VerificationReport r;
    r.name = std::move(name);
    r.statistic = D;
    r.threshold = kKsCoefficient / std::sqrt(n);
    r.rule = "<";
    r.n = samples.size();
    r.note("level", "0.05");
    return r.evaluate();
}

VerificationReport ks_two_sample(std::vector<double> x, std::vector<double> y, std::string name) {
    if (x.empty() || y.empty()) throw InvalidArgument("KS test on an empty sample");
    if (x.size() < kMinKsSamples || y.size() < kMinKsSamples) throw InsufficientData("KS test needs 30 samples each");
    std::sort(x.begin(), x.end());
    std::sort(y.begin(), y.end());
    const double n = static_cast<double>(x.size());
    const double m = static_cast<double>(y.size());
    std::size_t i = 0;
    std::size_t j = 0;
    double D = 0.0;
    while (i < x.size() && j < y.size()) {
        const double v = std::min(x[i], y[j]);
        while (i < x.size() && x[i] == v) ++i;
        while (j < y.size() && y[j] == v) ++j;
        D = std::max(D, std::abs(static_cast<double>(i) / n - static_cast<double>(j) / m));
    }
    VerificationReport r;
    r.name = std::move(name);
    r.statistic = D;
    r.threshold = kKsCoefficient * std::sqrt((n + m) / (n * m));
    r.rule = "<";
    r.n = x.size() + y.size();
    r.note("level", "0.05");
    return r.evaluate();
}

VerificationReport chi_square_signs(const std::vector<int>& signs, double p, std::string name) {
    if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument("p must lie in [0, 1]");
    check_signs(signs);
    if (signs.size() < kMinSigns) throw InsufficientData("chi-square needs at least 50 signs");
    const double M = static_cast<double>(signs.size());
    const double plus = static_cast<double>(std::count(signs.begin(), signs.end(), 1));
    const double stat = chi_term(plus, M * p) + chi_term(M - plus, M * (1.0 - p));
    VerificationReport r;
    r.name = std::move(name);
    r.statistic = stat;
    r.threshold = chi_square_critical(1.0);
    r.rule = "<";
    r.n = signs.size();
    r.note("p_value", chi_square_sf(stat, 1.0));
    r.note("frequency", plus / M);
    r.note("p", p);
    r.note("level", "0.01");
    return r.evaluate();
}

VerificationReport quartile_homogeneity(const std::vector<int>& signs, const std::vector<double>& lengths,
                                        std::string name) {
    if (signs.size() != lengths.size()) throw InvalidArgument("signs and lengths differ in size");
    check_signs(signs);
    if (signs.size() < kMinSigns) throw InsufficientData("homogeneity test needs at least 50 signs");
    std::vector<std::size_t> order(signs.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return lengths[a] < lengths[b]; });
    std::array<std::array<double, 2>, 4> table{};
    for (std::size_t q = 0; q < order.size(); ++q) {
        const std::size_t row = q * 4 / order.size();
        table[row][signs[order[q]] > 0 ? 0 : 1] += 1.0;
    }
    const double total = static_cast<double>(signs.size());
    std::array<double, 2> col{};
    for (const auto& row : table) {
        col[0] += row[0];
        col[1] += row[1];
    }
    double stat = 0.0;
    for (const auto& row : table) {
        const double rs = row[0] + row[1];
        for (int c = 0; c < 2; ++c) stat += chi_term(row[c], rs * col[c] / total);
    }
    VerificationReport r;
    r.name = std::move(name);
    r.statistic = stat;
    r.threshold = chi_square_critical(3.0);
    r.rule = "<";
    r.n = signs.size();
    r.note("p_value", chi_square_sf(stat, 3.0));
    r.note("level", "0.01");
    return r.evaluate();
}

VerificationReport sign_length_correlation(const std::vector<int>& signs, const std::vector<double>& lengths,
                                           std::string name) {
    if (signs.size() != lengths.size()) throw InvalidArgument("signs and lengths differ in size");
    check_signs(signs);
    if (signs.size() < kMinSigns) throw InsufficientData("correlation test needs at least 50 signs");
    std::vector<double> s(signs.begin(), signs.end());
    std::vector<double> l;
    l.reserve(lengths.size());
    for (double x : lengths) {
        if (!(x > 0.0)) throw InvalidArgument("lengths must be positive");
        l.push_back(std::log(x));
    }
    const double rho = pearson(s, l);
    VerificationReport r;
    r.name = std::move(name);
    r.statistic = std::abs(rho);
    r.threshold = kSigmas / std::sqrt(static_cast<double>(signs.size()));
    r.rule = "<";
    r.n = signs.size();
    r.note("rho", rho);
    return r.evaluate();
}

VerificationReport frequency_test(std::size_t successes, std::size_t n, double p, std::string name,
                                  double tolerance) {
    if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument("p must lie in [0, 1]");
    if (n == 0) throw InsufficientData("frequency test on an empty sample");
    if (successes > n) throw InvalidArgument("more successes than trials");
    const double N = static_cast<double>(n);
    const double sigma = std::sqrt(p * (1.0 - p) / N);
    const double freq = static_cast<double>(successes) / N;
    VerificationReport r;
    r.name = std::move(name);
    r.statistic = std::abs(freq - p);
    r.threshold = tolerance >= 0.0 ? tolerance : kSigmas * sigma;
    r.rule = r.threshold == 0.0 ? "<=" : "<";
    r.n = n;
    r.note("frequency", freq);
    r.note("p", p);
    r.note("sigma", sigma);
    return r.evaluate();
}

}  // namespace exlab::stats
