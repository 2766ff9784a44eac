#pragma once

// Distributional tests. Levels are fixed: 5% for KS, 1% for chi-square,
// 3 sigma for frequencies.

#include "exlab/report.hpp"

#include <functional>
#include <string>
#include <vector>

namespace exlab::stats {

inline constexpr double kKsCoefficient = 1.36;
inline constexpr double kChiSquareLevel = 0.01;
inline constexpr double kSigmas = 3.0;
inline constexpr std::size_t kMinKsSamples = 30;
inline constexpr std::size_t kMinSigns = 50;

double normal_cdf(double x);
double median(std::vector<double> v);
double mean(const std::vector<double>& v);
double pearson(const std::vector<double>& x, const std::vector<double>& y);

/// sup |F_n - F|; passes iff below 1.36 / sqrt(n).
VerificationReport ks_test(std::vector<double> samples, const std::function<double(double)>& cdf,
                           std::string name = "ks");

/// Two-sample KS at 5%: threshold 1.36 sqrt((n + m) / (n m)).
VerificationReport ks_two_sample(std::vector<double> x, std::vector<double> y, std::string name = "ks2");

/// Pearson chi-square of the +1 count against Binomial(M, p), one degree of
/// freedom; passes iff the p-value exceeds 1%.
VerificationReport chi_square_signs(const std::vector<int>& signs, double p, std::string name = "chi_square_signs");

/// Sign frequency homogeneity across length quartiles: 4x2 contingency
/// chi-square, 3 degrees of freedom, 1% level.
VerificationReport quartile_homogeneity(const std::vector<int>& signs, const std::vector<double>& lengths,
                                        std::string name = "quartile_homogeneity");

/// |corr(sign, log length)| < 3 / sqrt(M).
VerificationReport sign_length_correlation(const std::vector<int>& signs, const std::vector<double>& lengths,
                                           std::string name = "sign_length_correlation");

/// |successes / n - p| < tolerance; a negative tolerance means 3 sqrt(p (1 - p) / n).
VerificationReport frequency_test(std::size_t successes, std::size_t n, double p, std::string name = "frequency",
                                  double tolerance = -1.0);

/// chi-square upper-tail probability.
double chi_square_sf(double x, double dof);

}  // namespace exlab::stats
