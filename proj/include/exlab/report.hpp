#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace exlab {

/// Outcome of one named check: passed == (statistic <rule> threshold).
struct VerificationReport {
    std::string name;
    double statistic = 0.0;
    double threshold = 0.0;
    std::string rule = "<";  // one of "<", "<=", ">", ">="
    std::size_t n = 0;
    bool passed = false;
    std::uint64_t seed = 0;
    bool mandatory = true;
    bool statistical = true;  // exact identities are never rerun
    std::map<std::string, std::string> details;

    /// Recomputes `passed` from statistic, rule and threshold.
    VerificationReport& evaluate();
    VerificationReport& note(const std::string& key, const std::string& value);
    VerificationReport& note(const std::string& key, double value);
};

bool compare(double statistic, std::string_view rule, double threshold);

std::string to_json_line(const VerificationReport& r);
VerificationReport report_from_json_line(std::string_view line);

/// Fixed-width table: name, statistic, rule, threshold, n, verdict.
void print_table(std::ostream& out, const std::vector<VerificationReport>& reports);
/// One line per report, plot-ready.
void write_reports_csv(std::ostream& out, const std::vector<VerificationReport>& reports);

bool all_mandatory_passed(const std::vector<VerificationReport>& reports);

}  // namespace exlab
