#include "exlab/report.hpp"

#include "exlab/errors.hpp"
#include "exlab/format.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdio>
#include <ostream>

namespace exlab {

bool compare(double statistic, std::string_view rule, double threshold) {
    if (std::isnan(statistic)) return false;
    if (rule == "<") return statistic < threshold;
    if (rule == "<=") return statistic <= threshold;
    if (rule == ">") return statistic > threshold;
    if (rule == ">=") return statistic >= threshold;
    throw InvalidArgument("unknown comparison rule '" + std::string(rule) + "'");
}

VerificationReport& VerificationReport::evaluate() {
    passed = compare(statistic, rule, threshold);
    return *this;
}

VerificationReport& VerificationReport::note(const std::string& key, const std::string& value) {
    details[key] = value;
    return *this;
}

VerificationReport& VerificationReport::note(const std::string& key, double value) {
    details[key] = fmt_double(value);
    return *this;
}

namespace {

// JSON has no infinities; keep them as strings.
nlohmann::json number(double v) {
    if (std::isfinite(v)) return v;
    if (std::isnan(v)) return "nan";
    return v > 0 ? "inf" : "-inf";
}

double from_number(const nlohmann::json& j) {
    if (j.is_number()) return j.get<double>();
    const auto s = j.get<std::string>();
    if (s == "inf") return INFINITY;
    if (s == "-inf") return -INFINITY;
    if (s == "nan") return NAN;
    throw InvalidArgument("malformed number '" + s + "'");
}

}  // namespace

std::string to_json_line(const VerificationReport& r) {
    nlohmann::json j;
    j["name"] = r.name;
    j["statistic"] = number(r.statistic);
    j["threshold"] = number(r.threshold);
    j["rule"] = r.rule;
    j["n"] = r.n;
    j["passed"] = r.passed;
    j["seed"] = r.seed;
    j["mandatory"] = r.mandatory;
    j["statistical"] = r.statistical;
    j["details"] = r.details;
    return j.dump();
}

VerificationReport report_from_json_line(std::string_view line) {
    const auto j = nlohmann::json::parse(line);
    VerificationReport r;
    r.name = j.at("name").get<std::string>();
    r.statistic = from_number(j.at("statistic"));
    r.threshold = from_number(j.at("threshold"));
    r.rule = j.at("rule").get<std::string>();
    r.n = j.at("n").get<std::size_t>();
    r.passed = j.at("passed").get<bool>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.mandatory = j.value("mandatory", true);
    r.statistical = j.value("statistical", true);
    if (j.contains("details")) r.details = j.at("details").get<std::map<std::string, std::string>>();
    return r;
}

void print_table(std::ostream& out, const std::vector<VerificationReport>& reports) {
    char line[256];
    std::snprintf(line, sizeof line, "%-44s %14s %3s %12s %9s  %s\n", "check", "statistic", "", "threshold", "n",
                  "result");
    out << line;
    for (const auto& r : reports) {
        std::snprintf(line, sizeof line, "%-44s %14.6g %3s %12.6g %9zu  %s%s\n", r.name.c_str(), r.statistic,
                      r.rule.c_str(), r.threshold, r.n, r.passed ? "PASS" : "FAIL", r.mandatory ? "" : " (advisory)");
        out << line;
    }
}

void write_reports_csv(std::ostream& out, const std::vector<VerificationReport>& reports) {
    out << "name,statistic,rule,threshold,n,passed,seed,mandatory\n";
    for (const auto& r : reports)
        out << r.name << ',' << fmt_double(r.statistic) << ',' << r.rule << ',' << fmt_double(r.threshold) << ','
            << r.n << ',' << (r.passed ? 1 : 0) << ',' << r.seed << ',' << (r.mandatory ? 1 : 0) << '\n';
}

bool all_mandatory_passed(const std::vector<VerificationReport>& reports) {
    for (const auto& r : reports)
        if (r.mandatory && !r.passed) return false;
    return true;
}

}  // namespace exlab
