#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace exlab::cli {

enum ExitCode : int { kOk = 0, kCheckFailed = 1, kInvalidConfig = 2, kNumericalFailure = 3 };

/// Everything a run needs. Values come from defaults, then the --config
/// file, then explicit flags.
struct RunConfig {
    std::string command;
    std::string what = "brownian";  // simulate: brownian | reflected | sde | skew
    std::string theorem = "1";      // 1 | 2 | appendix
    double a = 2.0;
    double b = -1.0;
    std::vector<double> breakpoints{1.0};
    std::vector<double> levels{1.0, 2.0};
    double alpha = 0.5;
    std::optional<double> p;
    double dt = 1e-4;
    double horizon = 1.0;
    std::size_t paths = 1;
    std::uint64_t seed = 42;
    double eps = 0.01;
    std::optional<double> delta_min;
    std::string out;
    std::string format = "csv";  // csv | json | binary
    int workers = 0;
    std::string input;
    std::vector<std::string> inputs;

    double effective_delta_min() const { return delta_min ? *delta_min : 100.0 * dt; }
};

/// Throws InvalidArgument naming the first offending parameter.
void validate(const RunConfig& cfg);

/// Executes a validated config; outputs are written atomically.
int run(const RunConfig& cfg, std::ostream& out, std::ostream& err);

/// Parses argv (flags override --config) and runs. Never throws.
int main(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace exlab::cli
