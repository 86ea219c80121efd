#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dualstop/budget.hpp"
#include "dualstop/errors.hpp"
#include "dualstop/problem.hpp"

namespace dualstop {

/// Bad command line or config file. Exit code 2.
class ConfigError : public DomainError {
public:
    using DomainError::DomainError;
};

enum ExitCode : int { kExitOk = 0, kExitConfig = 2, kExitInvariant = 3, kExitBudget = 4 };

/// Strict runs predicted above this many simulator calls need --allow-expensive.
inline constexpr double kExpensiveCalls = 1e8;

struct RunConfig {
    std::string command;  ///< price | verify | policy | converge
    std::optional<std::string> problem;
    std::optional<std::string> tree;
    Framework framework = Framework::Minimize;
    std::string mode = "practical";  ///< strict | practical | exact (trees only)
    double eps = 0.1;
    double delta = 0.1;
    std::optional<int> levels;
    std::optional<double> eta;
    std::optional<double> trunc_U;
    std::optional<std::uint64_t> seed;
    int workers = 1;
    std::optional<std::string> out;
    std::optional<std::string> table;
    std::int64_t episodes = 1000;
    std::optional<double> max_calls;
    bool allow_expensive = false;
    std::vector<std::int64_t> outer;
    std::vector<int> inner{16};
    std::int64_t moment_samples = 10000;
    int grid = 2000;
    int random_trees = 0;
    bool traces = false;
};

/// Config keys accepted in files and on the command line (flag --key, with
/// '_' spelled '-').
const std::vector<std::string>& config_keys();

/// Builds and validates a config from a flat JSON object. `origin(key)` names
/// where a key came from, for error messages.
RunConfig config_from_json(const nlohmann::json& j,
                           const std::function<std::string(const std::string&)>& origin = nullptr);

/// Reads a JSON config file; errors carry the file name and line.
nlohmann::json read_config_file(const std::string& path, std::function<std::string(const std::string&)>* origin = nullptr);

/// Runs one command, writing the record to `out` (or to config.out) and
/// progress/preview lines to `log`. Returns the exit code; exceptions from the
/// library propagate.
int run_command(const RunConfig& config, std::ostream& out, std::ostream& log);

/// Full front end: parses argv, runs, maps exceptions to exit codes.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& log);

}  // namespace dualstop
