#pragma once

#include "circsync/common.hpp"

#include <json.hpp>

#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace circsync::cli {

/// Process exit codes.
enum ExitCode : int {
    kOk = 0,
    kRuntimeError = 1,
    kConfigError = 2,
    kPreconditionError = 3,
    kTimeout = 4,
};

/// Malformed or out-of-range configuration value; `field` names the key.
class ConfigError : public ArgumentError {
public:
    ConfigError(std::string field, const std::string& what)
        : ArgumentError(field.empty() ? what : field + ": " + what), field_(std::move(field)) {}
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

struct Diagnostic {
    enum class Severity { Error, Warning };
    Severity severity;
    std::string field;
    std::string message;
};

const std::vector<std::string>& commands();

/// Every key the command accepts, with its default value (null = unset).
nlohmann::json default_config(const std::string& command);

/// Defaults ← config file (or the `config` of a run manifest) ← key=value
/// overrides ← --seed/--out. Values in overrides are parsed as JSON when
/// possible and kept as strings otherwise. `N` is accepted for `n`. For
/// `scenario`, a bare first argument selects the kind and scenario parameters
/// are routed into `params`; for `validate` it names the command to check.
nlohmann::json resolve_config(const std::string& command, const nlohmann::json& file_config,
                              const std::vector<std::string>& args, const std::optional<std::string>& seed,
                              const std::optional<std::string>& out);

/// Non-mutating check of a resolved config.
std::vector<Diagnostic> validate(const std::string& command, const nlohmann::json& config);

/// Executes a resolved config, writing outputs atomically under config["out"].
/// Returns an ExitCode; progress goes to `log` unless quiet.
int run(const std::string& command, const nlohmann::json& config, std::ostream& log, bool quiet);

/// Full command-line entry point.
int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace circsync::cli
