#pragma once

#include "liencycle/model.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace liencycle::cli {

enum ExitCode : int {
    kOk = 0,
    kHypothesesFail = 1,
    kConfigError = 2,
    kNumericError = 3,
    kInvariantViolation = 4,
};

/// Runs the command line `args` (without the program name).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// "glo:a,b,c", "filippov:a,b,c", "rychkov:a,b", "pls:a1,a2,a3" or "hamiltonian-test".
SystemSpec parse_system(const std::string& text);

/// Parses a system config document (JSON text). Unknown keys raise ConfigError.
SystemSpec parse_config(const std::string& json_text);

/// Canonical JSON rendering of a spec, used for cache keys.
std::string canonical_spec(const SystemSpec& spec);

std::uint64_t fnv1a(std::string_view data);

}  // namespace liencycle::cli
