#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace cosmoforge::cli {

inline constexpr const char* kVersion = "1.0.0";
inline constexpr const char* kWorkersEnv = "COSMOFORGE_WORKERS";

// Runs one subcommand. `args` excludes the program name. Returns 0 on
// success, 1 on a domain error and 2 on a usage error; errors are reported as
// one JSON line on `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Flat "key = value" config file; '#' starts a comment. Throws InvalidFlag on
// lines without '='.
std::vector<std::pair<std::string, std::string>> parse_config(const std::string& text);

}  // namespace cosmoforge::cli
