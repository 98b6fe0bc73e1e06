#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace dcsynth::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kRuntimeError = 1;
inline constexpr int kUsageError = 2;

// Subcommands: design, simulate, optimize, benchmark, weather, gen-library.
// Failures print one JSON line {"error": <kind>, "message": ...} to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace dcsynth::cli
