#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace matchforge::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;  // data or solver error
inline constexpr int kExitUsage = 2;

// `args` excludes the program name. Errors go to `err` prefixed "error: ".
int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err);

int run_cli(int argc, const char* const* argv);

}  // namespace matchforge::cli
