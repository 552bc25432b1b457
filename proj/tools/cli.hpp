#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace tvp::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitData = 1;
inline constexpr int kExitEstimation = 2;
inline constexpr int kExitUsage = 64;

/// args excludes the program name. Results go to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace tvp::cli
