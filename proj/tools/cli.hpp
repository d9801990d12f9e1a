#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace enlca::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitNumeric = 2;

/// Runs one command. `args` excludes the program name. Matrices without an
/// --out path and all scalar reports go to `out`; diagnostics go to `err`.
///
/// Exit codes: 0 success, 1 usage or input-file problem, 2 numeric failure
/// (overflow, shape mismatch).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace enlca::cli
