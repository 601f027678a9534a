#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace ovm::gateway {

inline constexpr int exit_ok = 0;
inline constexpr int exit_diagnostics = 1;
inline constexpr int exit_usage = 2;

/// `args` excludes the program name. Machine output goes to `out`, human
/// diagnostics to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ovm::gateway
