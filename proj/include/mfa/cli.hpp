#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mfa::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitDomain = 3;
inline constexpr int kExitConvergence = 4;

/// Runs `mfa <command> [flags]`; args exclude the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mfa::cli
