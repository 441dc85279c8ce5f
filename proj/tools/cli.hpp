#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace reclink::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitExternal = 3;

/// Runs one `reclink` invocation. Machine output goes to `out`, progress and
/// errors to `err`.
int RunCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace reclink::cli
