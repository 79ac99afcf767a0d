#pragma once

#include <iosfwd>
#include <string_view>

namespace embedmap::cli {

inline constexpr std::string_view kToolName = "embedmap";
inline constexpr std::string_view kToolVersion = "0.1.0";

// Exit codes: 0 success, 1 internal error, 2 input error.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitInput = 2;

int Run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace embedmap::cli
