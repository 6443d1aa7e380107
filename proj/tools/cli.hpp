// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace fpreg::cli {

inline constexpr const char* kVersion = "0.1.0";

// Exit codes: 0 completed run, 2 bad input or configuration, 3 contract violation.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;
inline constexpr int kExitContract = 3;

// Runs one invocation; args excludes the program name. Reports go to `out`
// unless --out is given, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace fpreg::cli
