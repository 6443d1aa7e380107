// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace fpreg {

// Bad user input: malformed sets, out-of-range parameters, mismatched spaces.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// An operation was called outside its precondition by library code.
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

inline void require_input(bool ok, const std::string& what) {
  if (!ok) throw InputError(what);
}

}  // namespace fpreg
