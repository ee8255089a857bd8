#pragma once

#include <stdexcept>
#include <string>

namespace pairtest {

/// Error type thrown for precondition violations, malformed inputs and
/// unattainable requests. The message is the user-facing diagnostic.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

[[noreturn]] inline void fail(const std::string& message) { throw Error(message); }

}  // namespace pairtest
