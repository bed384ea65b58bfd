#pragma once

#include <stdexcept>
#include <string>

namespace ecpo {

/// Failure raised by operations whose contract has a named error code
/// (EMPTY_SPLIT, DUPLICATE_ID, BAD_RULE, ...). The code is stable and is what
/// callers and tests match on; the message is for humans.
class Error : public std::runtime_error {
public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(code + ": " + message), code_(std::move(code)), message_(message) {}

  const std::string& code() const noexcept { return code_; }
  const std::string& message() const noexcept { return message_; }

private:
  std::string code_;
  std::string message_;
};

}  // namespace ecpo
