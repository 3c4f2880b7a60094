#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace dyntok {

/// Error with a short machine-readable kind ("format", "length", "dtype",
/// "validation", "io", "meta-missing", "degenerate-input", ...) used by the
/// CLI to emit structured failures.
class Error : public std::runtime_error {
  public:
    Error(std::string kind, const std::string& message)
      : std::runtime_error(message)
      , kind_{std::move(kind)} {}

    const std::string& kind() const noexcept { return kind_; }

  private:
    std::string kind_;
};

[[noreturn]] inline void fail(std::string kind, const std::string& message) {
    throw Error{std::move(kind), message};
}

}  // namespace dyntok
