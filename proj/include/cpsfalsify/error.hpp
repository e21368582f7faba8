#pragma once

#include <stdexcept>
#include <string>

namespace cpsf {

/// Raised for contract violations: bad inputs, malformed documents, unknown ids.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string &what) : std::runtime_error(what) {}
};

} // namespace cpsf
