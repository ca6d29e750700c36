#pragma once

#include <stdexcept>
#include <string>

namespace misfit {

/// Malformed caller input: out-of-range parameters, unknown atoms, non-finite ranges.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A geometric construction failed under the current tolerances (cosphericity band,
/// ambiguous containment, irreducible cell). The message carries the offending ids.
class GeometryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Mathematical precondition violated (det F <= 0, construction does not close, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Internal consistency failure; indicates a bug rather than bad input.
class InternalError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace misfit
