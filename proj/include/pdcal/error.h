#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace pdcal {

enum class ErrorKind {
    Domain,
    Config,
    DegenerateShape,
    Bracket,
    Calibration,
    Analysis,
    Symmetry,
};

std::string_view to_string(ErrorKind kind);

/// Single exception type for the library; `kind()` selects the failure class and
/// `key()` names the offending quantity (e.g. "PulseShape.ramp") when there is one.
class Error : public std::runtime_error {
  public:
    Error(ErrorKind kind, const std::string &message, std::string key = {})
        : std::runtime_error(message), kind_(kind), key_(std::move(key)) {}

    ErrorKind kind() const { return kind_; }
    const std::string &key() const { return key_; }

  private:
    ErrorKind kind_;
    std::string key_;
};

}  // namespace pdcal
