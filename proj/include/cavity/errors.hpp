#pragma once

#include <stdexcept>
#include <string>

namespace cavity {

enum class ErrorKind {
    InvalidArgument,
    CutoffTooSmall,
    NotAState,
    PositivityLost,
    SeriesNotConverged,
    QutritRegime,
    DegenerateCat,
    DegenerateBranch,
    OutOfRange,
};

const char* to_string(ErrorKind kind) noexcept;

/// Error raised by every library operation; `kind()` identifies the failure class.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what);

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace cavity
