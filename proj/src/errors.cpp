#include "cavity/errors.hpp"

namespace cavity {

const char* to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::InvalidArgument: return "InvalidArgument";
        case ErrorKind::CutoffTooSmall: return "CutoffTooSmall";
        case ErrorKind::NotAState: return "NotAState";
        case ErrorKind::PositivityLost: return "PositivityLost";
        case ErrorKind::SeriesNotConverged: return "SeriesNotConverged";
        case ErrorKind::QutritRegime: return "QutritRegime";
        case ErrorKind::DegenerateCat: return "DegenerateCat";
        case ErrorKind::DegenerateBranch: return "DegenerateBranch";
        case ErrorKind::OutOfRange: return "OutOfRange";
    }
    return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& what)
    : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

}  // namespace cavity
