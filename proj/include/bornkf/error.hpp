#ifndef BORNKF_ERROR_HPP
#define BORNKF_ERROR_HPP

#include <stdexcept>
#include <string>

namespace bornkf {

enum class ErrorCode {
    NotHermitian,
    NotPositiveDefinite,
    SvdFailure,
    DimensionMismatch,
    InvalidWavenumber,
    InvalidAlpha,
    InvalidArgument,
    NonFinite,
};

inline const char* to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::NotHermitian: return "NotHermitian";
        case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
        case ErrorCode::SvdFailure: return "SvdFailure";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::InvalidWavenumber: return "InvalidWavenumber";
        case ErrorCode::InvalidAlpha: return "InvalidAlpha";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::NonFinite: return "NonFinite";
    }
    return "Unknown";
}

/// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

} // namespace bornkf

#endif // BORNKF_ERROR_HPP
