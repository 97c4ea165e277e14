#ifndef WSKM_ERROR_HPP
#define WSKM_ERROR_HPP

#include <stdexcept>
#include <string>

namespace wskm {

/// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent arguments (shape mismatches, negative masses, ...).
struct InvalidArgument : Error {
    using Error::Error;
};

/// Constraint system has no solution (empty mask rows, impossible budgets, ...).
struct FeasibilityError : Error {
    using Error::Error;
};

enum class IoCode {
    open_failed,
    bad_magic,
    truncated,
    non_finite,
    bad_format,
};

inline const char* io_code_name(IoCode c) {
    switch (c) {
        case IoCode::open_failed: return "open_failed";
        case IoCode::bad_magic: return "bad_magic";
        case IoCode::truncated: return "truncated";
        case IoCode::non_finite: return "non_finite";
        case IoCode::bad_format: return "bad_format";
    }
    return "unknown";
}

/// File I/O failure; `code()` distinguishes the failure class.
class IoError : public Error {
public:
    IoError(IoCode code, const std::string& msg)
        : Error(std::string(io_code_name(code)) + ": " + msg), code_(code) {}

    IoCode code() const { return code_; }

private:
    IoCode code_;
};

}  // namespace wskm

#endif  // WSKM_ERROR_HPP
