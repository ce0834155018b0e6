#pragma once

#include <stdexcept>
#include <string>

namespace pennysort {

enum class ErrorKind {
    usage,       // bad flags, bad configuration, non-positive prices
    format,      // malformed or oversize records
    io,          // open/read/write failures
    infeasible,  // memory budget too small for a two-pass sort
    invalid,     // benchmark result failed validation or budget
};

class Error : public std::runtime_error
{
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

inline Error usage_error(const std::string& what) { return {ErrorKind::usage, what}; }
inline Error format_error(const std::string& what) { return {ErrorKind::format, what}; }
inline Error io_error(const std::string& what) { return {ErrorKind::io, what}; }

// Exit codes of the command-line tool.
inline int exit_code(ErrorKind kind) noexcept
{
    switch (kind) {
    case ErrorKind::usage:
    case ErrorKind::infeasible:
        return 1;
    case ErrorKind::format:
        return 2;
    case ErrorKind::io:
        return 3;
    case ErrorKind::invalid:
        return 4;
    }
    return 1;
}

} // namespace pennysort
