#pragma once

#include <stdexcept>
#include <string>

namespace dtrl {

// Process exit codes used by the CLI; library errors carry the code they map to.
enum class ExitCode : int {
    ok = 0,
    usage = 2,
    io = 3,
    format = 4,
    domain = 5,
    verification = 6,
    internal = 7,
};

class Error : public std::runtime_error {
public:
    Error(ExitCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
    ExitCode code() const { return code_; }

private:
    ExitCode code_;
};

// File missing / unreadable / unwritable.
class IoError : public Error {
public:
    explicit IoError(const std::string& what) : Error(ExitCode::io, what) {}
};

// Malformed file content (CSV cells, tree files, ...).
class FormatError : public Error {
public:
    explicit FormatError(const std::string& what) : Error(ExitCode::format, what) {}
};

// Invalid parameters or operations outside a contract (masked action, off-grid threshold, ...).
class DomainError : public Error {
public:
    explicit DomainError(const std::string& what) : Error(ExitCode::domain, what) {}
};

// A property check failed.
class VerificationError : public Error {
public:
    explicit VerificationError(const std::string& what) : Error(ExitCode::verification, what) {}
};

// "Cannot happen" conditions: solver non-convergence on a finite model and the like.
class InternalError : public Error {
public:
    explicit InternalError(const std::string& what) : Error(ExitCode::internal, what) {}
};

} // namespace dtrl
