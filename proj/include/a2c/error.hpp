#pragma once

#include <stdexcept>
#include <string>

namespace a2c {

/// Base error. Every message is prefixed with the stage that raised it,
/// e.g. "[rejector] k must be smaller than the training set".
class Error : public std::runtime_error {
public:
    Error(std::string stage, const std::string& message)
        : std::runtime_error("[" + stage + "] " + message), stage_(std::move(stage)) {}

    const std::string& stage() const noexcept { return stage_; }

private:
    std::string stage_;
};

/// Bad command line, unknown format tag or similar caller mistakes (exit 2).
class UsageError : public Error {
public:
    using Error::Error;
};

/// A structural invariant of a domain object does not hold.
class InvariantError : public Error {
public:
    using Error::Error;
};

/// Model file failed its checksum or is truncated.
class CorruptionError : public Error {
public:
    using Error::Error;
};

/// Model file carries a magic or kind tag this build does not understand.
class VersionError : public Error {
public:
    using Error::Error;
};

/// Chat backend could not be reached. Sessions may be retried.
class TransportError : public Error {
public:
    using Error::Error;
    bool retryable() const noexcept { return true; }
};

}  // namespace a2c
