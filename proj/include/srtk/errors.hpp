#pragma once

#include <stdexcept>
#include <string>

namespace srtk {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed record file content (bad JSON, wrong field types, broken invariants).
class FormatError : public Error {
public:
    using Error::Error;
};

/// Invalid configuration or flag combination. Maps to exit code 2 in the CLI.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Endpoint unreachable, timed out, or returned a server error after retries.
class TransportError : public Error {
public:
    using Error::Error;
};

/// Endpoint answered but the body could not be understood.
class ProtocolError : public Error {
public:
    using Error::Error;
};

/// Endpoint rejected our credentials (HTTP 401/403).
class AuthError : public TransportError {
public:
    using TransportError::TransportError;
};

}  // namespace srtk
