#pragma once

#include <stdexcept>
#include <string>

namespace xmorph {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// File could not be read or its contents are malformed.
class LoadError : public Error {
public:
    using Error::Error;
};

/// An argument violates a documented precondition.
class PreconditionError : public Error {
public:
    using Error::Error;
};

/// Mask contains no foreground pixels.
class NoTumorError : public Error {
public:
    using Error::Error;
};

/// Largest component is too small to carry a boundary (1-2 pixels).
class DegenerateContourError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

/// Serialized payload does not match the reader's schema.
class SchemaError : public Error {
public:
    using Error::Error;
};

class LlmError : public Error {
public:
    enum class Kind { missing_key, network, timeout, http_status, bad_response };

    LlmError(Kind k, const std::string& msg) : Error(msg), kind(k) {}
    Kind kind;
};

} // namespace xmorph
