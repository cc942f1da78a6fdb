#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace visucraft {

struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Bad configuration (missing fields, unknown keys, unreadable files).
struct ConfigError : Error {
    using Error::Error;
};

// Malformed input text; byte_offset points at the failure position.
struct SyntaxError : Error {
    SyntaxError(const std::string& what, std::size_t offset)
        : Error(what + " (byte " + std::to_string(offset) + ")"), byte_offset(offset) {}
    std::size_t byte_offset;
};

// Well-formed input that violates the schema or an invariant.
struct SemanticError : Error {
    using Error::Error;
};

// An invalid document was passed where a valid one is required.
struct ValidationError : Error {
    using Error::Error;
};

// Granularity can only be reduced, never invented.
struct DowngradeError : Error {
    using Error::Error;
};

// Network / IO failure talking to a remote endpoint. Retryable.
struct TransportError : Error {
    using Error::Error;
};

// Remote reply that cannot be used (bad shape, empty completion).
struct BackendError : Error {
    using Error::Error;
};

struct CacheError : Error {
    using Error::Error;
};

struct CacheMissError : CacheError {
    explicit CacheMissError(const std::string& key)
        : CacheError("replay cache miss for key " + key), key_hash(key) {}
    std::string key_hash;
};

struct CacheConflictError : CacheError {
    using CacheError::CacheError;
};

struct ExtractError : Error {
    using Error::Error;
};

struct PipelineError : Error {
    using Error::Error;
};

}  // namespace visucraft
