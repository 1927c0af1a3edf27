// Copyright (c) 2026, T2J harness contributors
// SPDX-License-Identifier: Apache-2.0
//
// Error hierarchy shared by every module. The CLI maps each class onto the
// process exit-code contract via exit_code_for().

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace t2j {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input syntax. `byte_offset` points at the first offending byte.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t byte_offset)
        : Error(what), byte_offset_(byte_offset) {}
    std::size_t byte_offset() const noexcept { return byte_offset_; }

private:
    std::size_t byte_offset_;
};

class ValidationError : public Error { using Error::Error; };
class NotFoundError : public Error { using Error::Error; };
class ArgumentError : public Error { using Error::Error; };
class DomainError : public Error { using Error::Error; };
class ConfigError : public Error { using Error::Error; };

// Runtime failures (exit code 2).
class TransportError : public Error { using Error::Error; };
class ProviderError : public Error { using Error::Error; };
class MetricError : public Error { using Error::Error; };
class IoError : public Error { using Error::Error; };

/// 0 success, 1 validation/config error, 2 runtime/transport error.
inline int exit_code_for(const std::exception& e) noexcept {
    if (dynamic_cast<const ParseError*>(&e) || dynamic_cast<const ValidationError*>(&e) ||
        dynamic_cast<const NotFoundError*>(&e) || dynamic_cast<const ArgumentError*>(&e) ||
        dynamic_cast<const DomainError*>(&e) || dynamic_cast<const ConfigError*>(&e)) {
        return 1;
    }
    return 2;
}

}  // namespace t2j
