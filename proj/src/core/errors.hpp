#pragma once

#include <stdexcept>
#include <string>

namespace hsd {

// Error taxonomy shared by every module. The split matters at the process
// boundary: validation errors map to exit code 2, backend trouble
// (transport or missing capability) maps to exit code 3.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad input: malformed files, violated preconditions, domain violations.
class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& msg) : Error(msg) {}
};

// A backend (translator, embedder, trainer) could not be reached or failed
// mid-call. Distinct from ValidationError so callers can retry or abort.
class TransportError : public Error {
public:
    explicit TransportError(const std::string& msg) : Error(msg) {}
};

// The selected backend does not support a requested feature (e.g. a head
// architecture it cannot realize).
class CapabilityError : public Error {
public:
    explicit CapabilityError(const std::string& msg) : Error(msg) {}
};

// A single augmentation candidate failed (e.g. empty backtranslation).
// The augmentation run drops the record and continues.
class AugmentationFailure : public Error {
public:
    explicit AugmentationFailure(const std::string& msg) : Error(msg) {}
};

}  // namespace hsd
