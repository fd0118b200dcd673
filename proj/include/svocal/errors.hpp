#pragma once

#include <stdexcept>
#include <string>

namespace svocal {

// Base for all errors raised by this library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Raised when a book cannot be ingested (empty text, unreadable file, ...).
class IngestionError : public Error {
public:
    using Error::Error;
};

// Schema violations while loading gold records or other data files.
class LoadError : public Error {
public:
    using Error::Error;
};

// Transport or protocol failure talking to an embedding/chat service.
class BackendError : public Error {
public:
    using Error::Error;
};

// Request exceeded the configured timeout (kept distinct from other
// transport failures so callers can report it separately).
class TimeoutError : public BackendError {
public:
    using BackendError::BackendError;
};

// Retrieval failed for one attribute; carries the attribute name.
class RetrievalError : public Error {
public:
    RetrievalError(const std::string& attribute, const std::string& what)
        : Error("retrieval failed for attribute '" + attribute + "': " + what),
          attribute_(attribute) {}
    const std::string& attribute() const { return attribute_; }

private:
    std::string attribute_;
};

// Inference failed for one character.
class InferenceError : public Error {
public:
    InferenceError(const std::string& character_id, const std::string& what)
        : Error("inference failed for character '" + character_id + "': " + what),
          character_id_(character_id) {}
    const std::string& character_id() const { return character_id_; }

private:
    std::string character_id_;
};

// Invalid arguments to a library operation (precondition violations).
class ContractError : public Error {
public:
    using Error::Error;
};

// Structurally valid JSON that cannot be coerced into a prediction.
class ParseError : public Error {
public:
    using Error::Error;
};

}  // namespace svocal
