#pragma once

#include <stdexcept>
#include <string>

namespace numpar {

// Base class for every error the library throws. `kind` is a stable
// machine-readable tag used for the CLI's JSON error output and exit codes.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& message)
        : std::runtime_error(message), kind_(std::move(kind)) {}
    const std::string& kind() const { return kind_; }

private:
    std::string kind_;
};

// --- I/O ---

class IoError : public Error {
public:
    explicit IoError(const std::string& message) : Error("IoError", message) {}
};

// --- corpus / validation ---

class ParseError : public Error {
public:
    ParseError(const std::string& message, int line = 0)
        : Error("ParseError", message), line_(line) {}
    ParseError(std::string kind, const std::string& message, int line)
        : Error(std::move(kind), message), line_(line) {}
    int line() const { return line_; }

private:
    int line_;
};

class MalformedGloss : public ParseError {
public:
    MalformedGloss(const std::string& token, int line = 0)
        : ParseError("MalformedGloss", "malformed gloss token '" + token + "'", line) {}
};

class SegmentationMismatch : public ParseError {
public:
    SegmentationMismatch(const std::string& detail, int line = 0)
        : ParseError("SegmentationMismatch",
                     "morph count differs from gloss count: " + detail, line) {}
};

class DuplicateDefault : public ParseError {
public:
    DuplicateDefault(const std::string& language, int cardinality, int line = 0)
        : ParseError("DuplicateDefault",
                     language + ": more than one default form for cardinality " +
                         std::to_string(cardinality),
                     line),
          language_(language), cardinality_(cardinality) {}
    const std::string& language() const { return language_; }
    int cardinality() const { return cardinality_; }

private:
    std::string language_;
    int cardinality_;
};

// Raised both by corpus validation (a language lacking a form) and by the
// complexity metric (a length table lacking a cardinality).
class MissingCardinality : public Error {
public:
    MissingCardinality(const std::string& context, int cardinality)
        : Error("MissingCardinality",
                context + ": no default form for cardinality " + std::to_string(cardinality)),
          context_(context), cardinality_(cardinality) {}
    const std::string& context() const { return context_; }
    int cardinality() const { return cardinality_; }

private:
    std::string context_;
    int cardinality_;
};

// --- metrics ---

class NoNumeralContent : public Error {
public:
    explicit NoNumeralContent(int cardinality)
        : Error("NoNumeralContent",
                "form for cardinality " + std::to_string(cardinality) +
                    " has no Numeral token after dropping Other tokens") {}
};

// --- synthesis ---

class Inexpressible : public Error {
public:
    explicit Inexpressible(int value)
        : Error("Inexpressible",
                "no derivation for " + std::to_string(value) + " in this system"),
          value_(value) {}
    int value() const { return value_; }

private:
    int value_;
};

class EmptyInput : public Error {
public:
    explicit EmptyInput(const std::string& message) : Error("EmptyInput", message) {}
};

// --- inference ---

class NonPositiveComplexity : public Error {
public:
    explicit NonPositiveComplexity(double value)
        : Error("NonPositiveComplexity",
                "complexity must be positive, got " + std::to_string(value)) {}
};

class InsufficientData : public Error {
public:
    InsufficientData(std::size_t n, std::size_t needed)
        : Error("InsufficientData", "need at least " + std::to_string(needed) +
                                        " points, got " + std::to_string(n)) {}
};

class DegenerateFit : public Error {
public:
    explicit DegenerateFit(const std::string& message) : Error("DegenerateFit", message) {}
};

class FoldFailure : public Error {
public:
    FoldFailure(std::size_t fold, const std::string& message)
        : Error("FoldFailure", "leave-one-out fold " + std::to_string(fold) +
                                   " failed: " + message),
          fold_(fold) {}
    std::size_t fold() const { return fold_; }

private:
    std::size_t fold_;
};

class NonFiniteInput : public Error {
public:
    explicit NonFiniteInput(const std::string& message) : Error("NonFiniteInput", message) {}
};

// --- reporting ---

class SchemaMismatch : public Error {
public:
    explicit SchemaMismatch(const std::string& message) : Error("SchemaMismatch", message) {}
};

class InvalidArgument : public Error {
public:
    explicit InvalidArgument(const std::string& message) : Error("InvalidArgument", message) {}
};

}  // namespace numpar
