#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace normweaver {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Text could not be parsed. `line` and `column` are 1-based; 0 means unknown.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line, std::size_t column)
        : Error(format(what, line, column)), line_(line), column_(column) {}

    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }

private:
    static std::string format(const std::string& what, std::size_t line, std::size_t column) {
        std::string out;
        if (line > 0) {
            out += "line " + std::to_string(line);
            if (column > 0) out += ", column " + std::to_string(column);
            out += ": ";
        } else if (column > 0) {
            out += "position " + std::to_string(column) + ": ";
        }
        return out + what;
    }

    std::size_t line_;
    std::size_t column_;
};

class UnknownCharacterError : public ParseError {
public:
    using ParseError::ParseError;
};

/// Grounding referenced a sort with no entities, or an unknown sort.
class GroundingError : public Error {
public:
    using Error::Error;
};

/// Formula lies outside the fragment handled by the built-in translator.
class UnsupportedFragment : public Error {
public:
    UnsupportedFragment(const std::string& subformula, const std::string& reason)
        : Error("unsupported fragment: " + subformula + " (" + reason + ")"), subformula_(subformula) {}

    const std::string& subformula() const noexcept { return subformula_; }

private:
    std::string subformula_;
};

class NonDeterministic : public Error {
public:
    using Error::Error;
};

class UnsupportedAcceptance : public Error {
public:
    using Error::Error;
};

/// An automaton mentions a proposition the model does not know.
class AtomMismatch : public Error {
public:
    using Error::Error;
};

/// A model violates a structural requirement (stochasticity, availability, ids).
class ModelError : public Error {
public:
    using Error::Error;
};

class SizeGuardExceeded : public Error {
public:
    using Error::Error;
};

class NoAmecFound : public Error {
public:
    using Error::Error;
};

/// The executor observed a transition with zero probability under the executed action.
class ImpossibleObservation : public Error {
public:
    using Error::Error;
};

/// A plan artifact does not belong to the model and norms it is used with.
class PlanMismatch : public Error {
public:
    using Error::Error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

} // namespace normweaver
