#pragma once

#include <stdexcept>
#include <string>

namespace polydg {

/// Base class for all library errors.
class Error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// Invalid input: malformed data, violated preconditions, bad configuration.
class ValidationError : public Error
{
public:
    using Error::Error;
};

/// Parse failure in a text input. Carries the 1-based line (and column when known).
class ParseError : public ValidationError
{
public:
    ParseError(const std::string& what, std::size_t line, std::size_t column = 0)
        : ValidationError(format(what, line, column)), line_(line), column_(column)
    {}

    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }

    /// Same location, message prefixed with the source name.
    ParseError in_source(const std::string& source) const
    {
        ParseError e(*this);
        static_cast<std::runtime_error&>(e) = std::runtime_error(source + ": " + what());
        return e;
    }

private:
    static std::string format(const std::string& what, std::size_t line, std::size_t column)
    {
        std::string s = "line " + std::to_string(line);
        if (column > 0)
            s += ", column " + std::to_string(column);
        return s + ": " + what;
    }

    std::size_t line_;
    std::size_t column_;
};

/// Numerical failure: singular operators, failed factorizations, non-finite results.
class NumericalError : public Error
{
public:
    using Error::Error;
};

} // namespace polydg
