#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace spinbath {

/// Argument outside the mathematical or physical domain of an operation.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Unknown name in a registry or table lookup.
class LookupError : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed text input. Carries the 1-based row (line) and column when known;
/// zero means "not applicable".
class ParseError : public std::runtime_error {
public:
    enum class Kind { MissingFile, BadHeader, MalformedRow, InvalidValue, BadSyntax };

    ParseError(Kind kind, std::string const& what, std::size_t row = 0, std::size_t column = 0)
        : std::runtime_error(format(what, row, column)), kind_(kind), row_(row), column_(column) {}

    [[nodiscard]] Kind kind() const noexcept { return kind_; }
    [[nodiscard]] std::size_t row() const noexcept { return row_; }
    [[nodiscard]] std::size_t column() const noexcept { return column_; }

private:
    static std::string format(std::string const& what, std::size_t row, std::size_t column) {
        std::string out;
        if (row > 0) {
            out += "line " + std::to_string(row);
            if (column > 0) out += ", column " + std::to_string(column);
            out += ": ";
        }
        return out + what;
    }

    Kind kind_;
    std::size_t row_;
    std::size_t column_;
};

}  // namespace spinbath
