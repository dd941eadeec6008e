#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace treemst {

/// A caller broke a documented precondition (dimension mismatch, non-spanning
/// input, traversal over a single component, ...).
class ContractViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Input that is well-formed but unusable, e.g. an empty dataset file.
class InvalidInput : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NotFound : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

/// Malformed dataset text. Rows and columns are 1-based; column 0 means the
/// whole row is at fault.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t row, std::size_t column = 0)
        : std::runtime_error(what), row_(row), column_(column) {}

    std::size_t row() const noexcept { return row_; }
    std::size_t column() const noexcept { return column_; }

private:
    std::size_t row_;
    std::size_t column_;
};

} // namespace treemst
