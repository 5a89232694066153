#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace wsauroc {

enum class ErrorKind {
    empty_input,
    missing_normal_level,
    non_contiguous_levels,
    non_finite_value,
    length_mismatch,
    non_monotone_quantities,
    invalid_argument,
    out_of_range,
    degenerate_bounds,
    parse_error,
    io_error,
};

/// Data or usage error raised by every module. The CLI maps it to exit status 2.
class Error : public std::runtime_error
{
public:
    Error(ErrorKind kind, std::string const& message, std::optional<std::size_t> where = std::nullopt)
        : std::runtime_error{message}, kind_{kind}, where_{where}
    {}

    auto kind() const noexcept -> ErrorKind { return kind_; }

    // offending severity level, record or row number when there is one
    auto where() const noexcept -> std::optional<std::size_t> { return where_; }

private:
    ErrorKind kind_;
    std::optional<std::size_t> where_;
};

} // namespace wsauroc
