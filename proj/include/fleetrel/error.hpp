#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fleetrel {

/// Broad category of a failure; the C API maps each kind to a status code.
enum class ErrorKind
{
    invalid_argument, ///< caller violated a precondition
    parse,            ///< malformed input text
    data,             ///< well-formed input that cannot be analyzed
    numeric,          ///< iteration failed to converge or matrix was singular
    io,               ///< file could not be read or written
};

class Error : public std::runtime_error
{
  public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

  private:
    ErrorKind kind_;
};

/**
 * Raised while reading line-oriented input. Carries the 1-based line number and
 * the offending field (empty when the line itself is not valid JSON).
 */
class ParseError : public Error
{
  public:
    ParseError(std::size_t line, std::string field, const std::string& detail)
        : Error(ErrorKind::parse, format(line, field, detail)), line_(line), field_(std::move(field)), detail_(detail)
    {
    }

    std::size_t line() const noexcept { return line_; }
    const std::string& field() const noexcept { return field_; }
    const std::string& detail() const noexcept { return detail_; }

  private:
    static std::string format(std::size_t line, const std::string& field, const std::string& detail)
    {
        std::string msg = "line " + std::to_string(line);
        if (!field.empty())
            msg += ", field '" + field + "'";
        return msg + ": " + detail;
    }

    std::size_t line_;
    std::string field_;
    std::string detail_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool cond, const std::string& what)
{
    if (!cond)
        throw Error(ErrorKind::invalid_argument, what);
}

} // namespace fleetrel
