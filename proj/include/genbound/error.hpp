#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace genbound {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
   public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Operand shapes disagree (matrix product, parameter length, labels vs rows).
class DimensionError : public Error {
   public:
    DimensionError(const std::string& what, std::size_t expected, std::size_t actual)
        : Error(what + ": expected " + std::to_string(expected) + ", got " +
                std::to_string(actual)),
          expected_(expected),
          actual_(actual) {}

    std::size_t expected() const noexcept { return expected_; }
    std::size_t actual() const noexcept { return actual_; }

   private:
    std::size_t expected_;
    std::size_t actual_;
};

/// A numeric argument is outside the domain of the formula.
class DomainError : public Error {
   public:
    explicit DomainError(const std::string& msg) : Error(msg) {}
};

/// A forward cache was used with a model or batch it was not produced from.
class StaleCacheError : public Error {
   public:
    explicit StaleCacheError(const std::string& msg) : Error(msg) {}
};

class IdxError : public Error {
   public:
    enum class Kind { open_failed, wrong_magic, truncated, dimension_mismatch, bad_label };

    IdxError(Kind kind, const std::string& msg) : Error(msg), kind_(kind) {}
    Kind kind() const noexcept { return kind_; }

   private:
    Kind kind_;
};

/// Invalid experiment configuration (unknown key, bad value, missing field).
class ConfigError : public Error {
   public:
    explicit ConfigError(const std::string& msg) : Error(msg) {}
};

/// Requested CSV column does not exist.
class MissingColumnError : public Error {
   public:
    explicit MissingColumnError(const std::string& column)
        : Error("missing column: " + column), column_(column) {}
    const std::string& column() const noexcept { return column_; }

   private:
    std::string column_;
};

}  // namespace genbound
