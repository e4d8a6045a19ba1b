#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lacclean {

/// Base of every error raised by the library.
class Error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// A CSV/JSON row that does not match its format. `line()` is 1-based.
class MalformedRow : public Error
{
public:
  MalformedRow(std::size_t line, const std::string& what)
    : Error("line " + std::to_string(line) + ": " + what), line_(line), reason_(what)
  {
  }

  std::size_t line() const noexcept { return line_; }
  const std::string& reason() const noexcept { return reason_; }

private:
  std::size_t line_;
  std::string reason_;
};

class EmptyInput : public Error
{
public:
  using Error::Error;
};

class AntimeridianSpread : public Error
{
public:
  using Error::Error;
};

class EmptyGroup : public Error
{
public:
  using Error::Error;
};

class MismatchedInput : public Error
{
public:
  using Error::Error;
};

class RegionTooSmall : public Error
{
public:
  using Error::Error;
};

class WorldMismatch : public Error
{
public:
  using Error::Error;
};

class OrderingViolation : public Error
{
public:
  using Error::Error;
};

class InvalidArgument : public Error
{
public:
  using Error::Error;
};

} // namespace lacclean
