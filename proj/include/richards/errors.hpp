#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace richards {

/// Base class of everything this library throws.
class Error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

class DomainError : public Error
{
public:
  using Error::Error;
};

/// Saturation at or below the residual value: capillary pressure is unbounded.
class DegenerateSaturation : public DomainError
{
public:
  using DomainError::DomainError;
};

/// Generalized pressure at or below the minimal (Kirchhoff) pressure.
class BelowMinimalPressure : public DomainError
{
public:
  using DomainError::DomainError;
};

class GeometryError : public Error
{
public:
  using Error::Error;
};

class DimensionError : public Error
{
public:
  using Error::Error;
};

class NotCoercive : public Error
{
public:
  using Error::Error;
};

class ParseError : public Error
{
public:
  using Error::Error;
};

/// Configuration value violates an invariant; `field()` names the offending key.
class ValidationError : public Error
{
public:
  explicit ValidationError(std::string field, const std::string& what = {})
    : Error(what.empty() ? field : field + ": " + what), field_(std::move(field))
  {
  }

  const std::string& field() const noexcept { return field_; }

private:
  std::string field_;
};

class IoError : public Error
{
public:
  using Error::Error;
};

} // namespace richards
