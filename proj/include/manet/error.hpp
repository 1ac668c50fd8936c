#pragma once

#include <stdexcept>
#include <string>

namespace manet {

class Error : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

/// A caller broke a documented precondition (e.g. asked is_duplicate about a RREP).
class ContractViolation : public Error
{
  public:
    using Error::Error;
};

class NotRelayable : public Error
{
  public:
    using Error::Error;
};

class InvalidDestination : public Error
{
  public:
    using Error::Error;
};

class InvariantViolation : public Error
{
  public:
    using Error::Error;
};

class ConfigError : public Error
{
  public:
    using Error::Error;
};

class ValidationError : public Error
{
  public:
    using Error::Error;
};

class UnknownScenario : public Error
{
  public:
    using Error::Error;
};

class EmptyComparison : public Error
{
  public:
    using Error::Error;
};

/// Schema-level problem in a scenario document or CSV file. `path` is a
/// JSON-pointer-like location ("$.links[3].delay") or "file:line".
class ParseError : public Error
{
  public:
    ParseError(std::string path, const std::string& what)
      : Error(path + ": " + what),
        path_(std::move(path))
    {
    }

    const std::string& path() const noexcept { return path_; }

  private:
    std::string path_;
};

} // namespace manet
