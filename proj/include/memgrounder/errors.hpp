// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace mg
{

class InvalidArgument: public std::invalid_argument
{
  public:
    using std::invalid_argument::invalid_argument;
};

class EmptyInput: public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

/// Raised for malformed scene, episode and config documents. The message
/// starts with the JSON path of the offending field.
class LoadError: public std::runtime_error
{
  public:
    LoadError(std::string path, const std::string& what):
        std::runtime_error(path + ": " + what), _path(std::move(path))
    {
    }

    [[nodiscard]] auto path() const -> const std::string& { return _path; }

  private:
    std::string _path;
};

class InvalidFixture: public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

class BackendError: public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

/// Transport-level failure after the configured retries were spent.
class BackendUnavailable: public BackendError
{
  public:
    using BackendError::BackendError;
};

/// The service answered, but the reply does not fit the wire schema.
class ProtocolError: public BackendError
{
  public:
    using BackendError::BackendError;
};

} // namespace mg
