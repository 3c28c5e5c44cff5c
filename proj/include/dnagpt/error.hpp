#pragma once

#include <stdexcept>
#include <string>

namespace dnagpt {

// Root of every error raised by the library. Callers that only care about
// "did it work" catch this; the CLI maps all of them to exit code 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// A backend was asked for something it cannot do (e.g. scoring on a
// black-box API backend).
class CapabilityError : public Error {
 public:
  using Error::Error;
};

class UnknownBackendError : public Error {
 public:
  using Error::Error;
};

// Network or HTTP failure after retries were exhausted.
class TransportError : public Error {
 public:
  TransportError(const std::string& what, std::string request_id)
      : Error(what), request_id_(std::move(request_id)) {}
  const std::string& request_id() const noexcept { return request_id_; }

 private:
  std::string request_id_;
};

class CacheMissError : public Error {
 public:
  CacheMissError(const std::string& what, std::string key)
      : Error(what), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

class CacheCorruptError : public Error {
 public:
  CacheCorruptError(const std::string& what, std::string key)
      : Error(what), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

// Raised by detection when any regeneration could not be produced. A missing
// continuation would silently change K, so the whole detection is aborted.
class PartialResultsError : public Error {
 public:
  using Error::Error;
};

}  // namespace dnagpt
