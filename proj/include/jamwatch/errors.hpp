#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace jamwatch {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class NyquistViolation : public Error {
public:
  using Error::Error;
};

class BufferMismatch : public Error {
public:
  using Error::Error;
};

class EmptyInput : public Error {
public:
  using Error::Error;
};

class InvalidArgument : public Error {
public:
  using Error::Error;
};

class DegenerateBlock : public Error {
public:
  using Error::Error;
};

/// Raised when the normalized power lies outside (1, M) and C/N0 cannot be inverted.
class EstimatorRangeError : public Error {
public:
  enum class Reason { BelowNoise, Saturated };

  EstimatorRangeError(Reason reason, double mu_na)
      : Error(reason == Reason::BelowNoise
                  ? "normalized power " + std::to_string(mu_na) + " <= 1: unresolvable, below noise"
                  : "normalized power " + std::to_string(mu_na) + " >= M: saturated"),
        reason_(reason) {}

  Reason reason() const noexcept { return reason_; }

private:
  Reason reason_;
};

class InsufficientCalibration : public Error {
public:
  using Error::Error;
};

class MissingObservable : public Error {
public:
  using Error::Error;
};

class NoSatellites : public Error {
public:
  using Error::Error;
};

class UnsortedFlags : public Error {
public:
  using Error::Error;
};

class TruthMismatch : public Error {
public:
  using Error::Error;
};

class IoFailure : public Error {
public:
  using Error::Error;
};

/// Malformed text record; `line` is 1-based.
class ParseError : public Error {
public:
  ParseError(std::size_t line, const std::string& reason)
      : Error("line " + std::to_string(line) + ": " + reason), line_(line), reason_(reason) {}

  std::size_t line() const noexcept { return line_; }
  const std::string& reason() const noexcept { return reason_; }

private:
  std::size_t line_;
  std::string reason_;
};

class FrameError : public Error {
public:
  enum class Kind { BadSync, BadCrc, BadLength, UnknownBlockId };

  FrameError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}

  Kind kind() const noexcept { return kind_; }

private:
  Kind kind_;
};

class ConfigError : public Error {
public:
  ConfigError(std::string path, std::string key, const std::string& reason)
      : Error(path + ": " + key + ": " + reason), path_(std::move(path)), key_(std::move(key)) {}

  const std::string& path() const noexcept { return path_; }
  const std::string& key() const noexcept { return key_; }

private:
  std::string path_;
  std::string key_;
};

} // namespace jamwatch
