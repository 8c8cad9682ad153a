#pragma once

#include <stdexcept>
#include <string>

namespace semistab {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// An argument lies outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  explicit DomainError(const std::string& msg) : Error("domain error: " + msg) {}
};

class ShapeError : public Error {
 public:
  explicit ShapeError(const std::string& msg) : Error("shape error: " + msg) {}
};

class InsufficientDataError : public Error {
 public:
  explicit InsufficientDataError(const std::string& msg)
      : Error("insufficient data: " + msg) {}
};

/// A resolvent was requested too close to the spectrum.
class NearSingularityError : public Error {
 public:
  NearSingularityError(const std::string& msg, double distance)
      : Error("near singularity: " + msg + " (dist to spectrum ~ " +
              std::to_string(distance) + ")"),
        distance_(distance) {}
  double distance() const noexcept { return distance_; }

 private:
  double distance_;
};

class ContourError : public Error {
 public:
  explicit ContourError(const std::string& msg) : Error("contour error: " + msg) {}
};

/// The sampling window is too short for the orbit or kernel to have decayed.
class WindowError : public Error {
 public:
  explicit WindowError(const std::string& msg) : Error("window error: " + msg) {}
};

/// A multiplier symbol cannot be evaluated at some grid frequency.
class SingularityError : public Error {
 public:
  SingularityError(const std::string& msg, double xi)
      : Error("singular symbol at xi = " + std::to_string(xi) + ": " + msg), xi_(xi) {}
  double xi() const noexcept { return xi_; }

 private:
  double xi_;
};

class UnsupportedError : public Error {
 public:
  explicit UnsupportedError(const std::string& msg) : Error("unsupported: " + msg) {}
};

/// Invalid configuration; `field()` names the offending JSON path.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& msg)
      : Error("config error at '" + field + "': " + msg), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace semistab
