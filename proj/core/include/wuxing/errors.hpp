#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace wuxing {

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Non-finite value handed to a derivative or parameter check.
class NumericDomainError : public Error {
public:
  using Error::Error;
};

// Integration produced a non-finite state. Carries the offending neuron
// (or npos for single-neuron integration outside a network).
class DivergenceError : public Error {
public:
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  DivergenceError(std::size_t neuron, double time)
      : Error(describe(neuron, time)), neuron_(neuron), time_(time) {}

  std::size_t neuron() const noexcept { return neuron_; }
  double time() const noexcept { return time_; }

private:
  static std::string describe(std::size_t neuron, double time) {
    std::string msg = "integration diverged";
    if (neuron != npos) msg += " at neuron " + std::to_string(neuron);
    msg += " (t=" + std::to_string(time) + ")";
    return msg;
  }

  std::size_t neuron_;
  double time_;
};

class SingularParameterError : public Error {
public:
  using Error::Error;
};

class FixedPointDivergenceError : public Error {
public:
  using Error::Error;
};

class TopologyError : public Error {
public:
  using Error::Error;
};

// Malformed IDX container; offset is the byte position where parsing failed.
class FormatError : public Error {
public:
  FormatError(const std::string& what, std::size_t offset)
      : Error(what + " (byte offset " + std::to_string(offset) + ")"), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

private:
  std::size_t offset_;
};

class DomainError : public Error {
public:
  using Error::Error;
};

class ConfigError : public Error {
public:
  using Error::Error;
};

}  // namespace wuxing
