#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace yankflow {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Invalid configuration, shapes or file contents.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class FactorizationError : public Error {
 public:
  using Error::Error;
};

class DegenerateSimplexError : public Error {
 public:
  DegenerateSimplexError(std::size_t simplex, const std::string& what)
      : Error("simplex " + std::to_string(simplex) + ": " + what), simplex_(simplex) {}
  std::size_t simplex() const noexcept { return simplex_; }

 private:
  std::size_t simplex_;
};

// The discrete flow inverted or flattened an element at some time step.
class FlowBreakdown : public Error {
 public:
  FlowBreakdown(int step, const std::string& what)
      : Error("flow breakdown at step " + std::to_string(step) + ": " + what), step_(step) {}
  int step() const noexcept { return step_; }

 private:
  int step_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace yankflow
