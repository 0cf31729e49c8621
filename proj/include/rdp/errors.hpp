#pragma once

#include <stdexcept>
#include <string>

namespace rdp {

// Thrown when an operation is asked to work on an empty mask / empty overlap
// (e.g. evaluating metrics with zero valid pixels).
struct EmptyMaskError : std::runtime_error {
  explicit EmptyMaskError(const std::string& msg) : std::runtime_error(msg) {}
};

// Thrown when an iterative solver fails to reach its tolerance.
struct ConvergenceError : std::runtime_error {
  ConvergenceError(const std::string& msg, double residual_, int iterations_)
      : std::runtime_error(msg), residual(residual_), iterations(iterations_) {}
  double residual;
  int iterations;
};

// Thrown on malformed input files; carries the offending line when known.
struct ParseError : std::runtime_error {
  ParseError(const std::string& file, int line, const std::string& msg)
      : std::runtime_error(file + ":" + std::to_string(line) + ": " + msg),
        line_number(line) {}
  int line_number;
};

}  // namespace rdp
