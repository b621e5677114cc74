#pragma once

#include <stdexcept>
#include <string>

namespace lfd {

// Bad user input: files, manifests, argument values. Maps to CLI exit code 1.
struct InputError : std::runtime_error {
  explicit InputError(const std::string& msg) : std::runtime_error(msg) {}
};

struct IoError : InputError {
  explicit IoError(const std::string& msg) : InputError(msg) {}
};

// Internal failure: singular system, solver non-convergence. Maps to CLI exit code 2.
struct SolverError : std::runtime_error {
  explicit SolverError(const std::string& msg) : std::runtime_error(msg) {}
};

struct PipelineError : std::runtime_error {
  explicit PipelineError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace lfd
