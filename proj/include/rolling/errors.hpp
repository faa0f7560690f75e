#ifndef ROLLING_ERRORS_HPP
#define ROLLING_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rolling {

// Violated precondition or malformed input detected inside the library.
// These indicate caller bugs or bad definition files, not statistical events.
class ContractViolation : public std::logic_error {
public:
  explicit ContractViolation(const std::string& what) : std::logic_error(what) {}
};

// Malformed or inconsistent experiment configuration (CLI exit code 2).
class ConfigError : public std::runtime_error {
public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// A trajectory left the representable region: some coordinate norm crossed
// the blowup threshold. Carries the first offending step so studies can
// report where paths die instead of silently propagating inf/nan.
class BlowupError : public std::runtime_error {
public:
  BlowupError(std::size_t step, double norm)
      : std::runtime_error("trajectory blowup at step " + std::to_string(step) +
                           " (coordinate norm " + std::to_string(norm) + ")"),
        step_(step),
        norm_(norm) {}

  std::size_t step() const { return step_; }
  double norm() const { return norm_; }

private:
  std::size_t step_;
  double norm_;
};

}  // namespace rolling

#endif
