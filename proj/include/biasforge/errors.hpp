#ifndef BIASFORGE_ERRORS_HPP
#define BIASFORGE_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace biasforge {

// Malformed input file. Carries the source location so the CLI can print
// file+line diagnostics and exit with the data-error code.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::string file, int line, const std::string& what)
      : std::runtime_error(file + ":" + std::to_string(line) + ": " + what),
        file_(std::move(file)),
        line_(line) {}

  const std::string& file() const { return file_; }
  int line() const { return line_; }

 private:
  std::string file_;
  int line_;
};

// Invalid configuration (bad flag combination, inconsistent model shapes,
// empty entity list for a used slot, ...).
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Data that parses but violates a contract (unknown phoneme symbol,
// grapheme outside the vocabulary, span out of bounds, ...).
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// Non-finite value or divergence during training or decoding. Carries the
// offending step and, when thrown from the training loop, the log collected
// so far so callers can still write it out.
class TrainingFault : public std::runtime_error {
 public:
  TrainingFault(int step, const std::string& what, std::string log = {})
      : std::runtime_error("step " + std::to_string(step) + ": " + what),
        step_(step),
        log_(std::move(log)) {}

  int step() const { return step_; }
  const std::string& log() const { return log_; }

 private:
  int step_;
  std::string log_;
};

}  // namespace biasforge

#endif  // BIASFORGE_ERRORS_HPP
