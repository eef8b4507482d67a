// Error taxonomy shared by the whole library.  The CLI maps these to
// process exit codes: input_error -> 2, numerical_error -> 3, budget_error -> 4.
#pragma once

#include <stdexcept>
#include <string>

namespace matpress {

class error : public std::runtime_error {
 public:
  explicit error(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed or out-of-contract input (bad symbol, wrong dimension, parse
// failure, precondition violation).
class input_error : public error {
 public:
  explicit input_error(const std::string& msg) : error(msg) {}
};

// A request that is structurally valid but degenerate (e.g. normalising a
// distribution over words whose products all vanish).
class degenerate_input_error : public input_error {
 public:
  explicit degenerate_input_error(const std::string& msg) : input_error(msg) {}
};

// A computation that failed to reach its accuracy contract; carries the
// offending residual when one is available.
class numerical_error : public error {
 public:
  explicit numerical_error(const std::string& msg, double residual = 0.0)
      : error(msg), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

// A search that exhausted its configured effort without an answer.
class search_error : public numerical_error {
 public:
  explicit search_error(const std::string& msg) : numerical_error(msg) {}
};

// Work size exceeds the configured budget (word counts, lift dimensions).
class budget_error : public error {
 public:
  explicit budget_error(const std::string& msg) : error(msg) {}
};

}  // namespace matpress
