#pragma once

#include <stdexcept>
#include <string>

namespace motiv {

/// Bad or unreadable input data (files, rows, request parameters).
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A model cannot be fitted on the given table: degenerate target,
/// rank-deficient design, unknown feature.
class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace motiv
