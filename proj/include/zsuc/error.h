#pragma once

#include <stdexcept>
#include <string>

namespace zsuc {

// Malformed or inconsistent input data (files, vocabularies, class sets).
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// Non-finite loss or parameters encountered during training.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace zsuc
