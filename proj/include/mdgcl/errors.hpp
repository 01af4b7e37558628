// Copyright 2026 The MDGCL Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef MDGCL_ERRORS_HPP
#define MDGCL_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace mdgcl {

// Bad input data or broken invariants (graphs, configs, splits).
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// File format / filesystem problems.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

// Non-finite values where finite ones are required (losses, gradients).
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

// Config-file parse problems (unknown key, bad value).
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace mdgcl

#endif  // MDGCL_ERRORS_HPP
