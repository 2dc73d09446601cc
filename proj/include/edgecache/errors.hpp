/*
 * Copyright 2026 the edgecache authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef EDGECACHE_ERRORS_HPP
#define EDGECACHE_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace edgecache {

// Base class for every error thrown by this library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Incompatible matrix/vector dimensions.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Invalid user-supplied configuration (bad ranks, batch sizes, topologies...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Bad input data (empty files, negative entries where forbidden...).
class DataError : public Error {
 public:
  using Error::Error;
};

// Malformed input line; carries the 1-based line number.
class ParseError : public DataError {
 public:
  ParseError(const std::string& what, std::size_t line)
      : DataError(what + " (line " + std::to_string(line) + ")"), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// An API precondition between modules was violated (stale traces, unknown ids,
// mismatched gradient shapes at the aggregation barrier...).
class ContractError : public Error {
 public:
  using Error::Error;
};

// Non-finite values where finite ones are required.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Training produced a non-finite loss; carries the 1-based epoch index.
class DivergedError : public NumericError {
 public:
  DivergedError(const std::string& what, long epoch)
      : NumericError(what + " (epoch " + std::to_string(epoch) + ")"), epoch_(epoch) {}
  long epoch() const { return epoch_; }

 private:
  long epoch_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace edgecache

#endif  // EDGECACHE_ERRORS_HPP
