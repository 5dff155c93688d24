// Copyright 2026 The mdlxf Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef MDLXF_COMMON_H_
#define MDLXF_COMMON_H_

#include <cmath>
#include <cstddef>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <string>

namespace mdlxf {

// Base class for every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

class CompileError : public Error {
 public:
  using Error::Error;
};

class NumericError : public Error {
 public:
  NumericError(const std::string& what, int layer)
      : Error(what), layer_(layer) {}
  int layer() const { return layer_; }

 private:
  int layer_;
};

class FormatError : public Error {
 public:
  using Error::Error;
};

inline constexpr double kLn2 = std::numbers::ln2;

inline double NatsToBits(double nats) { return nats / kLn2; }
inline double BitsToNats(double bits) { return bits * kLn2; }

// Numerically stable log(1 + exp(x)).
inline double Softplus(double x) {
  return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

inline double Sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// Worker count: MDLXF_THREADS if set, else the hardware concurrency.
int ThreadCount();

// Runs fn(i) for i in [0, n) across ThreadCount() workers. fn must be
// safe to call concurrently for distinct i.
void ParallelFor(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace mdlxf

#endif  // MDLXF_COMMON_H_
