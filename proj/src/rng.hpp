// Copyright (c) 2026 The EdgeFlow Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef EDGEFLOW_RNG_HPP
#define EDGEFLOW_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>
#include <sstream>
#include <string>

#include "error.hpp"

namespace edgeflow {

// Deterministic random stream. Distribution transforms are implemented by
// hand (not via std:: distributions) so that a given seed produces the same
// sequence on every standard library, and so the full state round-trips
// through checkpoints as text.
class Rng {
 public:
  Rng() : engine_(0) {}
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    if (n == 0) throw ContractError("Rng::below requires n > 0");
    // Rejection sampling to avoid modulo bias.
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x = engine_();
    while (x >= limit) x = engine_();
    return x % n;
  }

  // Standard normal via Box-Muller. One engine draw pair per call; the
  // second variate is discarded so the stream position is call-count
  // deterministic and no cached state needs serializing.
  double normal() {
    double u1 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    return r * std::cos(2.0 * M_PI * u2);
  }

  std::string serialize() const {
    std::ostringstream os;
    os << engine_;
    return os.str();
  }

  void deserialize(const std::string& text) {
    std::istringstream is(text);
    is >> engine_;
    if (is.fail()) throw FormatError("malformed RNG state");
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace edgeflow

#endif  // EDGEFLOW_RNG_HPP
