// Copyright (c) 2026 The EdgeFlow Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef EDGEFLOW_CHECKPOINT_HPP
#define EDGEFLOW_CHECKPOINT_HPP

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "tensor.hpp"

namespace edgeflow {

// Versioned binary container: magic + version, embedded config text, step
// counter, RNG state, named f64 tensors (parameters, optimizer moments and
// auxiliary data) in a fixed order. All integers little-endian.
struct Checkpoint {
  static constexpr std::uint32_t kMagic = 0x4B434645;  // "EFCK"
  static constexpr std::uint32_t kVersion = 1;

  std::string config_text;
  std::uint64_t step = 0;
  std::uint64_t optimizer_step = 0;
  std::string rng_state;
  std::vector<std::pair<std::string, Tensor>> tensors;

  const Tensor* find(const std::string& name) const;

  void save(const std::string& path) const;
  static Checkpoint load(const std::string& path);

  std::vector<std::uint8_t> to_bytes() const;
  static Checkpoint from_bytes(const std::vector<std::uint8_t>& bytes);
};

}  // namespace edgeflow

#endif  // EDGEFLOW_CHECKPOINT_HPP
