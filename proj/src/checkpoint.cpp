// Copyright (c) 2026 The EdgeFlow Authors
// SPDX-License-Identifier: Apache-2.0

#include "checkpoint.hpp"

#include <cstring>
#include <fstream>

#include "error.hpp"

namespace edgeflow {

namespace {

class Writer {
 public:
  void u8(std::uint8_t v) { bytes_.push_back(v); }

  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }

  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }

  void f64(double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof(bits));
    u64(bits);
  }

  void str(const std::string& s) {
    u64(s.size());
    bytes_.insert(bytes_.end(), s.begin(), s.end());
  }

  std::vector<std::uint8_t> take() { return std::move(bytes_); }

 private:
  std::vector<std::uint8_t> bytes_;
};

class Reader {
 public:
  explicit Reader(const std::vector<std::uint8_t>& bytes) : bytes_(bytes) {}

  std::uint8_t u8() {
    need(1);
    return bytes_[pos_++];
  }

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_++]) << (8 * i);
    return v;
  }

  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes_[pos_++]) << (8 * i);
    return v;
  }

  double f64() {
    const std::uint64_t bits = u64();
    double v;
    std::memcpy(&v, &bits, sizeof(v));
    return v;
  }

  std::string str() {
    const std::uint64_t n = u64();
    need(n);
    std::string s(bytes_.begin() + static_cast<std::ptrdiff_t>(pos_),
                  bytes_.begin() + static_cast<std::ptrdiff_t>(pos_ + n));
    pos_ += n;
    return s;
  }

  void expect_end() const {
    if (pos_ != bytes_.size())
      throw FormatError("checkpoint has trailing bytes");
  }

 private:
  void need(std::uint64_t n) const {
    if (pos_ + n > bytes_.size()) throw FormatError("truncated checkpoint payload");
  }

  const std::vector<std::uint8_t>& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

const Tensor* Checkpoint::find(const std::string& name) const {
  for (const auto& [n, t] : tensors)
    if (n == name) return &t;
  return nullptr;
}

std::vector<std::uint8_t> Checkpoint::to_bytes() const {
  Writer w;
  w.u32(kMagic);
  w.u32(kVersion);
  w.str(config_text);
  w.u64(step);
  w.u64(optimizer_step);
  w.str(rng_state);
  w.u32(static_cast<std::uint32_t>(tensors.size()));
  for (const auto& [name, tensor] : tensors) {
    w.str(name);
    w.u8(0);  // dtype: f64
    w.u32(static_cast<std::uint32_t>(tensor.shape().size()));
    for (std::size_t d : tensor.shape()) w.u64(d);
    for (double v : tensor.data()) w.f64(v);
  }
  return w.take();
}

Checkpoint Checkpoint::from_bytes(const std::vector<std::uint8_t>& bytes) {
  Reader r(bytes);
  if (r.u32() != kMagic) throw FormatError("not a checkpoint file (bad magic)");
  const std::uint32_t version = r.u32();
  if (version != kVersion)
    throw FormatError("unsupported checkpoint version " + std::to_string(version) +
                      " (expected " + std::to_string(kVersion) + ")");
  Checkpoint ck;
  ck.config_text = r.str();
  ck.step = r.u64();
  ck.optimizer_step = r.u64();
  ck.rng_state = r.str();
  const std::uint32_t count = r.u32();
  ck.tensors.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    std::string name = r.str();
    if (r.u8() != 0) throw FormatError("unsupported tensor dtype");
    const std::uint32_t ndim = r.u32();
    std::vector<std::size_t> shape(ndim);
    std::size_t total = 1;
    for (std::uint32_t d = 0; d < ndim; ++d) {
      shape[d] = static_cast<std::size_t>(r.u64());
      total *= shape[d];
    }
    std::vector<double> data(total);
    for (std::size_t j = 0; j < total; ++j) data[j] = r.f64();
    ck.tensors.emplace_back(std::move(name), Tensor(std::move(shape), std::move(data)));
  }
  r.expect_end();
  return ck;
}

void Checkpoint::save(const std::string& path) const {
  const std::vector<std::uint8_t> bytes = to_bytes();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open checkpoint for writing: " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing checkpoint: " + path);
}

Checkpoint Checkpoint::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint: " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return from_bytes(bytes);
}

}  // namespace edgeflow
