// Copyright 2026 The MDGCL Authors
// SPDX-License-Identifier: Apache-2.0
//
// Versioned binary tensor container. Layout (all little-endian):
// magic "MDGC", u32 version, u32 tensor count; per tensor: u16 name
// length, UTF-8 name, u8 rank, u32 per dimension, then row-major IEEE-754
// f64 values. Tensors are written in name order so identical contents
// produce byte-identical files.

#ifndef MDGCL_CHECKPOINT_HPP
#define MDGCL_CHECKPOINT_HPP

#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "mdgcl/errors.hpp"
#include "mdgcl/graph.hpp"

namespace mdgcl {

constexpr char kCheckpointMagic[4] = {'M', 'D', 'G', 'C'};
constexpr std::uint32_t kCheckpointVersion = 1;

struct Tensor {
  std::vector<std::uint32_t> dims;
  std::vector<double> data;  // row-major

  static Tensor from_matrix(const Matrix& m) {
    Tensor t;
    t.dims = {static_cast<std::uint32_t>(m.rows()), static_cast<std::uint32_t>(m.cols())};
    t.data.resize(static_cast<std::size_t>(m.size()));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index j = 0; j < m.cols(); ++j)
        t.data[static_cast<std::size_t>(i * m.cols() + j)] = m(i, j);
    return t;
  }

  static Tensor from_vector(const Vector& v) {
    Tensor t;
    t.dims = {static_cast<std::uint32_t>(v.size())};
    t.data.assign(v.data(), v.data() + v.size());
    return t;
  }

  static Tensor from_scalars(const std::vector<double>& values) {
    Tensor t;
    t.dims = {static_cast<std::uint32_t>(values.size())};
    t.data = values;
    return t;
  }

  std::size_t element_count() const {
    std::size_t n = 1;
    for (auto d : dims) n *= d;
    return n;
  }

  Matrix to_matrix() const {
    if (dims.size() != 2) throw ValidationError("tensor is not rank 2");
    Matrix m(dims[0], dims[1]);
    for (std::uint32_t i = 0; i < dims[0]; ++i)
      for (std::uint32_t j = 0; j < dims[1]; ++j)
        m(i, j) = data[static_cast<std::size_t>(i) * dims[1] + j];
    return m;
  }

  Vector to_vector() const {
    if (dims.size() != 1) throw ValidationError("tensor is not rank 1");
    return Eigen::Map<const Vector>(data.data(), static_cast<Eigen::Index>(data.size()));
  }
};

struct Checkpoint {
  std::map<std::string, Tensor> tensors;

  bool has(const std::string& name) const { return tensors.count(name) > 0; }

  const Tensor& at(const std::string& name) const {
    auto it = tensors.find(name);
    if (it == tensors.end()) throw ValidationError("checkpoint missing tensor '" + name + "'");
    return it->second;
  }
};

namespace detail {

template <typename T>
void write_le(std::ostream& os, T value) {
  unsigned char buf[sizeof(T)];
  for (std::size_t i = 0; i < sizeof(T); ++i)
    buf[i] = static_cast<unsigned char>((static_cast<std::uint64_t>(value) >> (8 * i)) & 0xff);
  os.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

template <typename T>
T read_le(std::istream& is) {
  unsigned char buf[sizeof(T)];
  if (!is.read(reinterpret_cast<char*>(buf), sizeof(T)))
    throw IoError("checkpoint truncated");
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
  return static_cast<T>(v);
}

inline void write_f64(std::ostream& os, double value) {
  std::uint64_t bits;
  std::memcpy(&bits, &value, sizeof(bits));
  write_le<std::uint64_t>(os, bits);
}

inline double read_f64(std::istream& is) {
  const std::uint64_t bits = read_le<std::uint64_t>(is);
  double value;
  std::memcpy(&value, &bits, sizeof(value));
  return value;
}

}  // namespace detail

inline void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open '" + path + "' for writing");
  os.write(kCheckpointMagic, 4);
  detail::write_le<std::uint32_t>(os, kCheckpointVersion);
  detail::write_le<std::uint32_t>(os, static_cast<std::uint32_t>(ckpt.tensors.size()));
  for (const auto& [name, tensor] : ckpt.tensors) {
    detail::write_le<std::uint16_t>(os, static_cast<std::uint16_t>(name.size()));
    os.write(name.data(), static_cast<std::streamsize>(name.size()));
    detail::write_le<std::uint8_t>(os, static_cast<std::uint8_t>(tensor.dims.size()));
    for (auto d : tensor.dims) detail::write_le<std::uint32_t>(os, d);
    if (tensor.data.size() != tensor.element_count())
      throw ValidationError("tensor '" + name + "' payload does not match its dims");
    for (double v : tensor.data) detail::write_f64(os, v);
  }
  if (!os) throw IoError("write failure on '" + path + "'");
}

inline Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open '" + path + "'");
  char magic[4];
  if (!is.read(magic, 4)) throw IoError("checkpoint truncated");
  if (std::memcmp(magic, kCheckpointMagic, 4) != 0)
    throw IoError("bad checkpoint magic in '" + path + "'");
  const auto version = detail::read_le<std::uint32_t>(is);
  if (version != kCheckpointVersion)
    throw IoError("unsupported checkpoint version " + std::to_string(version));
  const auto count = detail::read_le<std::uint32_t>(is);
  Checkpoint ckpt;
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto name_len = detail::read_le<std::uint16_t>(is);
    std::string name(name_len, '\0');
    if (!is.read(name.data(), name_len)) throw IoError("checkpoint truncated");
    Tensor t;
    const auto rank = detail::read_le<std::uint8_t>(is);
    t.dims.resize(rank);
    for (auto& d : t.dims) d = detail::read_le<std::uint32_t>(is);
    t.data.resize(t.element_count());
    for (auto& v : t.data) v = detail::read_f64(is);
    ckpt.tensors.emplace(std::move(name), std::move(t));
  }
  return ckpt;
}

}  // namespace mdgcl

#endif  // MDGCL_CHECKPOINT_HPP
