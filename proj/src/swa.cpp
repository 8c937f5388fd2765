// Copyright 2026 The occaug Authors
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

#include "occaug/swa.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>

#include "occaug/error.hpp"

namespace occaug {
namespace {

constexpr std::uint32_t kVersion = 1;
constexpr char kMagic[4] = {'N', 'T', 'C', 'K'};

class Writer {
 public:
  template <typename U>
  void put(U value) {
    for (std::size_t i = 0; i < sizeof(U); ++i) {
      bytes_.push_back(static_cast<std::uint8_t>(value >> (8 * i)));
    }
  }
  void raw(const void* data, std::size_t n) {
    const auto* p = static_cast<const std::uint8_t*>(data);
    bytes_.insert(bytes_.end(), p, p + n);
  }
  std::vector<std::uint8_t> take() { return std::move(bytes_); }

 private:
  std::vector<std::uint8_t> bytes_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  template <typename U>
  U get(const char* what) {
    need(sizeof(U), what);
    U value = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) {
      value |= static_cast<U>(static_cast<U>(bytes_[pos_ + i]) << (8 * i));
    }
    pos_ += sizeof(U);
    return value;
  }

  std::span<const std::uint8_t> take(std::size_t n, const char* what) {
    need(n, what);
    auto out = bytes_.subspan(pos_, n);
    pos_ += n;
    return out;
  }

  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  void need(std::size_t n, const char* what) const {
    if (bytes_.size() - pos_ < n) {
      throw Error(ErrorKind::TruncatedFile, std::string("file ends inside ") + what);
    }
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

std::size_t element_size(DType dtype) { return dtype == DType::Float32 ? 4 : 8; }

std::uint64_t shape_product(const std::vector<std::uint64_t>& shape) {
  std::uint64_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

void check_tensor(const std::string& name, const Tensor& t) {
  if (name.empty() || name.size() > std::numeric_limits<std::uint16_t>::max()) {
    throw Error(ErrorKind::MalformedCheckpoint, "tensor name length out of range");
  }
  if (t.shape.size() > std::numeric_limits<std::uint8_t>::max()) {
    throw Error(ErrorKind::MalformedCheckpoint, name + ": rank too large");
  }
  for (auto d : t.shape) {
    if (d == 0) throw Error(ErrorKind::MalformedCheckpoint, name + ": zero dimension");
  }
  if (shape_product(t.shape) != t.element_count()) {
    throw Error(ErrorKind::MalformedCheckpoint, name + ": data length does not match shape");
  }
}

template <typename T>
std::vector<double> widen(const std::vector<T>& v) {
  return {v.begin(), v.end()};
}

std::vector<double> as_double(const Tensor& t) {
  return std::visit([](const auto& v) { return widen(v); }, t.data);
}

}  // namespace

const char* to_string(DType dtype) noexcept {
  return dtype == DType::Float32 ? "float32" : "float64";
}

DType Tensor::dtype() const noexcept {
  return std::holds_alternative<std::vector<float>>(data) ? DType::Float32 : DType::Float64;
}

std::size_t Tensor::element_count() const noexcept {
  return std::visit([](const auto& v) { return v.size(); }, data);
}

bool operator==(const Tensor& a, const Tensor& b) {
  if (a.shape != b.shape || a.dtype() != b.dtype() || a.element_count() != b.element_count()) {
    return false;
  }
  return std::visit(
      [&](const auto& va) {
        using V = std::decay_t<decltype(va)>;
        const auto& vb = std::get<V>(b.data);
        return va.empty() ||
               std::memcmp(va.data(), vb.data(), va.size() * sizeof(typename V::value_type)) == 0;
      },
      a.data);
}

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& checkpoint) {
  if (checkpoint.size() > std::numeric_limits<std::uint32_t>::max()) {
    throw Error(ErrorKind::MalformedCheckpoint, "too many tensors");
  }
  Writer w;
  w.raw(kMagic, 4);
  w.put<std::uint32_t>(kVersion);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(checkpoint.size()));
  for (const auto& [name, tensor] : checkpoint) {
    check_tensor(name, tensor);
    w.put<std::uint16_t>(static_cast<std::uint16_t>(name.size()));
    w.raw(name.data(), name.size());
    w.put<std::uint8_t>(static_cast<std::uint8_t>(tensor.dtype()));
    w.put<std::uint8_t>(static_cast<std::uint8_t>(tensor.shape.size()));
    for (auto d : tensor.shape) w.put<std::uint64_t>(d);
    if (const auto* f = std::get_if<std::vector<float>>(&tensor.data)) {
      for (float x : *f) w.put<std::uint32_t>(std::bit_cast<std::uint32_t>(x));
    } else {
      for (double x : std::get<std::vector<double>>(tensor.data)) {
        w.put<std::uint64_t>(std::bit_cast<std::uint64_t>(x));
      }
    }
  }
  return w.take();
}

Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw Error(ErrorKind::BadMagic, "not an NTCK file");
  }
  Reader r(bytes);
  r.take(4, "magic");
  const auto version = r.get<std::uint32_t>("header");
  if (version != kVersion) {
    throw Error(ErrorKind::UnsupportedVersion, "NTCK version " + std::to_string(version));
  }
  const auto count = r.get<std::uint32_t>("header");
  Checkpoint out;
  std::string previous;
  for (std::uint32_t k = 0; k < count; ++k) {
    const auto name_len = r.get<std::uint16_t>("tensor header");
    const auto name_bytes = r.take(name_len, "tensor name");
    std::string name(name_bytes.begin(), name_bytes.end());
    if (name.empty()) throw Error(ErrorKind::MalformedCheckpoint, "empty tensor name");
    if (k > 0 && !(previous < name)) {
      throw Error(ErrorKind::MalformedCheckpoint, "tensor names not strictly ascending at " + name);
    }
    const auto dtype_byte = r.get<std::uint8_t>("tensor header");
    if (dtype_byte > 1) {
      throw Error(ErrorKind::MalformedCheckpoint, name + ": unknown dtype " + std::to_string(dtype_byte));
    }
    const auto dtype = static_cast<DType>(dtype_byte);
    const auto rank = r.get<std::uint8_t>("tensor header");
    Tensor t;
    std::uint64_t n = 1;
    for (std::uint8_t d = 0; d < rank; ++d) {
      const auto dim = r.get<std::uint64_t>("tensor shape");
      if (dim == 0) throw Error(ErrorKind::MalformedCheckpoint, name + ": zero dimension");
      if (n > std::numeric_limits<std::uint64_t>::max() / dim) {
        throw Error(ErrorKind::ShapeOverflow, name + ": element count overflows");
      }
      n *= dim;
      t.shape.push_back(dim);
    }
    const std::size_t esize = element_size(dtype);
    if (n > std::numeric_limits<std::uint64_t>::max() / esize ||
        n * esize > std::numeric_limits<std::size_t>::max()) {
      throw Error(ErrorKind::ShapeOverflow, name + ": payload size overflows");
    }
    if (n * esize > r.remaining()) {
      throw Error(ErrorKind::TruncatedFile, name + ": payload shorter than declared shape");
    }
    if (dtype == DType::Float32) {
      std::vector<float> v(n);
      for (auto& x : v) x = std::bit_cast<float>(r.get<std::uint32_t>("payload"));
      t.data = std::move(v);
    } else {
      std::vector<double> v(n);
      for (auto& x : v) x = std::bit_cast<double>(r.get<std::uint64_t>("payload"));
      t.data = std::move(v);
    }
    previous = name;
    out.emplace(std::move(name), std::move(t));
  }
  if (r.remaining() != 0) {
    throw Error(ErrorKind::TruncatedFile,
                std::to_string(r.remaining()) + " bytes after the last tensor");
  }
  return out;
}

void write_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path) {
  const auto bytes = encode_checkpoint(checkpoint);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::IoFailure, "cannot open " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorKind::IoFailure, "cannot write " + path.string());
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::MissingFile, path.string());
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                        std::istreambuf_iterator<char>());
  try {
    return decode_checkpoint(bytes);
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.detail());
  }
}

Checkpoint average_checkpoints(const std::vector<Checkpoint>& checkpoints,
                               const std::optional<std::vector<double>>& weights) {
  if (checkpoints.empty()) throw Error(ErrorKind::EmptyInput, "no checkpoints to average");
  const std::size_t k = checkpoints.size();
  std::vector<double> w(k, 1.0);
  if (weights) {
    if (weights->size() != k) {
      throw Error(ErrorKind::InvalidConfig, "weights: expected " + std::to_string(k) + " values");
    }
    double total = 0.0;
    for (double x : *weights) {
      if (!(x >= 0.0) || !std::isfinite(x)) {
        throw Error(ErrorKind::InvalidConfig, "weights: must be finite and non-negative");
      }
      total += x;
    }
    if (!(total > 0.0)) throw Error(ErrorKind::InvalidConfig, "weights: sum must be positive");
    w = *weights;
  }
  double weight_total = 0.0;
  for (double x : w) weight_total += x;

  const Checkpoint& first = checkpoints.front();
  for (std::size_t i = 1; i < k; ++i) {
    const Checkpoint& c = checkpoints[i];
    const std::string where = "checkpoint " + std::to_string(i) + ": ";
    auto a = first.begin();
    auto b = c.begin();
    for (; a != first.end() && b != c.end(); ++a, ++b) {
      if (a->first != b->first) {
        const std::string& missing = a->first < b->first ? a->first : b->first;
        throw Error(ErrorKind::SchemaMismatch, where + "tensor '" + missing + "' not in both");
      }
      if (a->second.dtype() != b->second.dtype()) {
        throw Error(ErrorKind::SchemaMismatch, where + "tensor '" + a->first + "' dtype differs");
      }
      if (a->second.shape != b->second.shape) {
        throw Error(ErrorKind::SchemaMismatch, where + "tensor '" + a->first + "' shape differs");
      }
    }
    if (a != first.end() || b != c.end()) {
      const std::string& extra = a != first.end() ? a->first : b->first;
      throw Error(ErrorKind::SchemaMismatch, where + "tensor '" + extra + "' not in both");
    }
  }

  Checkpoint out;
  for (const auto& [name, tensor] : first) {
    // Accumulate offsets from the first input so identical inputs come back
    // unchanged.
    const std::vector<double> base = as_double(tensor);
    std::vector<double> acc(base.size(), 0.0);
    for (std::size_t i = 0; i < k; ++i) {
      const std::vector<double> x = i == 0 ? base : as_double(checkpoints[i].at(name));
      for (std::size_t e = 0; e < acc.size(); ++e) acc[e] += w[i] * (x[e] - base[e]);
    }
    for (std::size_t e = 0; e < acc.size(); ++e) acc[e] = base[e] + acc[e] / weight_total;
    Tensor t;
    t.shape = tensor.shape;
    if (tensor.dtype() == DType::Float32) {
      t.data = std::vector<float>(acc.begin(), acc.end());
    } else {
      t.data = std::move(acc);
    }
    out.emplace(name, std::move(t));
  }
  return out;
}

Checkpoint average_checkpoint_files(const std::vector<std::filesystem::path>& paths,
                                    const std::optional<std::vector<double>>& weights) {
  if (paths.empty()) throw Error(ErrorKind::EmptyInput, "no checkpoints to average");
  std::vector<Checkpoint> checkpoints;
  checkpoints.reserve(paths.size());
  for (const auto& p : paths) checkpoints.push_back(read_checkpoint(p));
  return average_checkpoints(checkpoints, weights);
}

}  // namespace occaug
