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

#include <algorithm>
#include <cstring>
#include <fstream>
#include <optional>

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <gtest/gtest.h>

#include "occaug/error.hpp"
#include "occaug/swa.hpp"
#include "support.hpp"

namespace occaug {
namespace {

using Wide = boost::multiprecision::cpp_bin_float_50;

std::optional<ErrorKind> decode_error(const std::vector<std::uint8_t>& bytes) {
  try {
    decode_checkpoint(bytes);
  } catch (const Error& e) {
    return e.kind();
  }
  return std::nullopt;
}

// Little-endian builder for hand-made files.
struct Bytes {
  std::vector<std::uint8_t> b;
  template <typename T>
  Bytes& put(T v) {
    for (std::size_t i = 0; i < sizeof(T); ++i) b.push_back(static_cast<std::uint8_t>(static_cast<std::uint64_t>(v) >> (8 * i)));
    return *this;
  }
  Bytes& str(const std::string& s) {
    b.insert(b.end(), s.begin(), s.end());
    return *this;
  }
};

Bytes header(std::uint32_t count) {
  Bytes h;
  h.str("NTCK").put<std::uint32_t>(1).put<std::uint32_t>(count);
  return h;
}

Checkpoint perturbed(const Checkpoint& base, Rng& rng) {
  Checkpoint out = base;
  for (auto& [name, t] : out) {
    std::visit([&](auto& v) {
      for (auto& x : v) x = static_cast<std::decay_t<decltype(x)>>(rng.uniform_real(-4.0, 4.0));
    }, t.data);
  }
  return out;
}

std::vector<double> values_of(const Tensor& t) {
  return std::visit([](const auto& v) { return std::vector<double>(v.begin(), v.end()); }, t.data);
}

TEST(Ntck, RoundTrip) {
  Rng rng(1);
  for (int i = 0; i < 20; ++i) {
    const Checkpoint c = testing::random_checkpoint(rng, static_cast<int>(rng.uniform_int(0, 6)));
    EXPECT_EQ(decode_checkpoint(encode_checkpoint(c)), c);
  }
  testing::TempDir dir;
  const Checkpoint c = testing::random_checkpoint(rng, 3);
  write_checkpoint(c, dir / "a.ntck");
  EXPECT_EQ(read_checkpoint(dir / "a.ntck"), c);
}

TEST(Ntck, LayoutOfSmallFile) {
  Checkpoint c;
  c["w"] = Tensor{{2}, std::vector<float>{1.0f, -2.0f}};
  Bytes expected = header(1);
  expected.put<std::uint16_t>(1).str("w").put<std::uint8_t>(0).put<std::uint8_t>(1).put<std::uint64_t>(2);
  for (float f : {1.0f, -2.0f}) {
    std::uint32_t u;
    std::memcpy(&u, &f, 4);
    expected.put(u);
  }
  EXPECT_EQ(encode_checkpoint(c), expected.b);
}

TEST(Ntck, DecodeErrors) {
  Rng rng(2);
  const auto good = encode_checkpoint(testing::random_checkpoint(rng, 2));

  auto bad = good;
  bad[0] = 'X';
  EXPECT_EQ(decode_error(bad), ErrorKind::BadMagic);
  EXPECT_EQ(decode_error({'N', 'T', 'C'}), ErrorKind::BadMagic);

  bad = good;
  bad[4] = 2;
  EXPECT_EQ(decode_error(bad), ErrorKind::UnsupportedVersion);

  bad.assign(good.begin(), good.end() - 1);
  EXPECT_EQ(decode_error(bad), ErrorKind::TruncatedFile);
  bad = good;
  bad.push_back(0);
  EXPECT_EQ(decode_error(bad), ErrorKind::TruncatedFile);
  EXPECT_EQ(decode_error({'N', 'T', 'C', 'K', 1, 0}), ErrorKind::TruncatedFile);

  Bytes huge = header(1);
  huge.put<std::uint16_t>(1).str("a").put<std::uint8_t>(0).put<std::uint8_t>(2);
  huge.put<std::uint64_t>(1ull << 40).put<std::uint64_t>(1ull << 40);
  EXPECT_EQ(decode_error(huge.b), ErrorKind::ShapeOverflow);

  Bytes dtype = header(1);
  dtype.put<std::uint16_t>(1).str("a").put<std::uint8_t>(7).put<std::uint8_t>(0).put<std::uint32_t>(0);
  EXPECT_EQ(decode_error(dtype.b), ErrorKind::MalformedCheckpoint);

  Bytes zero = header(1);
  zero.put<std::uint16_t>(1).str("a").put<std::uint8_t>(0).put<std::uint8_t>(1).put<std::uint64_t>(0);
  EXPECT_EQ(decode_error(zero.b), ErrorKind::MalformedCheckpoint);
}

TEST(Ntck, ReadErrorsNameTheFile) {
  testing::TempDir dir;
  try {
    read_checkpoint(dir / "missing.ntck");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::MissingFile);
  }
  std::ofstream(dir / "bad.ntck") << "NOPE";
  try {
    read_checkpoint(dir / "bad.ntck");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::BadMagic);
    EXPECT_NE(e.detail().find("bad.ntck"), std::string::npos);
  }
}

TEST(Average, SmallExample) {
  Checkpoint a, b;
  a["x"] = Tensor{{2}, std::vector<float>{1.0f, 3.0f}};
  b["x"] = Tensor{{2}, std::vector<float>{3.0f, 5.0f}};
  const Checkpoint m = average_checkpoints({a, b});
  EXPECT_EQ(m.at("x"), (Tensor{{2}, std::vector<float>{2.0f, 4.0f}}));
}

TEST(Average, MatchesWidePrecisionMean) {
  Rng rng(3);
  const Checkpoint base = testing::random_checkpoint(rng, 5);
  std::vector<Checkpoint> inputs;
  for (int i = 0; i < 12; ++i) inputs.push_back(perturbed(base, rng));
  std::vector<double> weights;
  for (int i = 0; i < 12; ++i) weights.push_back(rng.uniform_real(0.1, 2.0));
  for (bool weighted : {false, true}) {
    const Checkpoint m = weighted ? average_checkpoints(inputs, weights) : average_checkpoints(inputs);
    for (const auto& [name, t] : m) {
      const auto got = values_of(t);
      std::vector<Wide> sum(got.size(), 0);
      Wide wsum = 0;
      for (std::size_t i = 0; i < inputs.size(); ++i) {
        const Wide w = weighted ? Wide(weights[i]) : Wide(1);
        const auto v = values_of(inputs[i].at(name));
        for (std::size_t j = 0; j < v.size(); ++j) sum[j] += w * Wide(v[j]);
        wsum += w;
      }
      for (std::size_t j = 0; j < got.size(); ++j) {
        const double ref = static_cast<double>(sum[j] / wsum);
        EXPECT_LE(std::abs(got[j] - ref), 1e-6 * std::max(std::abs(ref), 1e-6)) << name << " " << j;
      }
    }
  }
}

TEST(Average, CopiesAreFixedPoint) {
  Rng rng(4);
  const Checkpoint c = testing::random_checkpoint(rng, 6);
  for (int k : {1, 2, 3, 7}) {
    EXPECT_EQ(average_checkpoints(std::vector<Checkpoint>(static_cast<std::size_t>(k), c)), c);
  }
}

TEST(Average, PermutationInvariant) {
  Rng rng(5);
  const Checkpoint base = testing::random_checkpoint(rng, 4);
  std::vector<Checkpoint> inputs;
  for (int i = 0; i < 6; ++i) inputs.push_back(perturbed(base, rng));
  const Checkpoint m1 = average_checkpoints(inputs);
  std::reverse(inputs.begin(), inputs.end());
  std::swap(inputs[1], inputs[4]);
  const Checkpoint m2 = average_checkpoints(inputs);
  for (const auto& [name, t] : m1) {
    const auto a = values_of(t), b = values_of(m2.at(name));
    for (std::size_t j = 0; j < a.size(); ++j) {
      EXPECT_LE(std::abs(a[j] - b[j]), 1e-9 * std::max(1.0, std::abs(a[j])));
    }
  }
}

TEST(Average, Errors) {
  auto kind_of = [](auto&& fn) -> std::optional<ErrorKind> {
    try {
      fn();
    } catch (const Error& e) {
      return e.kind();
    }
    return std::nullopt;
  };
  EXPECT_EQ(kind_of([] { average_checkpoints({}); }), ErrorKind::EmptyInput);

  Rng rng(6);
  const Checkpoint a = testing::random_checkpoint(rng, 3);
  Checkpoint b = a;
  b.erase(b.begin());
  EXPECT_EQ(kind_of([&] { average_checkpoints({a, b}); }), ErrorKind::SchemaMismatch);

  Checkpoint c = a;
  c.begin()->second.shape.push_back(1);
  try {
    average_checkpoints({a, c});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::SchemaMismatch);
    EXPECT_NE(e.detail().find(a.begin()->first), std::string::npos);
  }

  Checkpoint d = a;
  auto& t = d.begin()->second;
  if (t.dtype() == DType::Float32) {
    t.data = std::vector<double>(t.element_count());
  } else {
    t.data = std::vector<float>(t.element_count());
  }
  EXPECT_EQ(kind_of([&] { average_checkpoints({a, d}); }), ErrorKind::SchemaMismatch);

  EXPECT_EQ(kind_of([&] { average_checkpoints({a, a}, std::vector<double>{1.0}); }), ErrorKind::InvalidConfig);
  EXPECT_EQ(kind_of([&] { average_checkpoints({a, a}, std::vector<double>{1.0, -1.0}); }), ErrorKind::InvalidConfig);
  EXPECT_EQ(kind_of([&] { average_checkpoints({a, a}, std::vector<double>{0.0, 0.0}); }), ErrorKind::InvalidConfig);
}

TEST(Average, Files) {
  testing::TempDir dir;
  Checkpoint a, b;
  a["x"] = Tensor{{}, std::vector<double>{1.0}};
  b["x"] = Tensor{{}, std::vector<double>{4.0}};
  write_checkpoint(a, dir / "a.ntck");
  write_checkpoint(b, dir / "b.ntck");
  const Checkpoint m = average_checkpoint_files({dir / "a.ntck", dir / "b.ntck"}, std::vector<double>{2.0, 1.0});
  EXPECT_EQ(std::get<std::vector<double>>(m.at("x").data)[0], 2.0);
}

}  // namespace
}  // namespace occaug
