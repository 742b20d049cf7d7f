/* Copyright 2026 The Lataug Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef LATAUG_COMMON_HPP_
#define LATAUG_COMMON_HPP_

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace lataug {

// Malformed or inconsistent input data (manifests, archives, checkpoints).
// The CLI maps this to exit code 2.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Numerical failure (non-finite loss, NaN gradient, broken determinism).
// The CLI maps this to exit code 3.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Seeded random source used for every random decision in the toolkit.
// normal() is Box-Muller over raw mt19937_64 output without a cached spare,
// so the state is exactly the engine state and serializes losslessly.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1), 53-bit resolution.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Uniform in (0, 1]; never zero, safe for log().
  double uniform_open() {
    return static_cast<double>((engine_() >> 11) + 1) * 0x1.0p-53;
  }

  // Uniform integer in [0, n), unbiased via rejection.
  std::uint64_t uniform_int(std::uint64_t n);

  // Standard normal draw.
  double normal();

  // Uniform in [lo, hi).
  double uniform_range(double lo, double hi) {
    return lo + (hi - lo) * uniform();
  }

  std::string serialize() const;
  static Rng deserialize(const std::string& state);

  bool operator==(const Rng& other) const { return engine_ == other.engine_; }

 private:
  std::mt19937_64 engine_;
};

// FNV-1a over the seed, a stream index and an id string. Used to derive
// independent per-utterance random streams that do not depend on
// processing order.
std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t stream,
                          std::string_view id);

// Fisher-Yates shuffle driven by Rng::uniform_int, identical on every
// platform for a given seed.
template <typename T>
void shuffle(std::vector<T>& items, Rng& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.uniform_int(i));
    std::swap(items[i - 1], items[j]);
  }
}

// Runs fn(0..n-1) on up to `threads` workers. Items must be independent;
// the first exception thrown by any worker is rethrown on the caller.
void parallel_for(int n, int threads, const std::function<void(int)>& fn);

// ----------------------------------------------------------------------------
// Little-endian binary IO. All on-disk formats are little-endian regardless
// of host order.

void put_u32(std::string& out, std::uint32_t v);
void put_f32(std::string& out, float v);
void put_f64(std::string& out, double v);

class ByteReader {
 public:
  ByteReader(const std::string& data, std::string context)
      : data_(data), context_(std::move(context)) {}

  std::uint32_t get_u32();
  float get_f32();
  double get_f64();
  std::string get_bytes(std::size_t n);
  std::size_t remaining() const { return data_.size() - pos_; }
  bool done() const { return pos_ == data_.size(); }

 private:
  void need(std::size_t n);

  const std::string& data_;
  std::string context_;
  std::size_t pos_ = 0;
};

std::string read_file_bytes(const std::string& path);
void write_file_bytes(const std::string& path, const std::string& bytes);

}  // namespace lataug

#endif  // LATAUG_COMMON_HPP_
