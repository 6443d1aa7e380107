// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <limits>

namespace fpreg {

// Counter-based generator: output i of stream `key` is splitmix64(key + (i+1)*gamma).
// Streams derived with substream() are independent of execution order, so a
// trial's draws depend only on (seed, trial index).
class CounterRng {
 public:
  using result_type = std::uint64_t;
  static constexpr const char* kAlgorithm = "splitmix64-counter/v1";

  explicit CounterRng(std::uint64_t key) : key_(key) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() { return mix(key_ + (++counter_) * kGamma); }

  // Uniform integer in [0, bound). Rejection sampling keeps it exact and portable.
  std::uint64_t below(std::uint64_t bound) {
    if (bound <= 1) return 0;
    const std::uint64_t limit = max() - (max() % bound);
    for (;;) {
      const std::uint64_t x = (*this)();
      if (x < limit) return x % bound;
    }
  }

  // Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  CounterRng substream(std::uint64_t index) const { return CounterRng(derive(key_, index)); }

  std::uint64_t key() const { return key_; }
  std::uint64_t counter() const { return counter_; }

  static std::uint64_t derive(std::uint64_t seed, std::uint64_t index) {
    return mix(mix(seed ^ 0x6a09e667f3bcc909ULL) + index * kGamma);
  }

  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  static constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace fpreg
