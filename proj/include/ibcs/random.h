#pragma once

#include <cstdint>
#include <random>
#include <string_view>

#include "ibcs/bytes.h"

namespace ibcs {

// Counter-based stream derivation: the child seed is the first 8 bytes
// (big-endian) of SHA-256("ibcs-seed" || master || label || index), with
// master and index as 8-byte big-endian integers. Every session, trial and
// rewind stream in the library is derived this way from one master seed.
uint64_t DeriveSeed(uint64_t master, std::string_view label, uint64_t index);

class RandomStream {
 public:
  explicit RandomStream(uint64_t seed) : engine_(seed) {}

  uint64_t NextU64() { return engine_(); }
  // Uniform in [0, n); n > 0.
  uint64_t Below(uint64_t n);
  // Uniform in [lo, hi] inclusive.
  uint64_t Between(uint64_t lo, uint64_t hi);
  // `bits` uniform bits, MSB-first, final partial byte zero-padded.
  Bytes Bits(size_t bits);
  double Uniform01();

 private:
  std::mt19937_64 engine_;
};

inline constexpr double kDefaultDelta = 1e-6;

// Two-sided Hoeffding radius sqrt(ln(2/delta) / (2 n)).
double HoeffdingRadius(uint64_t trials, double delta = kDefaultDelta);

}  // namespace ibcs
