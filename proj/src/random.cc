#include "ibcs/random.h"

#include <cmath>

#include "ibcs/error.h"
#include "ibcs/hash.h"

namespace ibcs {

uint64_t DeriveSeed(uint64_t master, std::string_view label, uint64_t index) {
  static constexpr std::string_view kPrefix = "ibcs-seed";
  Bytes m, i;
  PutU64(m, master);
  PutU64(i, index);
  const auto as_span = [](std::string_view s) {
    return ByteSpan(reinterpret_cast<const uint8_t*>(s.data()), s.size());
  };
  Digest d = Sha256({as_span(kPrefix), m, as_span(label), i});
  uint64_t seed = 0;
  for (int b = 0; b < 8; ++b) seed = (seed << 8) | d[b];
  return seed;
}

uint64_t RandomStream::Below(uint64_t n) {
  if (n == 0) throw InvalidParameter("Below(0)");
  // Rejection on the top multiple of n keeps the draw exactly uniform.
  const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  for (;;) {
    uint64_t x = engine_();
    if (x < limit) return x % n;
  }
}

uint64_t RandomStream::Between(uint64_t lo, uint64_t hi) {
  if (hi < lo) throw InvalidParameter("Between: empty range");
  if (lo == 0 && hi == UINT64_MAX) return engine_();
  return lo + Below(hi - lo + 1);
}

Bytes RandomStream::Bits(size_t bits) {
  Bytes out((bits + 7) / 8);
  for (size_t i = 0; i < out.size(); i += 8) {
    uint64_t w = engine_();
    for (size_t j = 0; j < 8 && i + j < out.size(); ++j) out[i + j] = static_cast<uint8_t>(w >> (56 - 8 * j));
  }
  if (bits % 8 != 0) out.back() &= static_cast<uint8_t>(0xff << (8 - bits % 8));
  return out;
}

double RandomStream::Uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double HoeffdingRadius(uint64_t trials, double delta) {
  if (trials == 0) throw InvalidParameter("HoeffdingRadius: zero trials");
  return std::sqrt(std::log(2.0 / delta) / (2.0 * static_cast<double>(trials)));
}

}  // namespace ibcs
