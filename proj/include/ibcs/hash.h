#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>

#include "ibcs/bytes.h"

namespace ibcs {

inline constexpr size_t kDigestSize = 32;
using Digest = std::array<uint8_t, kDigestSize>;

Digest Sha256(ByteSpan data);
// Hash of the concatenation of `parts`.
Digest Sha256(std::initializer_list<ByteSpan> parts);

}  // namespace ibcs
