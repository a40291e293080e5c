#pragma once

// Merkle-tree vector commitment over fixed-width symbols with batched,
// deduplicated multi-position openings.
//
// Leaf j (1-based):   H(tag || 0x00 || j as u64be || symbol bytes)
// Padding leaf j:     H(tag || 0x02 || j as u64be || zero symbol block)
// Internal node:      H(tag || 0x01 || left || right)
//
// Positions past the committed length (up to the tree width) are padding
// leaves; they open to the symbol 0. Multi-proofs list the sibling digests
// that cannot be derived from the opened leaves, bottom-up and left to right
// within a level, so a proof's length is forced by (width, positions).

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "ibcs/bytes.h"
#include "ibcs/hash.h"

namespace ibcs {

using Symbol = uint64_t;
using PositionSet = std::vector<uint64_t>;  // strictly increasing, 1-based

namespace vc {

enum class HashId : uint8_t { kSha256 = 1 };

Bytes DefaultDomainTag();

struct VcParams {
  uint16_t lambda = 128;
  uint64_t capacity = 1;
  uint8_t symbol_bits = 8;
  HashId hash = HashId::kSha256;
  Bytes domain_tag;

  // Least power of two >= capacity.
  uint64_t width() const;
  unsigned depth() const;
  size_t symbol_bytes() const { return (symbol_bits + 7u) / 8u; }
  Symbol max_symbol() const;

  Bytes Serialize() const;
  static VcParams Parse(ByteSpan data);

  bool operator==(const VcParams&) const = default;
};

struct Commitment {
  Digest root{};
  uint64_t length = 0;

  bool operator==(const Commitment&) const = default;
};

struct CommitAux {
  // layers[0] are the leaves; layers.back() holds only the root.
  std::vector<std::vector<Digest>> layers;
  std::vector<Symbol> message;
};

struct Opening {
  PositionSet positions;
  std::vector<Symbol> answers;
  std::vector<Digest> proof;

  bool operator==(const Opening&) const = default;
};

// lambda must be 128 or 256; capacity >= 1; symbol_bits in [1, 64].
VcParams Gen(unsigned lambda, uint64_t capacity, unsigned symbol_bits = 8,
             Bytes domain_tag = DefaultDomainTag());

std::pair<Commitment, CommitAux> Commit(const VcParams& params, std::span<const Symbol> message);

// Throws InvalidQuery for an empty, unsorted, duplicated or out-of-range set.
Opening Open(const VcParams& params, const CommitAux& aux, std::span<const uint64_t> positions);

// Malformed input of any kind yields false rather than an exception.
bool Check(const VcParams& params, const Commitment& cm, std::span<const uint64_t> positions,
           std::span<const Symbol> answers, std::span<const Digest> proof);

inline bool Check(const VcParams& params, const Commitment& cm, const Opening& op) {
  return Check(params, cm, op.positions, op.answers, op.proof);
}

// Number of digests in the canonical proof for `positions`; positions must be
// a valid query set for `params`.
size_t ProofLength(const VcParams& params, std::span<const uint64_t> positions);

// True iff positions are strictly increasing and within [1, capacity].
bool IsValidQuerySet(const VcParams& params, std::span<const uint64_t> positions);

Digest LeafHash(const VcParams& params, uint64_t position, Symbol symbol);
Digest PaddingLeafHash(const VcParams& params, uint64_t position);
Digest NodeHash(const VcParams& params, const Digest& left, const Digest& right);

}  // namespace vc
}  // namespace ibcs
