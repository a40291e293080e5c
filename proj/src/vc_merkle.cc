#include "ibcs/vc_merkle.h"

#include <algorithm>
#include <bit>
#include <string_view>

#include "ibcs/error.h"

namespace ibcs::vc {
namespace {

constexpr uint8_t kLeafMarker = 0x00;
constexpr uint8_t kNodeMarker = 0x01;
constexpr uint8_t kPaddingMarker = 0x02;
constexpr uint8_t kParamsVersion = 1;

Bytes SymbolBytes(const VcParams& params, Symbol s) {
  Bytes out;
  PutUintBE(out, s, params.symbol_bytes());
  return out;
}

// One level of the canonical multi-proof walk. `known` holds sorted node
// indices at the current level; calls `sibling(idx)` for each sibling that
// must come from the proof, in emission order, and returns the parent level.
template <typename OnSibling>
std::vector<uint64_t> WalkLevel(const std::vector<uint64_t>& known, OnSibling&& sibling) {
  std::vector<uint64_t> parents;
  parents.reserve(known.size());
  for (size_t i = 0; i < known.size(); ++i) {
    const uint64_t idx = known[i];
    if ((idx & 1) == 0 && i + 1 < known.size() && known[i + 1] == idx + 1) {
      ++i;  // both children known
    } else {
      sibling(idx ^ 1);
    }
    parents.push_back(idx >> 1);
  }
  return parents;
}

std::vector<uint64_t> LeafIndices(std::span<const uint64_t> positions) {
  std::vector<uint64_t> idx(positions.begin(), positions.end());
  for (auto& i : idx) --i;
  return idx;
}

}  // namespace

Bytes DefaultDomainTag() {
  static constexpr std::string_view kTag = "ibcs-vc-v1";
  return Bytes(kTag.begin(), kTag.end());
}

uint64_t VcParams::width() const { return std::bit_ceil(capacity); }

unsigned VcParams::depth() const { return static_cast<unsigned>(std::countr_zero(width())); }

Symbol VcParams::max_symbol() const {
  return symbol_bits >= 64 ? UINT64_MAX : (uint64_t{1} << symbol_bits) - 1;
}

Bytes VcParams::Serialize() const {
  Bytes out;
  PutU8(out, kParamsVersion);
  PutU16(out, lambda);
  PutU64(out, capacity);
  PutU8(out, symbol_bits);
  PutU8(out, static_cast<uint8_t>(hash));
  PutU16(out, static_cast<uint16_t>(domain_tag.size()));
  PutBytes(out, domain_tag);
  return out;
}

VcParams VcParams::Parse(ByteSpan data) {
  ByteReader r(data);
  if (r.U8() != kParamsVersion) throw DecodeError("unknown params version", 0);
  VcParams p;
  p.lambda = r.U16();
  p.capacity = r.U64();
  p.symbol_bits = r.U8();
  const size_t hash_offset = r.offset();
  if (r.U8() != static_cast<uint8_t>(HashId::kSha256)) throw DecodeError("unknown hash id", hash_offset);
  const uint16_t tag_len = r.U16();
  ByteSpan tag = r.Take(tag_len);
  p.domain_tag.assign(tag.begin(), tag.end());
  r.ExpectEnd();
  if ((p.lambda != 128 && p.lambda != 256) || p.capacity == 0 || p.capacity > (uint64_t{1} << 40) ||
      p.symbol_bits == 0 || p.symbol_bits > 64) {
    throw DecodeError("params out of range", 1);
  }
  return p;
}

VcParams Gen(unsigned lambda, uint64_t capacity, unsigned symbol_bits, Bytes domain_tag) {
  if (lambda != 128 && lambda != 256) throw InvalidParameter("lambda must be 128 or 256");
  if (capacity == 0) throw InvalidParameter("capacity must be at least 1");
  if (capacity > (uint64_t{1} << 40)) throw InvalidParameter("capacity too large");
  if (symbol_bits == 0 || symbol_bits > 64) throw InvalidParameter("symbol width must be 1..64 bits");
  if (domain_tag.size() > UINT16_MAX) throw InvalidParameter("domain tag too long");
  VcParams p;
  p.lambda = static_cast<uint16_t>(lambda);
  p.capacity = capacity;
  p.symbol_bits = static_cast<uint8_t>(symbol_bits);
  p.domain_tag = std::move(domain_tag);
  return p;
}

Digest LeafHash(const VcParams& params, uint64_t position, Symbol symbol) {
  Bytes pos;
  PutU64(pos, position);
  const uint8_t marker = kLeafMarker;
  return Sha256({params.domain_tag, ByteSpan(&marker, 1), pos, SymbolBytes(params, symbol)});
}

Digest PaddingLeafHash(const VcParams& params, uint64_t position) {
  Bytes pos;
  PutU64(pos, position);
  const uint8_t marker = kPaddingMarker;
  return Sha256({params.domain_tag, ByteSpan(&marker, 1), pos, Bytes(params.symbol_bytes(), 0)});
}

Digest NodeHash(const VcParams& params, const Digest& left, const Digest& right) {
  const uint8_t marker = kNodeMarker;
  return Sha256({params.domain_tag, ByteSpan(&marker, 1), left, right});
}

std::pair<Commitment, CommitAux> Commit(const VcParams& params, std::span<const Symbol> message) {
  if (message.size() > params.capacity) throw InvalidMessage("message longer than capacity");
  const Symbol max = params.max_symbol();
  for (Symbol s : message) {
    if (s > max) throw InvalidMessage("symbol out of alphabet range");
  }
  CommitAux aux;
  aux.message.assign(message.begin(), message.end());
  const uint64_t width = params.width();
  std::vector<Digest> leaves(width);
  for (uint64_t j = 0; j < width; ++j) {
    leaves[j] = j < message.size() ? LeafHash(params, j + 1, message[j]) : PaddingLeafHash(params, j + 1);
  }
  aux.layers.push_back(std::move(leaves));
  while (aux.layers.back().size() > 1) {
    const auto& below = aux.layers.back();
    std::vector<Digest> above(below.size() / 2);
    for (size_t j = 0; j < above.size(); ++j) above[j] = NodeHash(params, below[2 * j], below[2 * j + 1]);
    aux.layers.push_back(std::move(above));
  }
  Commitment cm{aux.layers.back()[0], message.size()};
  return {cm, std::move(aux)};
}

bool IsValidQuerySet(const VcParams& params, std::span<const uint64_t> positions) {
  if (positions.empty()) return false;
  for (size_t i = 0; i < positions.size(); ++i) {
    if (positions[i] < 1 || positions[i] > params.capacity) return false;
    if (i > 0 && positions[i] <= positions[i - 1]) return false;
  }
  return true;
}

size_t ProofLength(const VcParams& params, std::span<const uint64_t> positions) {
  if (!IsValidQuerySet(params, positions)) throw InvalidQuery("invalid query set");
  size_t count = 0;
  std::vector<uint64_t> known = LeafIndices(positions);
  for (unsigned level = 0; level < params.depth(); ++level) {
    known = WalkLevel(known, [&](uint64_t) { ++count; });
  }
  return count;
}

Opening Open(const VcParams& params, const CommitAux& aux, std::span<const uint64_t> positions) {
  if (!IsValidQuerySet(params, positions)) throw InvalidQuery("query set must be nonempty, increasing, in [1, c]");
  if (aux.layers.size() != params.depth() + 1 || aux.layers[0].size() != params.width()) {
    throw InvalidParameter("commitment aux does not match params");
  }
  Opening op;
  op.positions.assign(positions.begin(), positions.end());
  for (uint64_t pos : positions) op.answers.push_back(pos <= aux.message.size() ? aux.message[pos - 1] : 0);
  std::vector<uint64_t> known = LeafIndices(positions);
  for (unsigned level = 0; level < params.depth(); ++level) {
    known = WalkLevel(known, [&](uint64_t sib) { op.proof.push_back(aux.layers[level][sib]); });
  }
  return op;
}

bool Check(const VcParams& params, const Commitment& cm, std::span<const uint64_t> positions,
           std::span<const Symbol> answers, std::span<const Digest> proof) {
  if (!IsValidQuerySet(params, positions) || answers.size() != positions.size()) return false;
  if (cm.length > params.capacity) return false;
  const Symbol max = params.max_symbol();
  std::vector<uint64_t> known = LeafIndices(positions);
  std::vector<Digest> digests(known.size());
  for (size_t i = 0; i < positions.size(); ++i) {
    if (answers[i] > max) return false;
    if (positions[i] > cm.length) {
      if (answers[i] != 0) return false;
      digests[i] = PaddingLeafHash(params, positions[i]);
    } else {
      digests[i] = LeafHash(params, positions[i], answers[i]);
    }
  }
  size_t next_proof = 0;
  for (unsigned level = 0; level < params.depth(); ++level) {
    std::vector<Digest> parents;
    parents.reserve(known.size());
    bool short_proof = false;
    size_t i = 0;
    auto parent_idx = WalkLevel(known, [&](uint64_t sib) {
      // Called once per lone node, in order; pair it with its sibling digest.
      while (i < known.size() && (known[i] ^ 1) != sib) {
        parents.push_back(NodeHash(params, digests[i], digests[i + 1]));
        i += 2;
      }
      if (next_proof >= proof.size()) {
        short_proof = true;
        parents.push_back(Digest{});
      } else if (sib & 1) {
        parents.push_back(NodeHash(params, digests[i], proof[next_proof++]));
      } else {
        parents.push_back(NodeHash(params, proof[next_proof++], digests[i]));
      }
      ++i;
    });
    while (i < known.size()) {
      parents.push_back(NodeHash(params, digests[i], digests[i + 1]));
      i += 2;
    }
    if (short_proof) return false;
    known = std::move(parent_idx);
    digests = std::move(parents);
  }
  return next_proof == proof.size() && digests.size() == 1 && digests[0] == cm.root;
}

}  // namespace ibcs::vc
