#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ibcs {

using Bytes = std::vector<uint8_t>;
using ByteSpan = std::span<const uint8_t>;

void PutU8(Bytes& out, uint8_t v);
void PutU16(Bytes& out, uint16_t v);
void PutU32(Bytes& out, uint32_t v);
void PutU64(Bytes& out, uint64_t v);
void PutBytes(Bytes& out, ByteSpan data);
// Writes the low `width` bytes of v, big-endian.
void PutUintBE(Bytes& out, uint64_t v, size_t width);

std::string ToHex(ByteSpan data);
Bytes FromHex(std::string_view hex);

// Number of bits needed to write any value in [0, n). Zero for n <= 1.
unsigned CeilLog2(uint64_t n);

// Bounds-checked big-endian reader; failures raise DecodeError with the offset.
class ByteReader {
 public:
  explicit ByteReader(ByteSpan data) : data_(data) {}

  uint8_t U8();
  uint16_t U16();
  uint32_t U32();
  uint64_t U64();
  uint64_t UintBE(size_t width);
  ByteSpan Take(size_t n);

  size_t offset() const { return pos_; }
  size_t remaining() const { return data_.size() - pos_; }
  bool done() const { return pos_ == data_.size(); }
  // Throws DecodeError if unread bytes are left.
  void ExpectEnd() const;

 private:
  void Need(size_t n) const;

  ByteSpan data_;
  size_t pos_ = 0;
};

// MSB-first bit packing. bit_count() counts only the bits written, not the
// zero padding that Finish() adds to reach a byte boundary.
class BitWriter {
 public:
  void Write(uint64_t value, unsigned bits);
  void WriteBytes(ByteSpan data);

  size_t bit_count() const { return bit_count_; }
  Bytes Finish() const { return out_; }

 private:
  Bytes out_;
  size_t bit_count_ = 0;
};

class BitReader {
 public:
  explicit BitReader(ByteSpan data) : data_(data) {}

  uint64_t Read(unsigned bits);
  Bytes ReadBytes(size_t n);

  size_t bit_offset() const { return bit_pos_; }
  // Rejects unread whole bytes and nonzero padding bits.
  void ExpectEnd() const;

 private:
  ByteSpan data_;
  size_t bit_pos_ = 0;
};

}  // namespace ibcs
