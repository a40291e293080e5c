#include "ibcs/bytes.h"

#include <bit>

#include "ibcs/error.h"

namespace ibcs {

void PutU8(Bytes& out, uint8_t v) { out.push_back(v); }
void PutU16(Bytes& out, uint16_t v) { PutUintBE(out, v, 2); }
void PutU32(Bytes& out, uint32_t v) { PutUintBE(out, v, 4); }
void PutU64(Bytes& out, uint64_t v) { PutUintBE(out, v, 8); }

void PutBytes(Bytes& out, ByteSpan data) { out.insert(out.end(), data.begin(), data.end()); }

void PutUintBE(Bytes& out, uint64_t v, size_t width) {
  for (size_t i = width; i-- > 0;) {
    out.push_back(i < 8 ? static_cast<uint8_t>(v >> (8 * i)) : 0);
  }
}

std::string ToHex(ByteSpan data) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string s;
  s.reserve(2 * data.size());
  for (uint8_t b : data) {
    s.push_back(kDigits[b >> 4]);
    s.push_back(kDigits[b & 0xf]);
  }
  return s;
}

Bytes FromHex(std::string_view hex) {
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
  };
  if (hex.size() % 2 != 0) throw DecodeError("odd-length hex string", hex.size());
  Bytes out(hex.size() / 2);
  for (size_t i = 0; i < out.size(); ++i) {
    int hi = nibble(hex[2 * i]);
    int lo = nibble(hex[2 * i + 1]);
    if (hi < 0 || lo < 0) throw DecodeError("bad hex digit", 2 * i);
    out[i] = static_cast<uint8_t>(hi << 4 | lo);
  }
  return out;
}

unsigned CeilLog2(uint64_t n) {
  if (n <= 1) return 0;
  return static_cast<unsigned>(std::bit_width(n - 1));
}

void ByteReader::Need(size_t n) const {
  if (remaining() < n) throw DecodeError("truncated input", pos_);
}

uint8_t ByteReader::U8() { return static_cast<uint8_t>(UintBE(1)); }
uint16_t ByteReader::U16() { return static_cast<uint16_t>(UintBE(2)); }
uint32_t ByteReader::U32() { return static_cast<uint32_t>(UintBE(4)); }
uint64_t ByteReader::U64() { return UintBE(8); }

uint64_t ByteReader::UintBE(size_t width) {
  Need(width);
  uint64_t v = 0;
  for (size_t i = 0; i < width; ++i) {
    if (i + 8 < width && data_[pos_ + i] != 0) throw DecodeError("integer overflow", pos_ + i);
    v = (v << 8) | data_[pos_ + i];
  }
  pos_ += width;
  return v;
}

ByteSpan ByteReader::Take(size_t n) {
  Need(n);
  ByteSpan s = data_.subspan(pos_, n);
  pos_ += n;
  return s;
}

void ByteReader::ExpectEnd() const {
  if (!done()) throw DecodeError("trailing bytes", pos_);
}

void BitWriter::Write(uint64_t value, unsigned bits) {
  for (unsigned i = bits; i-- > 0;) {
    const size_t byte = bit_count_ / 8;
    if (byte == out_.size()) out_.push_back(0);
    if (i < 64 && ((value >> i) & 1)) out_[byte] |= static_cast<uint8_t>(0x80 >> (bit_count_ % 8));
    ++bit_count_;
  }
}

void BitWriter::WriteBytes(ByteSpan data) {
  if (bit_count_ % 8 == 0) {
    out_.insert(out_.end(), data.begin(), data.end());
    bit_count_ += 8 * data.size();
    return;
  }
  for (uint8_t b : data) Write(b, 8);
}

uint64_t BitReader::Read(unsigned bits) {
  if (bits > 64) throw DecodeError("bit field wider than 64", bit_pos_ / 8);
  if (bit_pos_ + bits > 8 * data_.size()) throw DecodeError("truncated bit field", bit_pos_ / 8);
  uint64_t v = 0;
  for (unsigned i = 0; i < bits; ++i, ++bit_pos_) {
    v = (v << 1) | ((data_[bit_pos_ / 8] >> (7 - bit_pos_ % 8)) & 1);
  }
  return v;
}

Bytes BitReader::ReadBytes(size_t n) {
  Bytes out(n);
  if (bit_pos_ % 8 == 0) {
    if (bit_pos_ / 8 + n > data_.size()) throw DecodeError("truncated byte field", bit_pos_ / 8);
    std::copy_n(data_.begin() + static_cast<std::ptrdiff_t>(bit_pos_ / 8), n, out.begin());
    bit_pos_ += 8 * n;
    return out;
  }
  for (auto& b : out) b = static_cast<uint8_t>(Read(8));
  return out;
}

void BitReader::ExpectEnd() const {
  const size_t used_bytes = (bit_pos_ + 7) / 8;
  if (used_bytes != data_.size()) throw DecodeError("trailing bytes", used_bytes);
  if (bit_pos_ % 8 != 0) {
    const uint8_t mask = static_cast<uint8_t>(0xff >> (bit_pos_ % 8));
    if (data_[bit_pos_ / 8] & mask) throw DecodeError("nonzero padding bits", bit_pos_ / 8);
  }
}

}  // namespace ibcs
