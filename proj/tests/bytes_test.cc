#include <gtest/gtest.h>

#include <cmath>

#include "ibcs/bytes.h"
#include "ibcs/error.h"
#include "ibcs/hash.h"
#include "ibcs/random.h"

namespace ibcs {
namespace {

TEST(Bytes, BigEndianWriters) {
  Bytes b;
  PutU16(b, 0x0102);
  PutU32(b, 0x03040506);
  PutU64(b, 0x0708090a0b0c0d0eULL);
  PutUintBE(b, 0xabcdef, 2);
  EXPECT_EQ(ToHex(b), "0102030405060708090a0b0c0d0ecdef");
  ByteReader r(b);
  EXPECT_EQ(r.U16(), 0x0102);
  EXPECT_EQ(r.U32(), 0x03040506u);
  EXPECT_EQ(r.U64(), 0x0708090a0b0c0d0eULL);
  EXPECT_EQ(r.UintBE(2), 0xcdefu);
  EXPECT_TRUE(r.done());
}

TEST(Bytes, ReaderReportsOffset) {
  const Bytes b{1, 2, 3};
  ByteReader r(b);
  r.U8();
  try {
    r.U32();
    FAIL();
  } catch (const DecodeError& e) {
    EXPECT_EQ(e.offset(), 1u);
  }
  ByteReader r2(b);
  r2.U16();
  EXPECT_THROW(r2.ExpectEnd(), DecodeError);
}

TEST(Bytes, HexRoundTrip) {
  const Bytes b{0x00, 0x7f, 0x80, 0xff};
  EXPECT_EQ(FromHex(ToHex(b)), b);
  EXPECT_THROW(FromHex("abc"), std::exception);
}

TEST(Bytes, CeilLog2) {
  EXPECT_EQ(CeilLog2(0), 0u);
  EXPECT_EQ(CeilLog2(1), 0u);
  EXPECT_EQ(CeilLog2(2), 1u);
  EXPECT_EQ(CeilLog2(3), 2u);
  EXPECT_EQ(CeilLog2(4), 2u);
  EXPECT_EQ(CeilLog2(5), 3u);
  EXPECT_EQ(CeilLog2(uint64_t{1} << 40), 40u);
  EXPECT_EQ(CeilLog2((uint64_t{1} << 40) + 1), 41u);
}

TEST(Bits, PackingIsMsbFirst) {
  BitWriter w;
  w.Write(0b101, 3);
  w.Write(0, 0);
  w.Write(0b11, 2);
  EXPECT_EQ(w.bit_count(), 5u);
  EXPECT_EQ(w.Finish(), Bytes{0b10111000});
  const Bytes packed = w.Finish();
  BitReader r(packed);
  EXPECT_EQ(r.Read(3), 0b101u);
  EXPECT_EQ(r.Read(0), 0u);
  EXPECT_EQ(r.Read(2), 0b11u);
  EXPECT_NO_THROW(r.ExpectEnd());
}

TEST(Bits, RandomRoundTrip) {
  RandomStream rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::pair<uint64_t, unsigned>> items;
    BitWriter w;
    for (int j = 0; j < 20; ++j) {
      const unsigned bits = static_cast<unsigned>(rng.Below(65));
      const uint64_t v = bits == 0 ? 0 : (bits == 64 ? rng.NextU64() : rng.NextU64() >> (64 - bits));
      items.emplace_back(v, bits);
      w.Write(v, bits);
    }
    const Bytes packed = w.Finish();
    BitReader r(packed);
    for (auto [v, bits] : items) EXPECT_EQ(r.Read(bits), v);
    EXPECT_NO_THROW(r.ExpectEnd());
  }
}

TEST(Bits, NonzeroPaddingRejected) {
  const Bytes b{0b10000001};
  BitReader r(b);
  r.Read(1);
  EXPECT_THROW(r.ExpectEnd(), DecodeError);
  BitReader r2(b);
  EXPECT_THROW(r2.Read(9), DecodeError);
}

TEST(Hash, KnownSha256) {
  const std::string abc = "abc";
  const Digest d = Sha256(ByteSpan(reinterpret_cast<const uint8_t*>(abc.data()), abc.size()));
  EXPECT_EQ(ToHex(ByteSpan(d.data(), d.size())),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  const Bytes a{'a'}, bc{'b', 'c'};
  EXPECT_EQ(Sha256({ByteSpan(a), ByteSpan(bc)}), d);
}

TEST(Random, DeriveSeedIsStableAndSeparating) {
  EXPECT_EQ(DeriveSeed(1, "session", 0), DeriveSeed(1, "session", 0));
  EXPECT_NE(DeriveSeed(1, "session", 0), DeriveSeed(1, "session", 1));
  EXPECT_NE(DeriveSeed(1, "session", 0), DeriveSeed(2, "session", 0));
  EXPECT_NE(DeriveSeed(1, "session", 0), DeriveSeed(1, "trial", 0));
}

TEST(Random, BitsAreMaskedAndBelowIsInRange) {
  RandomStream rng(9);
  for (int i = 0; i < 1000; ++i) {
    const Bytes b = rng.Bits(13);
    ASSERT_EQ(b.size(), 2u);
    EXPECT_EQ(b[1] & 0x07, 0);
    EXPECT_LT(rng.Below(7), 7u);
    const uint64_t x = rng.Between(3, 5);
    EXPECT_GE(x, 3u);
    EXPECT_LE(x, 5u);
  }
}

TEST(Random, HoeffdingRadius) {
  EXPECT_NEAR(HoeffdingRadius(10000), std::sqrt(std::log(2e6) / 20000.0), 1e-15);
  EXPECT_GT(HoeffdingRadius(100), HoeffdingRadius(1000));
}

}  // namespace
}  // namespace ibcs
