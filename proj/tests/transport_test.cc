#include <gtest/gtest.h>

#include <algorithm>
#include <thread>

#include "ibcs/error.h"
#include "ibcs/graph_coloring.h"
#include "ibcs/random.h"
#include "ibcs/sumcheck.h"
#include "ibcs/transport.h"

namespace ibcs {
namespace {

using namespace std::chrono_literals;

Digest RandomDigest(RandomStream& rng) {
  Digest d;
  for (auto& b : d) b = static_cast<uint8_t>(rng.NextU64());
  return d;
}

TEST(Frames, HeaderLayout) {
  const Frame f{FrameTag::kChallenge, Bytes{0xAA, 0xBB}};
  EXPECT_EQ(EncodeFrame(f), (Bytes{0, 0, 0, 2, 0x02, 0xAA, 0xBB}));
  EXPECT_EQ(f.WireSize(), 7u);
  const Bytes enc = EncodeFrame(f);
  ByteReader r(enc);
  EXPECT_EQ(DecodeFrame(r), f);
  EXPECT_EQ(FrameTagName(FrameTag::kFinalResponse), "final-response");
  EXPECT_TRUE(IsKnownFrameTag(0x11));
  EXPECT_FALSE(IsKnownFrameTag(0x05));
}

TEST(Frames, DecodeErrorsCarryOffsets) {
  Bytes two = EncodeFrames({Frame{FrameTag::kCommit, Bytes(32, 1)}, Frame{FrameTag::kDecision, Bytes{1}}});
  // Unknown tag in the second frame: header at 37, tag byte at 41.
  Bytes bad_tag = two;
  bad_tag[41] = 0x07;
  try {
    DecodeFrames(bad_tag);
    FAIL();
  } catch (const DecodeError& e) {
    EXPECT_EQ(e.offset(), 41u);
  }
  // Truncated payload of the second frame.
  Bytes cut(two.begin(), two.end() - 1);
  try {
    DecodeFrames(cut);
    FAIL();
  } catch (const DecodeError& e) {
    EXPECT_EQ(e.offset(), 42u);
  }
  // Truncated header.
  Bytes header_cut(two.begin(), two.begin() + 39);
  try {
    DecodeFrames(header_cut);
    FAIL();
  } catch (const DecodeError& e) {
    EXPECT_EQ(e.offset(), 37u);
  }
  Bytes huge{0x10, 0, 0, 0, 0x01};
  try {
    DecodeFrames(huge);
    FAIL();
  } catch (const DecodeError& e) {
    EXPECT_EQ(e.offset(), 0u);
  }
}

TEST(Messages, ChallengeUsesExactlyTheBitLength) {
  const Challenge c8{8, Bytes{0x5A}};
  EXPECT_EQ(EncodeChallengeMessage(c8).size(), 1u);
  EXPECT_EQ(DecodeChallengeMessage(EncodeChallengeMessage(c8), 8), c8);
  const Challenge c66{66, Bytes{1, 2, 3, 4, 5, 6, 7, 8, 0x40}};
  EXPECT_EQ(EncodeChallengeMessage(c66).size(), 9u);
  EXPECT_EQ(DecodeChallengeMessage(EncodeChallengeMessage(c66), 66), c66);
  EXPECT_THROW(DecodeChallengeMessage(Bytes{1, 2, 3, 4, 5, 6, 7, 8, 0x41}, 66), DecodeError);
  EXPECT_THROW(DecodeChallengeMessage(Bytes{1}, 66), DecodeError);
}

TEST(Messages, CommitAndDecision) {
  Digest d{};
  d[3] = 9;
  EXPECT_EQ(DecodeCommitMessage(EncodeCommitMessage(d)), d);
  EXPECT_THROW(DecodeCommitMessage(Bytes(31, 0)), DecodeError);
  EXPECT_TRUE(DecodeDecision(EncodeDecision(true)));
  EXPECT_FALSE(DecodeDecision(EncodeDecision(false)));
  EXPECT_THROW(DecodeDecision(Bytes{2}), DecodeError);
  EXPECT_THROW(DecodeDecision(Bytes{}), DecodeError);
}

TEST(Messages, CommitmentAndOpeningSerializations) {
  const vc::VcParams params = vc::Gen(128, 5, 12);
  const vc::Commitment cm{Digest{}, 5};
  EXPECT_EQ(EncodeCommitment(cm).size(), 40u);
  EXPECT_EQ(DecodeCommitment(EncodeCommitment(cm)), cm);
  // Empty proof: u32 count, positions, 2-byte symbols, u32 proof count.
  const vc::Opening op{{2, 5}, {0xABC, 7}, {}};
  const Bytes enc = EncodeOpening(params, op);
  EXPECT_EQ(enc, (Bytes{0, 0, 0, 2, 0, 0, 0, 2, 0, 0, 0, 5, 0x0A, 0xBC, 0, 7, 0, 0, 0, 0}));
  EXPECT_EQ(DecodeOpening(params, enc), op);
  Bytes trailing = enc;
  trailing.push_back(0);
  EXPECT_THROW(DecodeOpening(params, trailing), DecodeError);
}

TEST(Messages, OpeningFuzzRoundTrip) {
  RandomStream rng(17);
  for (int trial = 0; trial < 20000; ++trial) {
    const unsigned bits = static_cast<unsigned>(rng.Between(1, 64));
    const uint64_t cap = rng.Between(1, 300);
    const vc::VcParams params = vc::Gen(128, cap, bits);
    vc::Opening op;
    for (uint64_t pos = 1; pos <= cap; ++pos)
      if (rng.Below(4) == 0) op.positions.push_back(pos);
    for (size_t i = 0; i < op.positions.size(); ++i)
      op.answers.push_back(bits == 64 ? rng.NextU64() : rng.NextU64() >> (64 - bits));
    const size_t pf = rng.Below(6);
    for (size_t i = 0; i < pf; ++i) op.proof.push_back(RandomDigest(rng));
    ASSERT_EQ(DecodeOpening(params, EncodeOpening(params, op)), op);
  }
}

// Random well-shaped final responses for a spec.
FinalResponse RandomResponse(const ArgParams& pp, RandomStream& rng) {
  FinalResponse resp;
  for (size_t i = 0; i < pp.spec.rounds; ++i) {
    const uint64_t len = pp.spec.proof_lengths[i];
    std::vector<uint64_t> all(len);
    for (uint64_t j = 0; j < len; ++j) all[j] = j + 1;
    for (uint64_t j = 0; j < pp.spec.query_counts[i]; ++j) std::swap(all[j], all[j + rng.Below(len - j)]);
    vc::Opening op;
    op.positions.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(pp.spec.query_counts[i]));
    std::sort(op.positions.begin(), op.positions.end());
    for (size_t j = 0; j < op.positions.size(); ++j) op.answers.push_back(rng.Below(pp.spec.alphabet_size));
    const size_t pf = vc::ProofLength(pp.vc, op.positions);
    for (size_t j = 0; j < pf; ++j) op.proof.push_back(RandomDigest(rng));
    resp.push_back(std::move(op));
  }
  return resp;
}

TEST(FinalResponse, FuzzRoundTripAndExactBitCount) {
  RandomStream rng(23);
  for (int trial = 0; trial < 100000; ++trial) {
    IopSpec spec;
    spec.rounds = rng.Between(1, 4);
    spec.alphabet_size = rng.Between(2, 1000);
    spec.symbol_bits = CeilLog2(spec.alphabet_size);
    for (size_t i = 0; i < spec.rounds; ++i) {
      spec.proof_lengths.push_back(rng.Between(1, 40));
      spec.query_counts.push_back(rng.Between(1, spec.proof_lengths.back()));
      spec.challenge_bits.push_back(8);
    }
    const ArgParams pp = ArgSetup(128, 1, spec);
    const FinalResponse resp = RandomResponse(pp, rng);
    const EncodedResponse enc = EncodeFinalResponse(pp, resp);
    uint64_t expect = 0;
    for (size_t i = 0; i < spec.rounds; ++i)
      expect += spec.query_counts[i] * (CeilLog2(spec.proof_lengths[i]) + spec.symbol_bits) +
                256 * resp[i].proof.size();
    ASSERT_EQ(enc.content_bits, expect);
    ASSERT_EQ(enc.payload.size(), (expect + 7) / 8);
    ASSERT_EQ(DecodeFinalResponse(pp, enc.payload), resp);
  }
}

TEST(FinalResponse, RejectsMalformed) {
  const GraphColoringPcp pcp(PetersenGraph());
  const ArgParams pp = ArgSetup(128, 1, pcp.spec());
  RandomStream rng(2);
  const FinalResponse good = RandomResponse(pp, rng);
  const Bytes payload = EncodeFinalResponse(pp, good).payload;
  Bytes longer = payload;
  longer.push_back(0);
  EXPECT_THROW(DecodeFinalResponse(pp, longer), DecodeError);
  Bytes shorter(payload.begin(), payload.end() - 1);
  EXPECT_THROW(DecodeFinalResponse(pp, shorter), DecodeError);
  FinalResponse bad = good;
  bad[0].proof.push_back(Digest{});
  EXPECT_THROW(EncodeFinalResponse(pp, bad), InvalidMessage);
  bad = good;
  bad[0].answers[0] = 4;
  EXPECT_THROW(EncodeFinalResponse(pp, bad), InvalidMessage);
  bad = good;
  bad[0].positions = {bad[0].positions[1], bad[0].positions[0]};
  EXPECT_THROW(EncodeFinalResponse(pp, bad), InvalidMessage);
  EXPECT_THROW(EncodeFinalResponse(pp, FinalResponse{}), InvalidMessage);
}

TEST(FinalResponse, DecodingRejectsUnsortedPositions) {
  // Petersen: positions take 4 bits. Write (3, 1) by hand.
  const GraphColoringPcp pcp(PetersenGraph());
  const ArgParams pp = ArgSetup(128, 1, pcp.spec());
  BitWriter w;
  w.Write(2, 4);
  w.Write(0, 2);
  w.Write(0, 4);
  w.Write(0, 2);
  EXPECT_ANY_THROW(DecodeFinalResponse(pp, w.Finish()));
}

struct Fixture {
  std::shared_ptr<const GraphColoringPcp> iop = std::make_shared<GraphColoringPcp>(PetersenGraph());
  ArgParams pp = ArgSetup(128, 1000, iop->spec());
  std::unique_ptr<HonestArgProver> Prover() const { return MakeHonestProver(pp, iop, *FindColoring(iop->instance())); }
};

TEST(Sessions, MemorySessionAcceptsAndFramesAreOrdered) {
  Fixture fx;
  auto p = fx.Prover();
  const LocalSession s = RunMemorySession(fx.pp, fx.iop, *p, 5);
  ASSERT_TRUE(s.verifier.accept) << s.verifier.diagnostic;
  EXPECT_TRUE(s.prover.accept);
  std::vector<FrameTag> tags;
  for (const Frame& f : s.verifier.frames) tags.push_back(f.tag);
  EXPECT_EQ(tags, (std::vector<FrameTag>{FrameTag::kParams, FrameTag::kInstance, FrameTag::kCommit,
                                         FrameTag::kChallenge, FrameTag::kFinalResponse, FrameTag::kDecision}));
  EXPECT_EQ(s.verifier.frames, s.prover.frames);
  EXPECT_EQ(s.verifier.transcript, s.prover.transcript);
  EXPECT_EQ(s.verifier.bytes_received, s.prover.bytes_sent);
  EXPECT_EQ(s.verifier.bytes_sent, s.prover.bytes_received);
}

TEST(Sessions, MeasuredBitsEqualFormula) {
  for (int which = 0; which < 2; ++which) {
    std::shared_ptr<const Iop> iop;
    if (which == 0) {
      iop = std::make_shared<GraphColoringPcp>(PetersenGraph());
    } else {
      iop = std::make_shared<SumcheckIop>(SumcheckInstance::Make(17, 3, 2, std::vector<uint64_t>(27, 3), 3 * 64 % 17));
    }
    const ArgParams pp = ArgSetup(128, 1000, iop->spec());
    for (uint64_t seed = 0; seed < 20; ++seed) {
      const Witness w = which == 0 ? *FindColoring(static_cast<const GraphColoringPcp&>(*iop).instance()) : Witness{};
      auto p = MakeHonestProver(pp, iop, w);
      const LocalSession s = RunMemorySession(pp, iop, *p, seed);
      ASSERT_TRUE(s.verifier.accept);
      const CommStats f = ComputeCommStats(pp, s.verifier.transcript);
      for (const WireStats& m : {s.verifier.wire, s.prover.wire}) {
        EXPECT_EQ(m.commitment_bits, f.commitment_bits);
        EXPECT_EQ(m.answer_bits, f.answer_bits);
        EXPECT_EQ(m.proof_bits, f.proof_bits);
        EXPECT_EQ(m.challenge_bits, f.challenge_bits);
        EXPECT_EQ(m.prover_to_verifier_bits, f.prover_to_verifier_bits);
        EXPECT_EQ(m.verifier_to_prover_bits, f.verifier_to_prover_bits);
        EXPECT_EQ(m.protocol_frames, 2 * pp.spec.rounds + 1);
        // Bytes on the wire reconcile with content, padding and headers.
        EXPECT_EQ(8 * m.prover_protocol_bytes,
                  m.prover_to_verifier_bits + m.prover_padding_bits + 8 * kFrameHeaderSize * (pp.spec.rounds + 1));
        EXPECT_EQ(8 * m.verifier_protocol_bytes,
                  m.verifier_to_prover_bits + m.verifier_padding_bits + 8 * kFrameHeaderSize * pp.spec.rounds);
      }
      // Protocol frames plus setup frames plus decision are all the traffic.
      const uint64_t setup = 2 * kFrameHeaderSize + pp.Serialize().size() + iop->EncodeInstance().size();
      EXPECT_EQ(s.prover.bytes_sent, setup + s.prover.wire.prover_protocol_bytes);
      EXPECT_EQ(s.prover.bytes_received, s.prover.wire.verifier_protocol_bytes + kFrameHeaderSize + 1);
      EXPECT_EQ(f.generator_bits, 8 * pp.Serialize().size());
    }
  }
}

TEST(Sessions, TcpAndMemoryTranscriptsAreIdentical) {
  Fixture fx;
  for (uint64_t seed = 0; seed < 5; ++seed) {
    auto a = fx.Prover();
    auto b = fx.Prover();
    const LocalSession m = RunMemorySession(fx.pp, fx.iop, *a, seed);
    const LocalSession t = RunLoopbackTcpSession(fx.pp, fx.iop, *b, seed);
    ASSERT_TRUE(m.verifier.accept);
    ASSERT_TRUE(t.verifier.accept) << t.verifier.diagnostic;
    EXPECT_EQ(m.verifier.TranscriptBytes(), t.verifier.TranscriptBytes());
    EXPECT_EQ(m.verifier.TranscriptBytes(), t.prover.TranscriptBytes());
  }
}

TEST(Sessions, ExplicitTcpEndpoints) {
  Fixture fx;
  TcpListener listener("127.0.0.1", 0);
  ASSERT_NE(listener.port(), 0);
  SessionResult prover_side;
  std::thread t([&] {
    auto ch = TcpConnect("127.0.0.1", listener.port());
    auto p = fx.Prover();
    prover_side = RunProverSession(*ch, fx.pp, *fx.iop, *p);
  });
  auto ch = listener.Accept();
  const SessionResult v = RunVerifierSession(*ch, fx.pp, fx.iop, 8);
  t.join();
  EXPECT_TRUE(v.accept);
  EXPECT_TRUE(prover_side.accept);
  EXPECT_EQ(ParseEndpoint("127.0.0.1:9000"), (std::pair<std::string, uint16_t>{"127.0.0.1", 9000}));
  EXPECT_THROW(ParseEndpoint("localhost"), InvalidParameter);
  EXPECT_THROW(ParseEndpoint("h:70000"), InvalidParameter);
}

// Sends a fixed frame script from the prover side, draining replies.
SessionResult RunScripted(const Fixture& fx, const std::vector<Frame>& script, uint64_t seed = 1) {
  auto [pe, ve] = MakeMemoryChannelPair(2000ms);
  std::thread t([&, ch = pe.get()] {
    try {
      for (const Frame& f : script) ch->Send(f);
      for (;;) ch->Receive();
    } catch (const std::exception&) {
    }
  });
  SessionResult r = RunVerifierSession(*ve, fx.pp, fx.iop, seed);
  ve->Close();
  pe->Close();
  t.join();
  return r;
}

TEST(Sessions, OutOfOrderFramesAbort) {
  Fixture fx;
  auto p = fx.Prover();
  const LocalSession honest = RunMemorySession(fx.pp, fx.iop, *p, 1);
  std::vector<Frame> from_prover;
  for (const Frame& f : honest.verifier.frames)
    if (f.tag != FrameTag::kChallenge && f.tag != FrameTag::kDecision) from_prover.push_back(f);
  ASSERT_EQ(from_prover.size(), 4u);
  EXPECT_TRUE(RunScripted(fx, from_prover).accept);

  // Every non-identity permutation of the prover's frames is rejected.
  std::vector<size_t> order{0, 1, 2, 3};
  int permutations = 0;
  while (std::next_permutation(order.begin(), order.end())) {
    std::vector<Frame> script;
    for (size_t i : order) script.push_back(from_prover[i]);
    const SessionResult r = RunScripted(fx, script);
    EXPECT_FALSE(r.accept);
    EXPECT_TRUE(r.aborted);
    ++permutations;
  }
  EXPECT_EQ(permutations, 23);

  // Duplicated commitment, a challenge from the prover, a missing frame.
  auto dup = from_prover;
  dup.insert(dup.begin() + 3, from_prover[2]);
  EXPECT_TRUE(RunScripted(fx, dup).aborted);
  auto forged = from_prover;
  forged.insert(forged.begin() + 3, Frame{FrameTag::kChallenge, Bytes(9, 0)});
  EXPECT_TRUE(RunScripted(fx, forged).aborted);
  auto missing = from_prover;
  missing.erase(missing.begin() + 2);
  EXPECT_TRUE(RunScripted(fx, missing).aborted);
  auto wrong_params = from_prover;
  wrong_params[0].payload.back() ^= 1;
  EXPECT_TRUE(RunScripted(fx, wrong_params).aborted);
}

TEST(Sessions, ProverAbortEndsTheSession) {
  Fixture fx;
  class Quitter final : public ArgumentProver {
   public:
    Digest Commit(const Challenge*) override { return Digest{}; }
    std::optional<FinalResponse> Respond(const Challenge&) override { return std::nullopt; }
    std::unique_ptr<ArgumentProver> Clone() const override { return std::make_unique<Quitter>(); }
    Bytes SerializeState() const override { return {}; }
  } quitter;
  const LocalSession s = RunMemorySession(fx.pp, fx.iop, quitter, 3);
  EXPECT_FALSE(s.verifier.accept);
  EXPECT_TRUE(s.verifier.aborted);
  EXPECT_TRUE(s.prover.aborted);
}

TEST(Replay, AcceptsRecordedSessionsAndRejectsCorruption) {
  Fixture fx;
  auto p = fx.Prover();
  const LocalSession s = RunMemorySession(fx.pp, fx.iop, *p, 12);
  const Bytes data = s.verifier.TranscriptBytes();
  const ReplayResult ok = VerifyTranscriptBytes(data);
  ASSERT_TRUE(ok.accept) << ok.diagnostic;
  EXPECT_EQ(ok.transcript, s.verifier.transcript);
  EXPECT_EQ(ok.params->vc, fx.pp.vc);

  // A flip inside the instance payload can yield a different valid instance
  // on which the same messages verify; every other byte must be caught.
  const size_t inst_begin = s.verifier.frames[0].WireSize() + kFrameHeaderSize;
  const size_t inst_end = inst_begin + s.verifier.frames[1].payload.size();
  for (size_t i = 0; i < data.size(); ++i) {
    Bytes bad = data;
    bad[i] ^= 0x01;
    const ReplayResult r = VerifyTranscriptBytes(bad);
    if (i >= inst_begin && i < inst_end) {
      if (r.accept) EXPECT_NE(r.transcript.instance, s.verifier.transcript.instance);
    } else {
      EXPECT_FALSE(r.accept) << "flip at " << i;
    }
  }
  Bytes cut(data.begin(), data.end() - 1);
  EXPECT_FALSE(VerifyTranscriptBytes(cut).accept);
  EXPECT_FALSE(VerifyTranscriptBytes(Bytes{}).accept);
}

}  // namespace
}  // namespace ibcs
