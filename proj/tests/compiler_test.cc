#include <gtest/gtest.h>

#include <set>

#include "ibcs/compiler.h"
#include "ibcs/error.h"
#include "ibcs/graph_coloring.h"
#include "ibcs/sumcheck.h"

namespace ibcs {
namespace {

std::shared_ptr<const Iop> K3() { return std::make_shared<GraphColoringPcp>(CompleteGraph(3)); }

// Two rounds, lengths 2 and 4. Round 1 queries position 3 (a padding slot)
// when the first challenge bit is set.
class PaddingQueryIop final : public Iop {
 public:
  PaddingQueryIop() {
    spec_.relation = "padding-probe";
    spec_.rounds = 2;
    spec_.alphabet_size = 2;
    spec_.symbol_bits = 1;
    spec_.proof_lengths = {2, 4};
    spec_.challenge_bits = {1, 1};
    spec_.query_counts = {1, 1};
  }
  const IopSpec& spec() const override { return spec_; }
  std::string name() const override { return "padding-probe"; }
  QueryPlan Query(std::span<const Challenge> r) const override {
    CheckRandomnessShape(spec_, r);
    return QueryPlan{{PositionSet{ChallengeElement(r[0], 2) ? 3u : 1u}, PositionSet{4}}};
  }
  bool Decide(std::span<const Challenge>, const Answers&) const override { return true; }
  uint64_t ChallengeSpaceSize(size_t) const override { return 2; }
  bool InLanguage() const override { return true; }
  bool CheckWitness(const Witness&) const override { return true; }
  Witness ExtractWitness(const ProofString&) const override { return {}; }
  std::unique_ptr<IopProver> HonestProver(const Witness&) const override {
    return std::make_unique<ZeroProver>();
  }
  Bytes EncodeInstance() const override { return Bytes{0xEE}; }

 private:
  class ZeroProver final : public IopProver {
   public:
    ProofString Start() override { return ProofString{1, {0, 0}}; }
    ProofString Next(const Challenge&) override { return ProofString{2, {0, 0, 0, 0}}; }
    std::unique_ptr<IopProver> Clone() const override { return std::make_unique<ZeroProver>(*this); }
    Bytes SerializeState() const override { return {}; }
  };
  IopSpec spec_;
};

TEST(ArgSetup, ParamsFollowTheSpec) {
  const auto iop = std::make_shared<SumcheckIop>(SumcheckInstance::Make(17, 3, 2, std::vector<uint64_t>(27, 0), 0));
  const ArgParams pp = ArgSetup(128, 1000, iop->spec());
  EXPECT_EQ(pp.vc.capacity, 3u);
  EXPECT_EQ(pp.vc.symbol_bits, 5u);
  EXPECT_EQ(pp.vc.width(), 4u);
  EXPECT_EQ(pp.Serialize(), pp.vc.Serialize());
  EXPECT_THROW(ArgSetup(128, 0, iop->spec()), InvalidParameter);
  EXPECT_THROW(ArgSetup(100, 10, iop->spec()), InvalidParameter);
  IopSpec bad = iop->spec();
  bad.query_counts.pop_back();
  EXPECT_THROW(ArgSetup(128, 10, bad), InvalidParameter);
}

TEST(PadProof, PadsShortRoundsWithZero) {
  PaddingQueryIop iop;
  const ArgParams pp = ArgSetup(128, 1, iop.spec());
  EXPECT_EQ(PadProof(pp, ProofString{1, {1, 1}}), (std::vector<Symbol>{1, 1, 0, 0}));
  EXPECT_EQ(PadProof(pp, ProofString{2, {1, 0, 1, 1}}), (std::vector<Symbol>{1, 0, 1, 1}));
  EXPECT_THROW(PadProof(pp, ProofString{1, {1}}), ProtocolViolation);
  EXPECT_THROW(PadProof(pp, ProofString{3, {1, 1}}), ProtocolViolation);
}

TEST(RunArgument, HonestAcceptsWithExpectedShape) {
  const auto iop = K3();
  const ArgParams pp = ArgSetup(128, 1000, iop->spec());
  for (uint64_t seed = 0; seed < 100; ++seed) {
    auto p = MakeHonestProver(pp, iop, {0, 1, 2});
    Transcript t;
    ASSERT_TRUE(RunArgument(pp, iop, *p, seed, &t)) << seed;
    EXPECT_EQ(t.commitments.size(), 1u);
    EXPECT_EQ(t.MessageCount(), 3u);
    EXPECT_EQ(t.instance, iop->EncodeInstance());
    std::string why;
    EXPECT_TRUE(ArgVerify(pp, *iop, t, &why)) << why;
  }
  const auto sc = std::make_shared<SumcheckIop>(SumcheckInstance::Make(5, 2, 1, {0, 0, 0, 1}, 1));
  const ArgParams spp = ArgSetup(256, 1000, sc->spec());
  auto p = MakeHonestProver(spp, sc, {});
  Transcript t;
  EXPECT_TRUE(RunArgument(spp, sc, *p, 4, &t));
  EXPECT_EQ(t.MessageCount(), 5u);
}

TEST(RunArgument, CommitmentMatchesPaddedProofString) {
  const auto sc = std::make_shared<SumcheckIop>(SumcheckInstance::Make(5, 2, 1, {0, 0, 0, 1}, 1));
  const ArgParams pp = ArgSetup(128, 1000, sc->spec());
  auto p = MakeHonestProver(pp, sc, {});
  Transcript t;
  ASSERT_TRUE(RunArgument(pp, sc, *p, 9, &t));
  EXPECT_EQ(p->committed(1), (std::vector<Symbol>{0, 1}));
  EXPECT_EQ(t.commitments[0], vc::Commit(pp.vc, std::vector<Symbol>{0, 1}).first.root);
}

TEST(ArgVerify, RejectsEveryTamperedField) {
  const auto iop = K3();
  const ArgParams pp = ArgSetup(128, 1000, iop->spec());
  auto p = MakeHonestProver(pp, iop, {0, 1, 2});
  Transcript t;
  ASSERT_TRUE(RunArgument(pp, iop, *p, 11, &t));
  auto rejects = [&](auto mutate) {
    Transcript x = t;
    mutate(x);
    return !ArgVerify(pp, *iop, x);
  };
  EXPECT_TRUE(rejects([](Transcript& x) { x.commitments[0][0] ^= 1; }));
  EXPECT_TRUE(rejects([](Transcript& x) { x.response[0].answers[0] = (x.response[0].answers[0] + 1) % 3; }));
  EXPECT_TRUE(rejects([](Transcript& x) { x.response[0].proof[0][31] ^= 0x80; }));
  EXPECT_TRUE(rejects([](Transcript& x) { x.response[0].proof.pop_back(); }));
  EXPECT_TRUE(rejects([](Transcript& x) { x.response[0].positions = {1, 3}; }));
  EXPECT_TRUE(rejects([](Transcript& x) { x.response.clear(); }));
  EXPECT_TRUE(rejects([](Transcript& x) { x.challenges[0].bits += 1; }));
  EXPECT_TRUE(rejects([](Transcript& x) { x.commitments.push_back(x.commitments[0]); }));
  // A different edge moves Q off the opened positions.
  EXPECT_TRUE(rejects([&](Transcript& x) {
    const uint64_t e = ChallengeElement(x.challenges[0], 3);
    x.challenges[0] = iop->ChallengeForElement(1, (e + 1) % 3);
  }));
}

TEST(ArgVerify, RejectsMismatchedParams) {
  const auto iop = K3();
  const ArgParams pp = ArgSetup(128, 1000, iop->spec());
  auto p = MakeHonestProver(pp, iop, {0, 1, 2});
  Transcript t;
  ASSERT_TRUE(RunArgument(pp, iop, *p, 1, &t));
  ArgParams other = pp;
  other.vc.capacity = 4;
  EXPECT_FALSE(ArgVerify(other, *iop, t));
}

TEST(ArgVerify, RejectsPaddingPositionsEvenWhenTheyOpen) {
  const auto iop = std::make_shared<PaddingQueryIop>();
  const ArgParams pp = ArgSetup(128, 1, iop->spec());
  size_t padded = 0;
  for (uint64_t seed = 0; seed < 64; ++seed) {
    auto p = MakeHonestProver(pp, iop, {});
    Transcript t;
    const bool accept = RunArgument(pp, iop, *p, seed, &t);
    const bool probes_padding = ChallengeElement(t.challenges[0], 2) == 1;
    padded += probes_padding;
    if (probes_padding) {
      // The opening itself is sound: padding slots open to the zero symbol.
      EXPECT_TRUE(vc::Check(pp.vc, vc::Commitment{t.commitments[0], pp.vc.capacity}, t.response[0]));
      std::string why;
      EXPECT_FALSE(ArgVerify(pp, *iop, t, &why));
      EXPECT_NE(why.find("padding"), std::string::npos);
    }
    EXPECT_EQ(accept, !probes_padding);
  }
  EXPECT_GT(padded, 0u);
  EXPECT_LT(padded, 64u);
}

TEST(ArgVerifier, ChallengesDependOnlyOnTheSeed) {
  const auto iop = std::make_shared<GraphColoringPcp>(PetersenGraph());
  const ArgParams pp = ArgSetup(128, 1000, iop->spec());
  const Witness good = *FindColoring(iop->instance());
  Witness other = good;
  std::swap(other[0], other[1]);
  for (uint64_t seed = 0; seed < 20; ++seed) {
    auto a = MakeHonestProver(pp, iop, good);
    auto b = MakeHonestProver(pp, iop, other);
    Transcript ta, tb;
    RunArgument(pp, iop, *a, seed, &ta);
    RunArgument(pp, iop, *b, seed, &tb);
    EXPECT_NE(ta.commitments, tb.commitments);
    EXPECT_EQ(ta.challenges, tb.challenges);
    // The session stream is the challenge source.
    RandomStream rng(seed);
    EXPECT_EQ(ta.challenges[0].data, rng.Bits(iop->spec().challenge_bits[0]));
  }
}

TEST(ArgVerifier, StateMachineRejectsOutOfOrderCalls) {
  const auto iop = K3();
  const ArgParams pp = ArgSetup(128, 1000, iop->spec());
  ArgVerifier v(pp, iop, 3);
  EXPECT_THROW(v.NextChallenge(), ProtocolViolation);
  EXPECT_THROW(v.OnResponse({}), ProtocolViolation);
  v.OnCommitment(Digest{});
  EXPECT_THROW(v.OnCommitment(Digest{}), ProtocolViolation);
  v.NextChallenge();
  EXPECT_EQ(v.state(), ArgVerifier::State::kAwaitResponse);
  EXPECT_FALSE(v.OnResponse({}));
  EXPECT_EQ(v.state(), ArgVerifier::State::kDone);
}

TEST(HonestArgProver, RejectsOutOfOrderUse) {
  const auto iop = K3();
  const ArgParams pp = ArgSetup(128, 1000, iop->spec());
  auto p = MakeHonestProver(pp, iop, {0, 1, 2});
  const Challenge c = iop->ChallengeForElement(1, 0);
  EXPECT_THROW(p->Commit(&c), ProtocolViolation);
  EXPECT_THROW(p->Respond(c), ProtocolViolation);
  p->Commit(nullptr);
  EXPECT_THROW(p->Commit(nullptr), ProtocolViolation);
  EXPECT_TRUE(p->Respond(c).has_value());
  EXPECT_THROW(p->Respond(c), ProtocolViolation);
}

TEST(HonestArgProver, CloneIsAnIndependentSnapshot) {
  const auto sc = std::make_shared<SumcheckIop>(SumcheckInstance::Make(5, 2, 1, {0, 0, 0, 1}, 1));
  const ArgParams pp = ArgSetup(128, 1000, sc->spec());
  auto p = MakeHonestProver(pp, sc, {});
  p->Commit(nullptr);
  const Bytes before = p->SerializeState();
  auto snap = p->Clone();
  const Challenge r1 = sc->ChallengeForElement(1, 3);
  const Digest d1 = p->Commit(&r1);
  EXPECT_NE(p->SerializeState(), before);
  EXPECT_EQ(snap->SerializeState(), before);
  EXPECT_EQ(snap->Commit(&r1), d1);
  EXPECT_EQ(snap->SerializeState(), p->SerializeState());
}

// Canonical multi-proof size by walking the tree: a sibling is sent iff it
// is not itself derivable from the opened leaves.
size_t RefProofLength(uint64_t width, const PositionSet& q) {
  std::set<uint64_t> known;
  for (uint64_t pos : q) known.insert(pos - 1);
  size_t n = 0;
  for (uint64_t w = width; w > 1; w /= 2) {
    std::set<uint64_t> up;
    for (uint64_t i : known) {
      if (!known.count(i ^ 1)) ++n;
      up.insert(i / 2);
    }
    known = std::move(up);
  }
  return n;
}

TEST(CommStats, MatchesHandCount) {
  const auto iop = K3();
  const ArgParams pp = ArgSetup(128, 1000, iop->spec());
  // Default parameters serialize to 25 bytes: version, lambda, capacity,
  // symbol width, hash id, tag length, 10-byte tag.
  EXPECT_EQ(pp.Serialize().size(), 25u);
  for (uint64_t edge = 0; edge < 3; ++edge) {
    auto p = MakeHonestProver(pp, iop, {0, 1, 2});
    p->Commit(nullptr);
    Transcript t;
    t.commitments = {Digest{}};
    t.challenges = {iop->ChallengeForElement(1, edge)};
    t.response = *p->Respond(t.challenges[0]);
    const CommStats s = ComputeCommStats(pp, t);
    // Edge (0,1) shares a parent: one sibling. Other edges: two.
    const uint64_t digests = edge == 0 ? 1 : 2;
    EXPECT_EQ(digests, RefProofLength(4, t.response[0].positions));
    EXPECT_EQ(s.rounds, 2u);
    EXPECT_EQ(s.messages, 3u);
    EXPECT_EQ(s.answer_bits, std::vector<uint64_t>{2 * (2 + 2)});
    EXPECT_EQ(s.proof_bits, std::vector<uint64_t>{256 * digests});
    EXPECT_EQ(s.prover_to_verifier_bits, 256 + 8 + 256 * digests);
    EXPECT_EQ(s.verifier_to_prover_bits, 2u + 64u);
    EXPECT_EQ(s.generator_bits, 200u);
  }
}

TEST(CommStats, SumcheckAndPetersen) {
  // Sum over the cube of X^a Y^b Z^c is 2 or 1 per variable: (2+1+1)^3 = 64.
  const auto sc = std::make_shared<SumcheckIop>(SumcheckInstance::Make(17, 3, 2, std::vector<uint64_t>(27, 3), 3 * 64 % 17));
  const ArgParams pp = ArgSetup(128, 1000, sc->spec());
  auto p = MakeHonestProver(pp, sc, {});
  Transcript t;
  ASSERT_TRUE(RunArgument(pp, sc, *p, 2, &t));
  const CommStats s = ComputeCommStats(pp, t);
  // Every round opens all three coefficients of a width-4 tree: one sibling.
  EXPECT_EQ(s.rounds, 4u);
  EXPECT_EQ(s.messages, 7u);
  EXPECT_EQ(s.prover_to_verifier_bits, 3 * (256 + 3 * (2 + 5) + 256));
  EXPECT_EQ(s.verifier_to_prover_bits, 3u * (5 + 64));

  const auto pet = std::make_shared<GraphColoringPcp>(PetersenGraph());
  const ArgParams ppp = ArgSetup(128, 1000, pet->spec());
  for (uint64_t seed = 0; seed < 30; ++seed) {
    auto hp = MakeHonestProver(ppp, pet, *FindColoring(pet->instance()));
    Transcript pt;
    ASSERT_TRUE(RunArgument(ppp, pet, *hp, seed, &pt));
    const CommStats ps = ComputeCommStats(ppp, pt);
    const size_t pf = RefProofLength(16, pt.response[0].positions);
    EXPECT_EQ(ps.prover_to_verifier_bits, 256 + 2 * (4 + 2) + 256 * pf);
    EXPECT_EQ(ps.verifier_to_prover_bits, 4u + 64u);
  }
}

}  // namespace
}  // namespace ibcs
