#include "ibcs/compiler.h"

#include <utility>

#include "ibcs/error.h"

namespace ibcs {

ArgParams ArgSetup(unsigned lambda, uint64_t instance_bound, const IopSpec& spec, Bytes domain_tag) {
  if (instance_bound == 0) throw InvalidParameter("instance bound must be positive");
  spec.Validate();
  ArgParams pp;
  pp.vc = vc::Gen(lambda, spec.l_max(), spec.symbol_bits, std::move(domain_tag));
  pp.instance_bound = instance_bound;
  pp.spec = spec;
  return pp;
}

std::vector<Symbol> PadProof(const ArgParams& pp, const ProofString& pi) {
  const IopSpec& spec = pp.spec;
  if (pi.round == 0 || pi.round > spec.rounds) throw ProtocolViolation("proof string for unknown round");
  if (pi.symbols.size() != spec.proof_lengths[pi.round - 1])
    throw ProtocolViolation("proof string of round " + std::to_string(pi.round) + " has wrong length");
  std::vector<Symbol> padded = pi.symbols;
  padded.resize(spec.l_max(), kPaddingSymbol);
  return padded;
}

HonestArgProver::HonestArgProver(const ArgParams& pp, std::shared_ptr<const Iop> iop,
                                 std::unique_ptr<IopProver> prover)
    : pp_(pp), iop_(std::move(iop)), prover_(std::move(prover)) {}

HonestArgProver::HonestArgProver(const HonestArgProver& other)
    : pp_(other.pp_),
      iop_(other.iop_),
      prover_(other.prover_->Clone()),
      aux_(other.aux_),
      challenges_(other.challenges_),
      round_(other.round_),
      responded_(other.responded_) {}

Digest HonestArgProver::Commit(const Challenge* previous) {
  const size_t k = pp_.spec.rounds;
  if (round_ >= k) throw ProtocolViolation("all rounds already committed");
  if ((round_ == 0) != (previous == nullptr)) throw ProtocolViolation("challenge missing or unexpected");
  ProofString pi;
  if (round_ == 0) {
    pi = prover_->Start();
  } else {
    challenges_.push_back(*previous);
    pi = prover_->Next(*previous);
  }
  if (pi.round != round_ + 1) throw ProtocolViolation("IOP prover produced an out-of-order round");
  auto [cm, aux] = vc::Commit(pp_.vc, PadProof(pp_, pi));
  aux_.push_back(std::move(aux));
  ++round_;
  return cm.root;
}

std::optional<FinalResponse> HonestArgProver::Respond(const Challenge& last) {
  if (round_ != pp_.spec.rounds || responded_) throw ProtocolViolation("response out of order");
  responded_ = true;
  challenges_.push_back(last);
  const QueryPlan plan = iop_->Query(challenges_);
  FinalResponse response;
  response.reserve(plan.rounds.size());
  for (size_t i = 0; i < plan.rounds.size(); ++i) response.push_back(vc::Open(pp_.vc, aux_[i], plan.rounds[i]));
  return response;
}

Bytes HonestArgProver::SerializeState() const {
  Bytes out;
  PutU64(out, round_);
  PutU8(out, responded_ ? 1 : 0);
  PutU64(out, challenges_.size());
  for (const Challenge& c : challenges_) {
    PutU64(out, c.bits);
    PutBytes(out, c.data);
  }
  for (const vc::CommitAux& aux : aux_) {
    const Digest& root = aux.layers.back().front();
    PutBytes(out, ByteSpan(root.data(), root.size()));
  }
  const Bytes inner = prover_->SerializeState();
  PutU64(out, inner.size());
  PutBytes(out, inner);
  return out;
}

std::unique_ptr<HonestArgProver> MakeHonestProver(const ArgParams& pp, std::shared_ptr<const Iop> iop,
                                                  const Witness& w) {
  auto inner = iop->HonestProver(w);
  return std::make_unique<HonestArgProver>(pp, std::move(iop), std::move(inner));
}

namespace {

bool Fail(std::string* why, std::string msg) {
  if (why) *why = std::move(msg);
  return false;
}

}  // namespace

bool ArgVerify(const ArgParams& pp, const Iop& iop, const Transcript& t, std::string* why) {
  const IopSpec& spec = pp.spec;
  const size_t k = spec.rounds;
  if (pp.vc.capacity != spec.l_max() || pp.vc.symbol_bits != spec.symbol_bits)
    return Fail(why, "parameters do not match the IOP");
  if (t.commitments.size() != k || t.challenges.size() != k || t.response.size() != k)
    return Fail(why, "transcript has the wrong number of messages");
  QueryPlan plan;
  try {
    plan = iop.Query(t.challenges);
  } catch (const std::exception& e) {
    return Fail(why, std::string("query failed: ") + e.what());
  }
  if (plan.rounds.size() != k) return Fail(why, "query plan has the wrong number of rounds");
  Answers answers(k);
  for (size_t i = 0; i < k; ++i) {
    const PositionSet& q = plan.rounds[i];
    const vc::Opening& op = t.response[i];
    for (uint64_t pos : q) {
      if (pos == 0 || pos > spec.proof_lengths[i])
        return Fail(why, "round " + std::to_string(i + 1) + " queries a padding position");
    }
    if (op.positions != q) return Fail(why, "round " + std::to_string(i + 1) + " opens the wrong positions");
    if (op.answers.size() != q.size()) return Fail(why, "round " + std::to_string(i + 1) + " answer count");
    if (!vc::Check(pp.vc, vc::Commitment{t.commitments[i], pp.vc.capacity}, op))
      return Fail(why, "round " + std::to_string(i + 1) + " opening does not verify");
    answers[i] = op.answers;
  }
  if (!iop.Decide(t.challenges, answers)) return Fail(why, "IOP verifier rejects");
  return true;
}

ArgVerifier::ArgVerifier(const ArgParams& pp, std::shared_ptr<const Iop> iop, uint64_t session_seed)
    : pp_(pp), iop_(std::move(iop)), rng_(session_seed) {
  transcript_.instance = iop_->EncodeInstance();
}

void ArgVerifier::OnCommitment(const Digest& root) {
  if (state_ != State::kAwaitCommitment) throw ProtocolViolation("commitment out of order");
  transcript_.commitments.push_back(root);
  state_ = State::kCommitted;
}

Challenge ArgVerifier::NextChallenge() {
  if (state_ != State::kCommitted) throw ProtocolViolation("challenge requested before a commitment");
  const size_t i = transcript_.challenges.size();
  const uint64_t bits = pp_.spec.challenge_bits[i];
  Challenge c{bits, rng_.Bits(bits)};
  transcript_.challenges.push_back(c);
  state_ = transcript_.challenges.size() == pp_.spec.rounds ? State::kAwaitResponse : State::kAwaitCommitment;
  return c;
}

bool ArgVerifier::OnResponse(FinalResponse response) {
  if (state_ != State::kAwaitResponse) throw ProtocolViolation("response out of order");
  transcript_.response = std::move(response);
  decision_ = ArgVerify(pp_, *iop_, transcript_, &diagnostic_);
  state_ = State::kDone;
  return decision_;
}

void ArgVerifier::Abort(std::string why) {
  decision_ = false;
  diagnostic_ = std::move(why);
  state_ = State::kDone;
}

bool RunArgument(const ArgParams& pp, std::shared_ptr<const Iop> iop, ArgumentProver& prover, uint64_t session_seed,
                 Transcript* transcript) {
  ArgVerifier verifier(pp, std::move(iop), session_seed);
  try {
    std::optional<Challenge> last;
    for (size_t i = 0; i < pp.spec.rounds; ++i) {
      verifier.OnCommitment(prover.Commit(last ? &*last : nullptr));
      last = verifier.NextChallenge();
    }
    std::optional<FinalResponse> response = prover.Respond(*last);
    if (response) {
      verifier.OnResponse(std::move(*response));
    } else {
      verifier.Abort("prover aborted");
    }
  } catch (const std::exception& e) {
    verifier.Abort(e.what());
  }
  if (transcript) *transcript = verifier.transcript();
  return verifier.decision();
}

CommStats ComputeCommStats(const ArgParams& pp, const Transcript& t) {
  const IopSpec& spec = pp.spec;
  const size_t k = spec.rounds;
  if (t.response.size() != k) throw InvalidParameter("transcript has no complete response");
  CommStats s;
  s.rounds = k + 1;
  s.messages = 2 * k + 1;
  for (size_t i = 0; i < k; ++i) {
    s.commitment_bits.push_back(8 * kDigestSize);
    s.answer_bits.push_back(spec.query_counts[i] * (CeilLog2(spec.proof_lengths[i]) + spec.symbol_bits));
    s.proof_bits.push_back(8 * kDigestSize * t.response[i].proof.size());
    s.challenge_bits.push_back(spec.challenge_bits[i]);
    s.prover_to_verifier_bits += s.commitment_bits[i] + s.answer_bits[i] + s.proof_bits[i];
    s.verifier_to_prover_bits += s.challenge_bits[i];
  }
  s.generator_bits = 8 * pp.Serialize().size();
  return s;
}

}  // namespace ibcs
