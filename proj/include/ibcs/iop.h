#pragma once

// Public-coin IOPs with non-adaptive verifiers: the verifier is a pair
// (Query, Decide) where Query sees only the instance and the randomness.

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "ibcs/bytes.h"
#include "ibcs/vc_merkle.h"

namespace ibcs {

struct IopSpec {
  std::string relation;
  size_t rounds = 0;
  uint64_t alphabet_size = 0;
  unsigned symbol_bits = 0;
  std::vector<uint64_t> proof_lengths;
  std::vector<uint64_t> challenge_bits;
  std::vector<uint64_t> query_counts;

  uint64_t l_max() const;
  uint64_t total_length() const;
  uint64_t total_queries() const;
  uint64_t q_max() const;
  uint64_t total_challenge_bits() const;
  // Throws InvalidParameter if any invariant is broken.
  void Validate() const;
};

// A bit string of exactly `bits` bits, MSB-first, zero-padded to bytes.
struct Challenge {
  uint64_t bits = 0;
  Bytes data;

  bool operator==(const Challenge&) const = default;
  bool WellFormed() const;
};

// The string read as a big-endian integer, reduced mod n.
uint64_t ChallengeElement(const Challenge& c, uint64_t n);
// Canonical `bits`-bit string whose integer value is `value`.
Challenge ChallengeFromValue(uint64_t value, uint64_t bits);

struct ProofString {
  size_t round = 0;  // 1-based
  std::vector<Symbol> symbols;

  bool operator==(const ProofString&) const = default;
};

struct QueryPlan {
  std::vector<PositionSet> rounds;

  bool operator==(const QueryPlan&) const = default;
};

using Answers = std::vector<std::vector<Symbol>>;
using Witness = std::vector<Symbol>;

// Prover side of an IOP. The instance and witness are bound when the prover
// is created; Start() produces the first proof string and Next() each later
// one. Clone() is the classical snapshot used for rewinding.
class IopProver {
 public:
  virtual ~IopProver() = default;

  virtual ProofString Start() = 0;
  virtual ProofString Next(const Challenge& previous) = 0;
  virtual std::unique_ptr<IopProver> Clone() const = 0;
  // Canonical bytes of the internal state; equal states serialize equally.
  virtual Bytes SerializeState() const = 0;
};

class Iop {
 public:
  virtual ~Iop() = default;

  virtual const IopSpec& spec() const = 0;
  virtual std::string name() const = 0;

  // Throws ProtocolViolation if the randomness is not shaped per spec.
  virtual QueryPlan Query(std::span<const Challenge> randomness) const = 0;
  // Malformed answers yield false.
  virtual bool Decide(std::span<const Challenge> randomness, const Answers& answers) const = 0;

  // Size of the structured challenge space of round i (1-based) and a
  // canonical challenge for each element; used by exhaustive oracles.
  virtual uint64_t ChallengeSpaceSize(size_t round) const = 0;
  Challenge ChallengeForElement(size_t round, uint64_t element) const;

  virtual bool InLanguage() const = 0;
  virtual bool CheckWitness(const Witness& w) const = 0;
  // The IOP extractor applied to a first-round proof string.
  virtual Witness ExtractWitness(const ProofString& first) const = 0;
  // Throws InvalidInstance if the witness is malformed for this instance.
  virtual std::unique_ptr<IopProver> HonestProver(const Witness& w) const = 0;

  virtual Bytes EncodeInstance() const = 0;
};

// Checks randomness shape against the spec; throws ProtocolViolation.
void CheckRandomnessShape(const IopSpec& spec, std::span<const Challenge> randomness);

// Reads pi_i[Q_i] for every round. Throws ProtocolViolation when a position
// falls outside its proof string.
Answers ReadAnswers(const QueryPlan& plan, std::span<const ProofString> proofs);

struct IopRun {
  bool accept = false;
  std::vector<ProofString> proofs;
  std::vector<Challenge> challenges;
  std::string diagnostic;
};

// Postponed-query execution: collect every proof string (drawing r_i after
// pi_i), then run Query on all randomness, then Decide.
IopRun IopInteract(const Iop& iop, IopProver& prover, uint64_t seed);

// Same experiment with all randomness drawn up front and oracle access
// routed through a recording wrapper; accept bits must match IopInteract.
IopRun IopInteractInterleaved(const Iop& iop, IopProver& prover, uint64_t seed);

struct Rational {
  uint64_t num = 0;
  uint64_t den = 1;

  static Rational Make(uint64_t num, uint64_t den);
  double ToDouble() const { return static_cast<double>(num) / static_cast<double>(den); }
  std::string ToString() const;
  bool operator==(const Rational&) const = default;
  bool LessEq(const Rational& other) const;
};

inline constexpr uint64_t kStrategyTreeBudget = uint64_t{1} << 24;

// Exact maximum acceptance probability over all adaptive proof strategies,
// by backward induction over the full strategy tree. Throws Infeasible if the
// tree has more than `budget` nodes.
Rational BruteForceSoundness(const Iop& iop, uint64_t budget = kStrategyTreeBudget);

// Strategy-tree node count, saturating at UINT64_MAX.
uint64_t StrategyTreeSize(const Iop& iop);

}  // namespace ibcs
