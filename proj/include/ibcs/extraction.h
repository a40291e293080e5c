#pragma once

// Classical rewinding extraction. A snapshot is a Clone() of the adversary;
// restoring means discarding the clone, so the original state is reused
// exactly.
//
// Round i of the constructed IOP prover: feed r_{i-1} to the adversary to
// get cm_i, then run the reductor R_i. R_i draws t uniformly from [0, T],
// T = ceil(l_max / (eps / 2k)), and runs the sampler S_i for t iterations:
// each iteration continues a fresh copy of the adversary with new
// r_i..r_k, evaluates the game predicate f_i and, on acceptance, records the
// round-i opening if it covers a new position. The extracted string pi~_i
// holds the recorded answers (first write wins) and alpha elsewhere.

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ibcs/compiler.h"
#include "ibcs/iop.h"
#include "ibcs/random.h"

namespace ibcs {

class KnowledgeSet {
 public:
  explicit KnowledgeSet(uint64_t length) : covered_(length, false) {}

  // Appends the triple iff it covers a position not yet covered. Positions
  // must lie in [1, length].
  bool Offer(const vc::Opening& opening);

  const std::vector<vc::Opening>& triples() const { return triples_; }
  PositionSet coverage() const;
  size_t covered_count() const { return covered_count_; }
  bool Covers(uint64_t position) const { return position >= 1 && position <= covered_.size() && covered_[position - 1]; }
  bool CoversAll(const PositionSet& q) const;
  uint64_t length() const { return covered_.size(); }

 private:
  std::vector<bool> covered_;
  size_t covered_count_ = 0;
  std::vector<vc::Opening> triples_;
};

struct ExtractedOracle {
  size_t round = 0;
  PositionSet covered;
  ProofString proof;
};

// First-write-wins fill of alpha^{l_i} from the knowledge set.
ExtractedOracle FillOracle(size_t round, const KnowledgeSet& k);

struct RewindBudget {
  uint64_t T = 0;
  double eps_over_2k = 0;

  // T = ceil(l_max / (eps / 2k)); a ratio within 1e-9 of an integer counts
  // as that integer. eps in (0, 1].
  static RewindBudget For(uint64_t l_max, size_t rounds, double eps);
};

// What the reduction knows at the start of round i's continuation.
struct ReductionContext {
  ArgParams pp;
  std::shared_ptr<const Iop> iop;
  std::vector<Digest> commitments;     // cm_1..cm_i
  std::vector<Challenge> challenges;   // r_1..r_{i-1}
  std::vector<ProofString> extracted;  // pi~_1..pi~_{i-1}

  size_t round() const { return commitments.size(); }
};

// Decision of a partially extracted protocol. Rounds 1..extracted.size() are
// answered from the extracted strings, the rest from the openings. Rounds
// >= vc_from must open exactly Q_j and pass VC.Check against cm_j. Query
// positions outside [1, l_j] reject.
bool HybridDecision(const ArgParams& pp, const Iop& iop, const std::vector<ProofString>& extracted, size_t vc_from,
                    const std::vector<Digest>& commitments, const std::vector<Challenge>& challenges,
                    const std::optional<FinalResponse>& response);

struct Continuation {
  bool completed = false;  // false if the adversary threw
  std::vector<Digest> commitments;
  std::vector<Challenge> challenges;
  std::optional<FinalResponse> response;
};

// Runs `adv` (positioned after cm_i) to the end with fresh r_i..r_k.
Continuation RunContinuation(ArgumentProver& adv, const ReductionContext& ctx, RandomStream& rng);

// The game predicate f_i on a finished continuation.
bool GamePredicate(const ReductionContext& ctx, const Continuation& run);

struct SamplerStats {
  uint64_t iterations = 0;
  uint64_t accepted = 0;
  uint64_t appended = 0;
  uint64_t voided = 0;
  bool snapshot_intact = true;
};

struct SamplerResult {
  KnowledgeSet knowledge;
  SamplerStats stats;
};

SamplerResult Sample(const ArgumentProver& adv, const ReductionContext& ctx, uint64_t t, uint64_t seed);

struct ReductorResult {
  ExtractedOracle oracle;
  uint64_t t = 0;
  SamplerResult sampler;
};

ReductorResult Reduce(const ArgumentProver& adv, const ReductionContext& ctx, const RewindBudget& budget,
                      uint64_t seed);

// The IOP prover P~ built from an argument adversary. It owns a copy of the
// adversary; each round commits through it and extracts pi~_i with R_i.
std::unique_ptr<IopProver> BuildIopProver(const ArgumentProver& adv, const ArgParams& pp,
                                          std::shared_ptr<const Iop> iop, const RewindBudget& budget, uint64_t seed);

// One coupled trial of hybrid H_l: rounds <= l extracted, later rounds from
// the adversary's openings, VC checks on every round. For l >= 1 the main
// run also feeds the round-l event checks.
struct HybridTrial {
  bool accept = false;
  bool voided = false;
  bool snapshot_intact = true;
  bool main_f_accept = false;  // f_l on the main run
  bool disagreement = false;   // event (i)
  bool missing = false;        // event (ii)
  bool binding_break = false;  // event (i) backed by two verifying openings
  uint64_t appends = 0;
};

HybridTrial RunHybridTrial(const ArgumentProver& adv, const ArgParams& pp, std::shared_ptr<const Iop> iop,
                           size_t level, const RewindBudget& budget, uint64_t seed);

struct Estimate {
  uint64_t successes = 0;
  uint64_t trials = 0;
  double value = 0;
  double radius = 0;
};

Estimate MakeEstimate(uint64_t successes, uint64_t trials, double delta = kDefaultDelta);

Estimate HybridValue(const ArgumentProver& adv, const ArgParams& pp, std::shared_ptr<const Iop> iop, size_t level,
                     const RewindBudget& budget, uint64_t trials, uint64_t seed);

struct EventCounters {
  size_t level = 0;
  uint64_t trials = 0;
  uint64_t voided = 0;
  uint64_t hybrid_accepts = 0;
  uint64_t main_accepts = 0;
  uint64_t disagreements = 0;
  uint64_t missing = 0;
  uint64_t binding_breaks = 0;
  uint64_t snapshot_failures = 0;
  uint64_t max_appends = 0;
};

EventCounters RunEventsExperiment(const ArgumentProver& adv, const ArgParams& pp, std::shared_ptr<const Iop> iop,
                                  size_t level, const RewindBudget& budget, uint64_t trials, uint64_t seed);

struct BoundInputs {
  double eps_iop = 0;
  double kappa_iop = 0;
  size_t rounds = 1;
  uint64_t l_max = 1;
  double eps_vc = 0;
  double eps_collapse = 0;
  double eps = 0;
};

struct TheoremBound {
  double vc_term = 0;  // k (eps_VC + l_max eps_VCCollapse)
  double eps_arg = 0;
  double kappa_arg = 0;
};

// eps_IOP + k (eps_VC + l_max eps_VCCollapse) + eps and the kappa analogue.
// Every error input must lie in [0, 1].
TheoremBound TheoremBounds(const BoundInputs& in);

struct KnowledgeOutcome {
  bool success = false;
  Witness witness;
  size_t attempts = 0;
  std::string failure;
};

inline constexpr size_t kExtractorAttempts = 32;

// Runs P~ until its first proof string decodes to a valid witness, at most
// `attempts` times with independent reductor randomness.
KnowledgeOutcome ExtractKnowledge(const ArgumentProver& adv, const ArgParams& pp, std::shared_ptr<const Iop> iop,
                                  const RewindBudget& budget, uint64_t seed, size_t attempts = kExtractorAttempts);

}  // namespace ibcs
