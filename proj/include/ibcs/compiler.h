#pragma once

// The interactive BCS compiler: a public-coin IOP plus the Merkle vector
// commitment become a (k+1)-round, (2k+1)-message succinct argument.
//
//   P -> V : cm_1        V -> P : r_1
//   ...
//   P -> V : cm_k        V -> P : r_k
//   P -> V : ((ans_i, pf_i))_{i in [k]}
//
// One set of VC parameters with capacity l_max serves every round; shorter
// proof strings are padded with kPaddingSymbol before committing.

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ibcs/iop.h"
#include "ibcs/random.h"
#include "ibcs/vc_merkle.h"

namespace ibcs {

inline constexpr Symbol kPaddingSymbol = 0;

struct ArgParams {
  vc::VcParams vc;
  uint64_t instance_bound = 0;
  IopSpec spec;

  // The public parameters are exactly the VC parameters.
  Bytes Serialize() const { return vc.Serialize(); }
};

// Capacity is l_max of `spec`; symbol width is the spec's. Throws
// InvalidParameter for instance_bound == 0 or an invalid spec.
ArgParams ArgSetup(unsigned lambda, uint64_t instance_bound, const IopSpec& spec,
                   Bytes domain_tag = vc::DefaultDomainTag());

// Final prover message: one opening per round, in round order.
using FinalResponse = std::vector<vc::Opening>;

struct Transcript {
  Bytes instance;
  std::vector<Digest> commitments;
  std::vector<Challenge> challenges;
  FinalResponse response;

  // Linearized message count: k commitments, k challenges, one response.
  size_t MessageCount() const { return commitments.size() + challenges.size() + 1; }
  bool operator==(const Transcript&) const = default;
};

// Argument prover, honest or not. Round i's commitment is produced from the
// challenge of round i-1 (none for i = 1); Respond() receives r_k and may
// abort by returning nullopt. Clone() is a classical snapshot.
class ArgumentProver {
 public:
  virtual ~ArgumentProver() = default;

  virtual Digest Commit(const Challenge* previous) = 0;
  virtual std::optional<FinalResponse> Respond(const Challenge& last) = 0;
  virtual std::unique_ptr<ArgumentProver> Clone() const = 0;
  virtual Bytes SerializeState() const = 0;
};

// The compiled prover wrapped around an IOP prover.
class HonestArgProver final : public ArgumentProver {
 public:
  HonestArgProver(const ArgParams& pp, std::shared_ptr<const Iop> iop, std::unique_ptr<IopProver> prover);
  HonestArgProver(const HonestArgProver& other);

  Digest Commit(const Challenge* previous) override;
  std::optional<FinalResponse> Respond(const Challenge& last) override;
  std::unique_ptr<ArgumentProver> Clone() const override { return std::make_unique<HonestArgProver>(*this); }
  Bytes SerializeState() const override;

  size_t round() const { return round_; }
  // Padded message committed in round i (1-based).
  const std::vector<Symbol>& committed(size_t round) const { return aux_.at(round - 1).message; }

 private:
  ArgParams pp_;
  std::shared_ptr<const Iop> iop_;
  std::unique_ptr<IopProver> prover_;
  std::vector<vc::CommitAux> aux_;
  std::vector<Challenge> challenges_;
  size_t round_ = 0;
  bool responded_ = false;
};

std::unique_ptr<HonestArgProver> MakeHonestProver(const ArgParams& pp, std::shared_ptr<const Iop> iop,
                                                  const Witness& w);

// Pads a round-i proof string to l_max with kPaddingSymbol.
std::vector<Symbol> PadProof(const ArgParams& pp, const ProofString& pi);

// The verifier's decision on a complete transcript: Query on the challenges,
// positions inside [1, l_i], openings at exactly Q_i, VC.Check for every
// round against a commitment of length l_max, then Decide.
bool ArgVerify(const ArgParams& pp, const Iop& iop, const Transcript& t, std::string* why = nullptr);

// Verifier state machine. Challenges are the session stream's draws and are
// fixed before the prover's next message can be seen; each NextChallenge()
// requires a commitment to have been received first.
class ArgVerifier {
 public:
  enum class State { kAwaitCommitment, kCommitted, kAwaitResponse, kDone };

  ArgVerifier(const ArgParams& pp, std::shared_ptr<const Iop> iop, uint64_t session_seed);

  void OnCommitment(const Digest& root);
  Challenge NextChallenge();
  bool OnResponse(FinalResponse response);
  // Ends the session with a reject (e.g. undecodable final message).
  void Abort(std::string why);

  State state() const { return state_; }
  bool decision() const { return decision_; }
  const std::string& diagnostic() const { return diagnostic_; }
  const Transcript& transcript() const { return transcript_; }

 private:
  ArgParams pp_;
  std::shared_ptr<const Iop> iop_;
  RandomStream rng_;
  Transcript transcript_;
  State state_ = State::kAwaitCommitment;
  bool decision_ = false;
  std::string diagnostic_;
};

// Both parties in one call, no transport. Prover exceptions and aborts
// reject.
bool RunArgument(const ArgParams& pp, std::shared_ptr<const Iop> iop, ArgumentProver& prover, uint64_t session_seed,
                 Transcript* transcript = nullptr);

// Communication accounting from the protocol's formulas. Every field is in
// bits. Per-round vectors are indexed by round - 1.
struct CommStats {
  size_t rounds = 0;
  size_t messages = 0;
  std::vector<uint64_t> commitment_bits;
  std::vector<uint64_t> answer_bits;  // q_i * (ceil(log2 l_i) + symbol bits)
  std::vector<uint64_t> proof_bits;   // |pf_i| * 256
  std::vector<uint64_t> challenge_bits;
  uint64_t prover_to_verifier_bits = 0;
  uint64_t verifier_to_prover_bits = 0;
  uint64_t generator_bits = 0;
};

CommStats ComputeCommStats(const ArgParams& pp, const Transcript& t);

}  // namespace ibcs
