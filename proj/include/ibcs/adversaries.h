#pragma once

// Scripted argument provers for the extraction lab. All of them are
// deterministic given their state and the incoming challenges, snapshot via
// Clone(), and expose their state through SerializeState().

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "ibcs/compiler.h"

namespace ibcs {

// The compiled prover around any IOP prover (honest or cheating).
std::unique_ptr<ArgumentProver> HonestWrapper(const ArgParams& pp, std::shared_ptr<const Iop> iop,
                                              std::unique_ptr<IopProver> prover);

// Commits zero roots and never answers.
std::unique_ptr<ArgumentProver> AlwaysAbort(const ArgParams& pp);

struct RefusalRule {
  bool refuse_all = false;
  std::vector<std::pair<size_t, uint64_t>> refused;  // (round, position)

  bool Refuses(size_t round, uint64_t position) const;
};

// Plays `base` but aborts the final response whenever a refused position is
// among those it would open.
std::unique_ptr<ArgumentProver> Withholder(std::unique_ptr<ArgumentProver> base, RefusalRule rule);

// Commits to message A of every round, then answers from message B while
// attaching A's authentication paths.
std::unique_ptr<ArgumentProver> Equivocator(const ArgParams& pp, std::shared_ptr<const Iop> iop,
                                            std::vector<std::vector<Symbol>> a, std::vector<std::vector<Symbol>> b);

struct GrinderPredicate {
  enum class Kind { kAlways, kNever, kLeadingZeros };
  Kind kind = Kind::kAlways;
  // kLeadingZeros: the first `bits` bits of r_1 are zero; measure 2^-bits.
  unsigned bits = 1;

  bool Holds(const std::vector<Challenge>& challenges) const;
  double Measure() const;
};

// Plays `base` when the full challenge vector satisfies the predicate and
// aborts otherwise.
std::unique_ptr<ArgumentProver> Grinder(std::unique_ptr<ArgumentProver> base, GrinderPredicate predicate);

// Named adversaries for configs and the CLI:
//   honest | abort | cheater | equivocator | grinder[:m] | withholder[:spec]
// "honest" plays a witness and "cheater" the best IOP strategy found by the
// exhaustive oracles; on a false instance "honest" falls back to "cheater".
// A withholder spec is "all" or a comma list of round.position pairs such as
// "1.1,1.3"; the default refuses position 1 of round 1. The grinder's
// predicate is m leading zero bits of r_1 (default 1); "grinder:never" and
// "grinder:always" are accepted too. Withholder and grinder wrap "honest".
struct AdversarySpec {
  std::string kind = "honest";
  RefusalRule refusal;
  GrinderPredicate predicate;

  std::string ToString() const;
  static AdversarySpec Parse(const std::string& text);
};

// The best IOP prover available for this instance: an honest prover from a
// witness when one exists, otherwise the optimal cheater.
std::unique_ptr<IopProver> BestIopProver(const Iop& iop);

std::unique_ptr<ArgumentProver> MakeAdversary(const AdversarySpec& spec, const ArgParams& pp,
                                              std::shared_ptr<const Iop> iop);

}  // namespace ibcs
