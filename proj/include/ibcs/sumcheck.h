#pragma once

// Sumcheck as an n-round public-coin IOP over F_p. Round i's proof string is
// the coefficient list (c_0..c_d) of the univariate g_i; the verifier reads
// every position.
//
// The polynomial g is a dense coefficient table with (d+1)^n entries; the
// monomial X_1^{e_1}...X_n^{e_n} sits at index sum_j e_j (d+1)^{j-1}, so X_1
// is the least significant digit.

#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include "ibcs/iop.h"

namespace ibcs {

bool IsPrime(uint64_t p);

struct SumcheckInstance {
  uint64_t p = 0;
  uint32_t n = 0;
  uint32_t d = 0;
  std::vector<uint64_t> coeffs;
  uint64_t claimed_sum = 0;

  // Validates primality, table size and coefficient ranges.
  static SumcheckInstance Make(uint64_t p, uint32_t n, uint32_t d, std::vector<uint64_t> coeffs,
                               uint64_t claimed_sum);

  uint64_t TrueSum() const;
  uint64_t Evaluate(std::span<const uint64_t> point) const;

  bool operator==(const SumcheckInstance&) const = default;
};

// Evaluates c_0 + c_1 x + ... over F_p.
uint64_t EvalUnivariate(std::span<const Symbol> coeffs, uint64_t x, uint64_t p);

class SumcheckIop final : public Iop {
 public:
  explicit SumcheckIop(SumcheckInstance instance);

  const IopSpec& spec() const override { return spec_; }
  std::string name() const override { return "sumcheck"; }
  QueryPlan Query(std::span<const Challenge> randomness) const override;
  bool Decide(std::span<const Challenge> randomness, const Answers& answers) const override;
  uint64_t ChallengeSpaceSize(size_t round) const override;
  bool InLanguage() const override { return instance_.TrueSum() == instance_.claimed_sum; }
  // Language-type relation: the witness is empty.
  bool CheckWitness(const Witness& w) const override { return w.empty() && InLanguage(); }
  Witness ExtractWitness(const ProofString&) const override { return {}; }
  std::unique_ptr<IopProver> HonestProver(const Witness& w) const override;
  Bytes EncodeInstance() const override;

  const SumcheckInstance& instance() const { return instance_; }

 private:
  SumcheckInstance instance_;
  IopSpec spec_;
};

// Exact optimal cheating value for sumcheck by backward induction over
// (round, challenge prefix, current claim):
//   W(n+1, r, c) = [c == g(r)]
//   W(i, r_<i, c) = max_{h : h(0)+h(1)=c} (1/p) sum_{r_i} W(i+1, r_<i r_i, h(r_i))
// Independent of the generic strategy-tree enumerator.
class SumcheckCheatOracle {
 public:
  explicit SumcheckCheatOracle(SumcheckInstance instance);

  // Max acceptance probability starting from the instance's claimed sum.
  Rational Optimum() const;
  // The maximizing round-i message given the challenge prefix and claim.
  std::vector<Symbol> BestMessage(size_t round, std::span<const uint64_t> prefix, uint64_t claim) const;

  const SumcheckInstance& instance() const { return instance_; }

 private:
  struct Entry {
    uint64_t numerator;  // over p^{n - i + 1}
    std::vector<Symbol> message;
  };
  const Entry& Solve(size_t round, std::span<const uint64_t> prefix, uint64_t claim) const;
  uint64_t Value(size_t round, std::span<const uint64_t> prefix, uint64_t claim) const;

  SumcheckInstance instance_;
  // Key: (round, prefix..., claim).
  mutable std::map<std::vector<uint64_t>, Entry> memo_;
  mutable std::recursive_mutex mu_;
};

// IOP prover that plays the oracle's maximizing messages.
std::unique_ptr<IopProver> MakeSumcheckOptimalCheater(std::shared_ptr<const SumcheckCheatOracle> oracle);

}  // namespace ibcs
