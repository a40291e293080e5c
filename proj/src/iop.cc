#include "ibcs/iop.h"

#include <algorithm>
#include <functional>
#include <numeric>

#include "ibcs/error.h"
#include "ibcs/random.h"

namespace ibcs {

uint64_t IopSpec::l_max() const {
  return proof_lengths.empty() ? 0 : *std::max_element(proof_lengths.begin(), proof_lengths.end());
}

uint64_t IopSpec::total_length() const {
  return std::accumulate(proof_lengths.begin(), proof_lengths.end(), uint64_t{0});
}

uint64_t IopSpec::total_queries() const {
  return std::accumulate(query_counts.begin(), query_counts.end(), uint64_t{0});
}

uint64_t IopSpec::q_max() const {
  return query_counts.empty() ? 0 : *std::max_element(query_counts.begin(), query_counts.end());
}

uint64_t IopSpec::total_challenge_bits() const {
  return std::accumulate(challenge_bits.begin(), challenge_bits.end(), uint64_t{0});
}

void IopSpec::Validate() const {
  if (rounds < 1) throw InvalidParameter("IOP must have at least one round");
  if (proof_lengths.size() != rounds || challenge_bits.size() != rounds || query_counts.size() != rounds) {
    throw InvalidParameter("per-round vectors must have one entry per round");
  }
  if (alphabet_size < 2 || symbol_bits == 0 || symbol_bits > 64 ||
      (symbol_bits < 64 && alphabet_size > (uint64_t{1} << symbol_bits))) {
    throw InvalidParameter("alphabet does not fit the symbol width");
  }
  for (size_t i = 0; i < rounds; ++i) {
    if (proof_lengths[i] < 1) throw InvalidParameter("proof length must be positive");
    if (query_counts[i] > proof_lengths[i]) throw InvalidParameter("more queries than positions");
  }
}

bool Challenge::WellFormed() const {
  if (data.size() != (bits + 7) / 8) return false;
  if (bits % 8 != 0 && (data.back() & (0xff >> (bits % 8))) != 0) return false;
  return true;
}

uint64_t ChallengeElement(const Challenge& c, uint64_t n) {
  if (n == 0) throw InvalidParameter("empty challenge space");
  unsigned __int128 v = 0;
  for (uint64_t i = 0; i < c.bits; ++i) {
    const unsigned bit = (c.data[i / 8] >> (7 - i % 8)) & 1;
    v = (2 * v + bit) % n;
  }
  return static_cast<uint64_t>(v);
}

Challenge ChallengeFromValue(uint64_t value, uint64_t bits) {
  if (bits < 64 && (value >> bits) != 0) throw InvalidParameter("value does not fit challenge width");
  Challenge c{bits, Bytes((bits + 7) / 8, 0)};
  for (uint64_t i = 0; i < bits && i < 64; ++i) {
    if ((value >> i) & 1) {
      const uint64_t pos = bits - 1 - i;  // bit index from the MSB end
      c.data[pos / 8] |= static_cast<uint8_t>(0x80 >> (pos % 8));
    }
  }
  return c;
}

Challenge Iop::ChallengeForElement(size_t round, uint64_t element) const {
  return ChallengeFromValue(element, spec().challenge_bits.at(round - 1));
}

void CheckRandomnessShape(const IopSpec& spec, std::span<const Challenge> randomness) {
  if (randomness.size() != spec.rounds) throw ProtocolViolation("wrong number of challenges");
  for (size_t i = 0; i < spec.rounds; ++i) {
    if (randomness[i].bits != spec.challenge_bits[i] || !randomness[i].WellFormed()) {
      throw ProtocolViolation("challenge " + std::to_string(i + 1) + " has wrong length");
    }
  }
}

Answers ReadAnswers(const QueryPlan& plan, std::span<const ProofString> proofs) {
  if (plan.rounds.size() != proofs.size()) throw ProtocolViolation("plan/proof round mismatch");
  Answers out(plan.rounds.size());
  for (size_t i = 0; i < plan.rounds.size(); ++i) {
    for (uint64_t pos : plan.rounds[i]) {
      if (pos < 1 || pos > proofs[i].symbols.size()) throw ProtocolViolation("query outside proof string");
      out[i].push_back(proofs[i].symbols[pos - 1]);
    }
  }
  return out;
}

namespace {

void CheckProofShape(const IopSpec& spec, const ProofString& pi, size_t round) {
  if (pi.round != round || pi.symbols.size() != spec.proof_lengths[round - 1]) {
    throw ProtocolViolation("proof string " + std::to_string(round) + " has wrong length");
  }
}

Challenge DrawChallenge(RandomStream& rng, uint64_t bits) { return Challenge{bits, rng.Bits(bits)}; }

}  // namespace

IopRun IopInteract(const Iop& iop, IopProver& prover, uint64_t seed) {
  const IopSpec& spec = iop.spec();
  RandomStream rng(DeriveSeed(seed, "iop-interact", 0));
  IopRun run;
  try {
    for (size_t i = 1; i <= spec.rounds; ++i) {
      ProofString pi = i == 1 ? prover.Start() : prover.Next(run.challenges.back());
      CheckProofShape(spec, pi, i);
      run.proofs.push_back(std::move(pi));
      run.challenges.push_back(DrawChallenge(rng, spec.challenge_bits[i - 1]));
    }
    const QueryPlan plan = iop.Query(run.challenges);
    run.accept = iop.Decide(run.challenges, ReadAnswers(plan, run.proofs));
  } catch (const std::exception& e) {
    run.accept = false;
    run.diagnostic = e.what();
  }
  return run;
}

namespace {

// Oracle access to the received proof strings that records every read.
class RecordingOracle {
 public:
  void Append(ProofString pi) { proofs_.push_back(std::move(pi)); }

  Symbol Read(size_t round, uint64_t pos) {
    const auto& s = proofs_.at(round - 1).symbols;
    if (pos < 1 || pos > s.size()) throw ProtocolViolation("query outside proof string");
    reads_.emplace_back(round, pos);
    return s[pos - 1];
  }

  std::vector<ProofString> proofs_;
  std::vector<std::pair<size_t, uint64_t>> reads_;
};

}  // namespace

IopRun IopInteractInterleaved(const Iop& iop, IopProver& prover, uint64_t seed) {
  const IopSpec& spec = iop.spec();
  RandomStream rng(DeriveSeed(seed, "iop-interact", 0));
  std::vector<Challenge> randomness;
  for (size_t i = 0; i < spec.rounds; ++i) randomness.push_back(DrawChallenge(rng, spec.challenge_bits[i]));
  IopRun run;
  RecordingOracle oracle;
  try {
    for (size_t i = 1; i <= spec.rounds; ++i) {
      ProofString pi = i == 1 ? prover.Start() : prover.Next(randomness[i - 2]);
      CheckProofShape(spec, pi, i);
      run.proofs.push_back(pi);
      oracle.Append(std::move(pi));
      run.challenges.push_back(randomness[i - 1]);
    }
    const QueryPlan plan = iop.Query(randomness);
    Answers answers(spec.rounds);
    for (size_t i = 0; i < spec.rounds; ++i) {
      for (uint64_t pos : plan.rounds[i]) answers[i].push_back(oracle.Read(i + 1, pos));
    }
    run.accept = iop.Decide(randomness, answers);
  } catch (const std::exception& e) {
    run.accept = false;
    run.diagnostic = e.what();
  }
  return run;
}

Rational Rational::Make(uint64_t num, uint64_t den) {
  if (den == 0) throw InvalidParameter("zero denominator");
  const uint64_t g = std::gcd(num, den);
  return g == 0 ? Rational{0, 1} : Rational{num / g, den / g};
}

std::string Rational::ToString() const { return std::to_string(num) + "/" + std::to_string(den); }

bool Rational::LessEq(const Rational& other) const {
  return static_cast<unsigned __int128>(num) * other.den <= static_cast<unsigned __int128>(other.num) * den;
}

namespace {

uint64_t SatMul(uint64_t a, uint64_t b) {
  unsigned __int128 p = static_cast<unsigned __int128>(a) * b;
  return p > UINT64_MAX ? UINT64_MAX : static_cast<uint64_t>(p);
}

uint64_t SatPow(uint64_t base, uint64_t exp) {
  uint64_t r = 1;
  for (uint64_t i = 0; i < exp && r != UINT64_MAX; ++i) r = SatMul(r, base);
  return r;
}

}  // namespace

uint64_t StrategyTreeSize(const Iop& iop) {
  const IopSpec& spec = iop.spec();
  uint64_t nodes = 1;
  for (size_t i = 1; i <= spec.rounds; ++i) {
    nodes = SatMul(nodes, SatPow(spec.alphabet_size, spec.proof_lengths[i - 1]));
    nodes = SatMul(nodes, iop.ChallengeSpaceSize(i));
  }
  return nodes;
}

Rational BruteForceSoundness(const Iop& iop, uint64_t budget) {
  const IopSpec& spec = iop.spec();
  const uint64_t size = StrategyTreeSize(iop);
  if (size > budget) {
    throw Infeasible("strategy tree has " + (size == UINT64_MAX ? std::string("> 2^64") : std::to_string(size)) +
                     " nodes, budget " + std::to_string(budget));
  }
  std::vector<std::vector<Challenge>> space(spec.rounds);
  uint64_t denominator = 1;
  for (size_t i = 1; i <= spec.rounds; ++i) {
    const uint64_t n = iop.ChallengeSpaceSize(i);
    for (uint64_t e = 0; e < n; ++e) space[i - 1].push_back(iop.ChallengeForElement(i, e));
    denominator *= n;
  }

  std::vector<ProofString> proofs(spec.rounds);
  std::vector<Challenge> randomness(spec.rounds);
  // best(i): max over pi_i of the sum over r_i of best(i + 1); numerators
  // share the denominator prod_{j >= i} N_j.
  std::function<uint64_t(size_t)> best = [&](size_t i) -> uint64_t {
    if (i == spec.rounds) {
      const QueryPlan plan = iop.Query(randomness);
      return iop.Decide(randomness, ReadAnswers(plan, proofs)) ? 1 : 0;
    }
    const uint64_t len = spec.proof_lengths[i];
    proofs[i].round = i + 1;
    proofs[i].symbols.assign(len, 0);
    uint64_t top = 0;
    for (;;) {
      uint64_t total = 0;
      for (const Challenge& c : space[i]) {
        randomness[i] = c;
        total += best(i + 1);
      }
      top = std::max(top, total);
      // Odometer step over Sigma^{l_i}.
      size_t d = 0;
      while (d < len && ++proofs[i].symbols[d] == spec.alphabet_size) proofs[i].symbols[d++] = 0;
      if (d == len) break;
    }
    return top;
  };
  return Rational::Make(best(0), denominator);
}

}  // namespace ibcs
