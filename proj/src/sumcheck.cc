#include "ibcs/sumcheck.h"

#include "ibcs/error.h"

namespace ibcs {
namespace {

uint64_t MulMod(uint64_t a, uint64_t b, uint64_t p) {
  return static_cast<uint64_t>(static_cast<unsigned __int128>(a) * b % p);
}

uint64_t AddMod(uint64_t a, uint64_t b, uint64_t p) {
  return static_cast<uint64_t>((static_cast<unsigned __int128>(a) + b) % p);
}

uint64_t PowMod(uint64_t b, uint64_t e, uint64_t p) {
  uint64_t r = 1 % p;
  for (b %= p; e; e >>= 1, b = MulMod(b, b, p))
    if (e & 1) r = MulMod(r, b, p);
  return r;
}

uint64_t TableSize(uint32_t n, uint32_t d) {
  uint64_t size = 1;
  for (uint32_t i = 0; i < n; ++i) {
    if (size > (uint64_t{1} << 24) / (d + 1)) throw InvalidInstance("coefficient table too large");
    size *= d + 1;
  }
  return size;
}

// Fixes the least significant variable of `table` to x.
std::vector<uint64_t> FixFirst(const std::vector<uint64_t>& table, uint32_t d, uint64_t x, uint64_t p) {
  std::vector<uint64_t> out(table.size() / (d + 1), 0);
  for (size_t rest = 0; rest < out.size(); ++rest) {
    uint64_t acc = 0, xp = 1;
    for (uint32_t e = 0; e <= d; ++e, xp = MulMod(xp, x, p)) {
      acc = AddMod(acc, MulMod(table[e + (d + 1) * rest], xp, p), p);
    }
    out[rest] = acc;
  }
  return out;
}

// Univariate in the least significant variable, summing the `rest_vars`
// others over {0,1}: sum_{x in {0,1}} x^e is 2 for e = 0 and 1 otherwise.
std::vector<Symbol> RoundPolynomial(const std::vector<uint64_t>& table, uint32_t d, uint64_t p,
                                    uint32_t rest_vars) {
  std::vector<Symbol> coeffs(d + 1, 0);
  const size_t rest_count = table.size() / (d + 1);
  for (size_t rest = 0; rest < rest_count; ++rest) {
    uint64_t weight = 1;
    size_t r = rest;
    for (uint32_t v = 0; v < rest_vars; ++v, r /= d + 1) {
      if (r % (d + 1) == 0) weight = MulMod(weight, 2, p);
    }
    for (uint32_t e = 0; e <= d; ++e) {
      coeffs[e] = AddMod(coeffs[e], MulMod(table[e + (d + 1) * rest], weight, p), p);
    }
  }
  return coeffs;
}

}  // namespace

bool IsPrime(uint64_t p) {
  if (p < 2) return false;
  for (uint64_t f = 2; f * f <= p; ++f)
    if (p % f == 0) return false;
  return true;
}

SumcheckInstance SumcheckInstance::Make(uint64_t p, uint32_t n, uint32_t d, std::vector<uint64_t> coeffs,
                                        uint64_t claimed_sum) {
  if (p >= (uint64_t{1} << 32) || !IsPrime(p)) throw InvalidInstance("modulus must be a prime below 2^32");
  if (n < 1) throw InvalidInstance("sumcheck needs at least one variable");
  if (coeffs.size() != TableSize(n, d)) throw InvalidInstance("coefficient table must have (d+1)^n entries");
  for (uint64_t c : coeffs) {
    if (c >= p) throw InvalidInstance("coefficient out of field range");
  }
  if (claimed_sum >= p) throw InvalidInstance("claimed sum out of field range");
  return SumcheckInstance{p, n, d, std::move(coeffs), claimed_sum};
}

uint64_t SumcheckInstance::Evaluate(std::span<const uint64_t> point) const {
  if (point.size() != n) throw InvalidParameter("evaluation point has wrong arity");
  std::vector<uint64_t> t = coeffs;
  for (uint64_t x : point) t = FixFirst(t, d, x, p);
  return t[0];
}

uint64_t SumcheckInstance::TrueSum() const {
  uint64_t total = 0;
  std::vector<uint64_t> point(n);
  for (uint64_t mask = 0; mask < (uint64_t{1} << n); ++mask) {
    for (uint32_t j = 0; j < n; ++j) point[j] = (mask >> j) & 1;
    total = AddMod(total, Evaluate(point), p);
  }
  return total;
}

uint64_t EvalUnivariate(std::span<const Symbol> coeffs, uint64_t x, uint64_t p) {
  uint64_t acc = 0;
  for (size_t e = coeffs.size(); e-- > 0;) acc = AddMod(MulMod(acc, x, p), coeffs[e] % p, p);
  return acc;
}

namespace {

class SumcheckProver final : public IopProver {
 public:
  explicit SumcheckProver(const SumcheckInstance& instance)
      : p_(instance.p), n_(instance.n), d_(instance.d), bits_(CeilLog2(instance.p) + 64), table_(instance.coeffs) {}

  ProofString Start() override {
    if (round_ != 0) throw ProtocolViolation("prover already started");
    round_ = 1;
    return ProofString{1, RoundPolynomial(table_, d_, p_, n_ - 1)};
  }

  ProofString Next(const Challenge& previous) override {
    if (round_ == 0) throw ProtocolViolation("prover not started");
    if (round_ >= n_) throw ProtocolViolation("no round " + std::to_string(round_ + 1) + " in this IOP");
    if (previous.bits != bits_ || !previous.WellFormed()) throw ProtocolViolation("challenge has wrong length");
    table_ = FixFirst(table_, d_, ChallengeElement(previous, p_), p_);
    ++round_;
    return ProofString{round_, RoundPolynomial(table_, d_, p_, static_cast<uint32_t>(n_ - round_))};
  }

  std::unique_ptr<IopProver> Clone() const override { return std::make_unique<SumcheckProver>(*this); }
  Bytes SerializeState() const override {
    Bytes out;
    PutU64(out, round_);
    for (uint64_t c : table_) PutU64(out, c);
    return out;
  }

 private:
  uint64_t p_;
  uint32_t n_, d_;
  uint64_t bits_;
  std::vector<uint64_t> table_;
  size_t round_ = 0;
};

}  // namespace

SumcheckIop::SumcheckIop(SumcheckInstance instance) : instance_(std::move(instance)) {
  if (!IsPrime(instance_.p)) throw InvalidInstance("modulus must be prime");
  const uint32_t n = instance_.n;
  spec_.relation = "sumcheck";
  spec_.rounds = n;
  spec_.alphabet_size = instance_.p;
  spec_.symbol_bits = std::max(1u, CeilLog2(instance_.p));
  spec_.proof_lengths.assign(n, instance_.d + 1);
  spec_.challenge_bits.assign(n, CeilLog2(instance_.p) + 64);
  spec_.query_counts.assign(n, instance_.d + 1);
  spec_.Validate();
}

uint64_t SumcheckIop::ChallengeSpaceSize(size_t round) const {
  if (round < 1 || round > instance_.n) throw InvalidParameter("round out of range");
  return instance_.p;
}

QueryPlan SumcheckIop::Query(std::span<const Challenge> randomness) const {
  CheckRandomnessShape(spec_, randomness);
  PositionSet all(instance_.d + 1);
  for (uint64_t j = 0; j < all.size(); ++j) all[j] = j + 1;
  return QueryPlan{std::vector<PositionSet>(instance_.n, all)};
}

bool SumcheckIop::Decide(std::span<const Challenge> randomness, const Answers& answers) const {
  try {
    CheckRandomnessShape(spec_, randomness);
  } catch (const ProtocolViolation&) {
    return false;
  }
  const uint64_t p = instance_.p;
  if (answers.size() != instance_.n) return false;
  for (const auto& a : answers) {
    if (a.size() != instance_.d + 1) return false;
    for (Symbol s : a)
      if (s >= p) return false;
  }
  std::vector<uint64_t> point;
  uint64_t claim = instance_.claimed_sum;
  for (size_t i = 0; i < instance_.n; ++i) {
    const auto& g = answers[i];
    if (AddMod(EvalUnivariate(g, 0, p), EvalUnivariate(g, 1, p), p) != claim) return false;
    const uint64_t r = ChallengeElement(randomness[i], p);
    point.push_back(r);
    claim = EvalUnivariate(g, r, p);
  }
  return claim == instance_.Evaluate(point);
}

std::unique_ptr<IopProver> SumcheckIop::HonestProver(const Witness& w) const {
  if (!w.empty()) throw InvalidInstance("sumcheck witness must be empty");
  return std::make_unique<SumcheckProver>(instance_);
}

Bytes SumcheckIop::EncodeInstance() const {
  Bytes out;
  PutU8(out, 2);
  PutU64(out, instance_.p);
  PutU32(out, instance_.n);
  PutU32(out, instance_.d);
  PutU64(out, instance_.claimed_sum);
  for (uint64_t c : instance_.coeffs) PutU64(out, c);
  return out;
}

SumcheckCheatOracle::SumcheckCheatOracle(SumcheckInstance instance) : instance_(std::move(instance)) {}

uint64_t SumcheckCheatOracle::Value(size_t round, std::span<const uint64_t> prefix, uint64_t claim) const {
  if (round == instance_.n + 1) return claim == instance_.Evaluate(prefix) ? 1 : 0;
  return Solve(round, prefix, claim).numerator;
}

const SumcheckCheatOracle::Entry& SumcheckCheatOracle::Solve(size_t round, std::span<const uint64_t> prefix,
                                                             uint64_t claim) const {
  std::lock_guard lock(mu_);
  std::vector<uint64_t> key{round};
  key.insert(key.end(), prefix.begin(), prefix.end());
  key.push_back(claim);
  if (auto it = memo_.find(key); it != memo_.end()) return it->second;

  const uint64_t p = instance_.p;
  const uint32_t d = instance_.d;
  std::vector<uint64_t> next_prefix(prefix.begin(), prefix.end());
  next_prefix.push_back(0);
  Entry best{0, std::vector<Symbol>(d + 1, 0)};
  bool have = false;
  std::vector<Symbol> h(d + 1, 0);
  const uint64_t inv2 = p == 2 ? 0 : PowMod(2, p - 2, p);
  auto consider = [&] {
    if (AddMod(EvalUnivariate(h, 0, p), EvalUnivariate(h, 1, p), p) != claim) return;
    uint64_t total = 0;
    for (uint64_t r = 0; r < p; ++r) {
      next_prefix.back() = r;
      total += Value(round + 1, next_prefix, EvalUnivariate(h, r, p));
    }
    if (!have || total > best.numerator) {
      best = Entry{total, h};
      have = true;
    }
  };
  // Enumerate c_1..c_d; c_0 is forced by h(0) + h(1) = claim when p is odd.
  for (;;) {
    if (p == 2) {
      for (uint64_t c0 = 0; c0 < 2; ++c0) {
        h[0] = c0;
        consider();
      }
    } else {
      uint64_t s = 0;
      for (uint32_t e = 1; e <= d; ++e) s = AddMod(s, h[e], p);
      h[0] = MulMod(AddMod(claim, p - s, p), inv2, p);
      consider();
    }
    size_t e = 1;
    while (e <= d && ++h[e] == p) h[e++] = 0;
    if (e > d) break;
  }
  return memo_.emplace(std::move(key), std::move(best)).first->second;
}

Rational SumcheckCheatOracle::Optimum() const {
  uint64_t den = 1;
  for (uint32_t i = 0; i < instance_.n; ++i) den *= instance_.p;
  return Rational::Make(Value(1, {}, instance_.claimed_sum), den);
}

std::vector<Symbol> SumcheckCheatOracle::BestMessage(size_t round, std::span<const uint64_t> prefix,
                                                     uint64_t claim) const {
  return Solve(round, prefix, claim).message;
}

namespace {

class OptimalCheater final : public IopProver {
 public:
  explicit OptimalCheater(std::shared_ptr<const SumcheckCheatOracle> oracle) : oracle_(std::move(oracle)) {}

  ProofString Start() override {
    if (round_ != 0) throw ProtocolViolation("prover already started");
    round_ = 1;
    last_ = oracle_->BestMessage(1, prefix_, oracle_->instance().claimed_sum);
    return ProofString{1, last_};
  }

  ProofString Next(const Challenge& previous) override {
    const auto& inst = oracle_->instance();
    if (round_ == 0 || round_ >= inst.n) throw ProtocolViolation("no such round");
    const uint64_t r = ChallengeElement(previous, inst.p);
    const uint64_t claim = EvalUnivariate(last_, r, inst.p);
    prefix_.push_back(r);
    ++round_;
    last_ = oracle_->BestMessage(round_, prefix_, claim);
    return ProofString{round_, last_};
  }

  std::unique_ptr<IopProver> Clone() const override { return std::make_unique<OptimalCheater>(*this); }
  Bytes SerializeState() const override {
    Bytes out;
    PutU64(out, round_);
    PutU64(out, prefix_.size());
    for (uint64_t r : prefix_) PutU64(out, r);
    for (Symbol s : last_) PutU64(out, s);
    return out;
  }

 private:
  std::shared_ptr<const SumcheckCheatOracle> oracle_;
  size_t round_ = 0;
  std::vector<uint64_t> prefix_;
  std::vector<Symbol> last_;
};

}  // namespace

std::unique_ptr<IopProver> MakeSumcheckOptimalCheater(std::shared_ptr<const SumcheckCheatOracle> oracle) {
  return std::make_unique<OptimalCheater>(std::move(oracle));
}

}  // namespace ibcs
