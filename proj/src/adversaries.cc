#include "ibcs/adversaries.h"

#include <algorithm>
#include <charconv>
#include <cmath>

#include "ibcs/error.h"
#include "ibcs/graph_coloring.h"
#include "ibcs/sumcheck.h"

namespace ibcs {

namespace {

void PutChallenges(Bytes& out, const std::vector<Challenge>& challenges) {
  PutU64(out, challenges.size());
  for (const Challenge& c : challenges) {
    PutU64(out, c.bits);
    PutBytes(out, c.data);
  }
}

void PutNested(Bytes& out, const Bytes& inner) {
  PutU64(out, inner.size());
  PutBytes(out, inner);
}

class AbortProver final : public ArgumentProver {
 public:
  explicit AbortProver(size_t rounds) : rounds_(rounds) {}

  Digest Commit(const Challenge*) override {
    if (round_ >= rounds_) throw ProtocolViolation("all rounds already committed");
    ++round_;
    return Digest{};
  }
  std::optional<FinalResponse> Respond(const Challenge&) override { return std::nullopt; }
  std::unique_ptr<ArgumentProver> Clone() const override { return std::make_unique<AbortProver>(*this); }
  Bytes SerializeState() const override {
    Bytes out;
    PutU8(out, 0xA0);
    PutU64(out, round_);
    return out;
  }

 private:
  size_t rounds_;
  size_t round_ = 0;
};

class WithholdingProver final : public ArgumentProver {
 public:
  WithholdingProver(std::unique_ptr<ArgumentProver> base, RefusalRule rule)
      : base_(std::move(base)), rule_(std::move(rule)) {}
  WithholdingProver(const WithholdingProver& other) : base_(other.base_->Clone()), rule_(other.rule_) {}

  Digest Commit(const Challenge* previous) override { return base_->Commit(previous); }

  std::optional<FinalResponse> Respond(const Challenge& last) override {
    std::optional<FinalResponse> response = base_->Respond(last);
    if (!response) return std::nullopt;
    for (size_t i = 0; i < response->size(); ++i)
      for (uint64_t pos : (*response)[i].positions)
        if (rule_.Refuses(i + 1, pos)) return std::nullopt;
    return response;
  }

  std::unique_ptr<ArgumentProver> Clone() const override { return std::make_unique<WithholdingProver>(*this); }
  Bytes SerializeState() const override {
    Bytes out;
    PutU8(out, 0xA1);
    PutNested(out, base_->SerializeState());
    return out;
  }

 private:
  std::unique_ptr<ArgumentProver> base_;
  RefusalRule rule_;
};

class EquivocatingProver final : public ArgumentProver {
 public:
  EquivocatingProver(const ArgParams& pp, std::shared_ptr<const Iop> iop, std::vector<std::vector<Symbol>> a,
                     std::vector<std::vector<Symbol>> b)
      : pp_(pp), iop_(std::move(iop)), a_(std::move(a)), b_(std::move(b)) {
    const IopSpec& spec = pp_.spec;
    if (a_.size() != spec.rounds || b_.size() != spec.rounds)
      throw InvalidParameter("equivocator needs two messages per round");
    for (size_t i = 0; i < spec.rounds; ++i) {
      if (a_[i].size() != spec.proof_lengths[i] || b_[i].size() != spec.proof_lengths[i])
        throw InvalidParameter("equivocator message has the wrong length");
    }
  }

  Digest Commit(const Challenge* previous) override {
    if (aux_.size() >= pp_.spec.rounds) throw ProtocolViolation("all rounds already committed");
    if (previous) challenges_.push_back(*previous);
    const size_t i = aux_.size();
    auto [cm, aux] = vc::Commit(pp_.vc, PadProof(pp_, ProofString{i + 1, a_[i]}));
    aux_.push_back(std::move(aux));
    return cm.root;
  }

  std::optional<FinalResponse> Respond(const Challenge& last) override {
    challenges_.push_back(last);
    const QueryPlan plan = iop_->Query(challenges_);
    FinalResponse response;
    for (size_t i = 0; i < plan.rounds.size(); ++i) {
      vc::Opening op = vc::Open(pp_.vc, aux_[i], plan.rounds[i]);
      for (size_t j = 0; j < op.positions.size(); ++j) op.answers[j] = b_[i][op.positions[j] - 1];
      response.push_back(std::move(op));
    }
    return response;
  }

  std::unique_ptr<ArgumentProver> Clone() const override { return std::make_unique<EquivocatingProver>(*this); }
  Bytes SerializeState() const override {
    Bytes out;
    PutU8(out, 0xA2);
    PutChallenges(out, challenges_);
    for (const auto& aux : aux_) PutBytes(out, ByteSpan(aux.layers.back().front().data(), kDigestSize));
    return out;
  }

 private:
  ArgParams pp_;
  std::shared_ptr<const Iop> iop_;
  std::vector<std::vector<Symbol>> a_, b_;
  std::vector<vc::CommitAux> aux_;
  std::vector<Challenge> challenges_;
};

class GrindingProver final : public ArgumentProver {
 public:
  GrindingProver(std::unique_ptr<ArgumentProver> base, GrinderPredicate predicate)
      : base_(std::move(base)), predicate_(predicate) {}
  GrindingProver(const GrindingProver& other)
      : base_(other.base_->Clone()), predicate_(other.predicate_), challenges_(other.challenges_) {}

  Digest Commit(const Challenge* previous) override {
    if (previous) challenges_.push_back(*previous);
    return base_->Commit(previous);
  }

  std::optional<FinalResponse> Respond(const Challenge& last) override {
    challenges_.push_back(last);
    if (!predicate_.Holds(challenges_)) return std::nullopt;
    return base_->Respond(last);
  }

  std::unique_ptr<ArgumentProver> Clone() const override { return std::make_unique<GrindingProver>(*this); }
  Bytes SerializeState() const override {
    Bytes out;
    PutU8(out, 0xA3);
    PutChallenges(out, challenges_);
    PutNested(out, base_->SerializeState());
    return out;
  }

 private:
  std::unique_ptr<ArgumentProver> base_;
  GrinderPredicate predicate_;
  std::vector<Challenge> challenges_;
};

uint64_t ParseUint(const std::string& text, const std::string& what) {
  uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty())
    throw InvalidParameter("bad " + what + ": '" + text + "'");
  return v;
}

}  // namespace

std::unique_ptr<ArgumentProver> HonestWrapper(const ArgParams& pp, std::shared_ptr<const Iop> iop,
                                              std::unique_ptr<IopProver> prover) {
  return std::make_unique<HonestArgProver>(pp, std::move(iop), std::move(prover));
}

std::unique_ptr<ArgumentProver> AlwaysAbort(const ArgParams& pp) {
  return std::make_unique<AbortProver>(pp.spec.rounds);
}

bool RefusalRule::Refuses(size_t round, uint64_t position) const {
  if (refuse_all) return true;
  return std::find(refused.begin(), refused.end(), std::make_pair(round, position)) != refused.end();
}

std::unique_ptr<ArgumentProver> Withholder(std::unique_ptr<ArgumentProver> base, RefusalRule rule) {
  return std::make_unique<WithholdingProver>(std::move(base), std::move(rule));
}

std::unique_ptr<ArgumentProver> Equivocator(const ArgParams& pp, std::shared_ptr<const Iop> iop,
                                            std::vector<std::vector<Symbol>> a, std::vector<std::vector<Symbol>> b) {
  return std::make_unique<EquivocatingProver>(pp, std::move(iop), std::move(a), std::move(b));
}

bool GrinderPredicate::Holds(const std::vector<Challenge>& challenges) const {
  switch (kind) {
    case Kind::kAlways:
      return true;
    case Kind::kNever:
      return false;
    case Kind::kLeadingZeros: {
      if (challenges.empty() || challenges[0].bits < bits) throw InvalidParameter("challenge shorter than predicate");
      for (unsigned j = 0; j < bits; ++j)
        if ((challenges[0].data[j / 8] >> (7 - j % 8)) & 1) return false;
      return true;
    }
  }
  return false;
}

double GrinderPredicate::Measure() const {
  switch (kind) {
    case Kind::kAlways:
      return 1.0;
    case Kind::kNever:
      return 0.0;
    case Kind::kLeadingZeros:
      return std::ldexp(1.0, -static_cast<int>(bits));
  }
  return 0.0;
}

std::unique_ptr<ArgumentProver> Grinder(std::unique_ptr<ArgumentProver> base, GrinderPredicate predicate) {
  return std::make_unique<GrindingProver>(std::move(base), predicate);
}

std::string AdversarySpec::ToString() const {
  if (kind == "grinder") {
    switch (predicate.kind) {
      case GrinderPredicate::Kind::kAlways:
        return "grinder:always";
      case GrinderPredicate::Kind::kNever:
        return "grinder:never";
      case GrinderPredicate::Kind::kLeadingZeros:
        return "grinder:" + std::to_string(predicate.bits);
    }
  }
  if (kind == "withholder") {
    if (refusal.refuse_all) return "withholder:all";
    std::string out = "withholder:";
    for (size_t j = 0; j < refusal.refused.size(); ++j) {
      if (j) out += ",";
      out += std::to_string(refusal.refused[j].first) + "." + std::to_string(refusal.refused[j].second);
    }
    return out;
  }
  return kind;
}

AdversarySpec AdversarySpec::Parse(const std::string& text) {
  AdversarySpec spec;
  const size_t colon = text.find(':');
  spec.kind = text.substr(0, colon);
  const std::string arg = colon == std::string::npos ? "" : text.substr(colon + 1);
  if (spec.kind == "honest" || spec.kind == "abort" || spec.kind == "cheater" || spec.kind == "equivocator") {
    if (!arg.empty()) throw InvalidParameter("adversary '" + spec.kind + "' takes no argument");
  } else if (spec.kind == "grinder") {
    if (arg == "always") {
      spec.predicate.kind = GrinderPredicate::Kind::kAlways;
    } else if (arg == "never") {
      spec.predicate.kind = GrinderPredicate::Kind::kNever;
    } else {
      spec.predicate.kind = GrinderPredicate::Kind::kLeadingZeros;
      spec.predicate.bits = arg.empty() ? 1 : static_cast<unsigned>(ParseUint(arg, "grinder bit count"));
      if (spec.predicate.bits == 0 || spec.predicate.bits > 64) throw InvalidParameter("grinder bits must be 1..64");
    }
  } else if (spec.kind == "withholder") {
    if (arg == "all") {
      spec.refusal.refuse_all = true;
    } else if (arg.empty()) {
      spec.refusal.refused = {{1, 1}};
    } else {
      size_t start = 0;
      while (start <= arg.size()) {
        const size_t comma = std::min(arg.find(',', start), arg.size());
        const std::string item = arg.substr(start, comma - start);
        const size_t dot = item.find('.');
        if (dot == std::string::npos) throw InvalidParameter("withholder entries are round.position");
        const uint64_t round = ParseUint(item.substr(0, dot), "round");
        const uint64_t pos = ParseUint(item.substr(dot + 1), "position");
        if (round == 0 || pos == 0) throw InvalidParameter("withholder rounds and positions are 1-based");
        spec.refusal.refused.emplace_back(round, pos);
        start = comma + 1;
      }
    }
  } else {
    throw InvalidParameter("unknown adversary '" + spec.kind + "'");
  }
  return spec;
}

std::unique_ptr<IopProver> BestIopProver(const Iop& iop) {
  if (const auto* gc = dynamic_cast<const GraphColoringPcp*>(&iop)) {
    if (auto w = FindColoring(gc->instance())) return gc->HonestProver(*w);
    return gc->HonestProver(BestColoring(gc->instance()));
  }
  if (const auto* sc = dynamic_cast<const SumcheckIop*>(&iop)) {
    if (sc->InLanguage()) return sc->HonestProver({});
    return MakeSumcheckOptimalCheater(std::make_shared<SumcheckCheatOracle>(sc->instance()));
  }
  throw InvalidParameter("no prover strategy known for IOP '" + iop.name() + "'");
}

namespace {

std::vector<std::vector<Symbol>> DefaultEquivocationBase(const Iop& iop) {
  const IopSpec& spec = iop.spec();
  if (const auto* gc = dynamic_cast<const GraphColoringPcp*>(&iop)) return {BestColoring(gc->instance())};
  std::vector<std::vector<Symbol>> a;
  for (uint64_t l : spec.proof_lengths) a.emplace_back(l, 0);
  return a;
}

}  // namespace

std::unique_ptr<ArgumentProver> MakeAdversary(const AdversarySpec& spec, const ArgParams& pp,
                                              std::shared_ptr<const Iop> iop) {
  if (spec.kind == "abort") return AlwaysAbort(pp);
  if (spec.kind == "equivocator") {
    auto a = DefaultEquivocationBase(*iop);
    auto b = a;
    for (auto& msg : b)
      for (Symbol& s : msg) s = (s + 1) % pp.spec.alphabet_size;
    return Equivocator(pp, std::move(iop), std::move(a), std::move(b));
  }
  auto base = HonestWrapper(pp, iop, BestIopProver(*iop));
  if (spec.kind == "honest" || spec.kind == "cheater") return base;
  if (spec.kind == "withholder") return Withholder(std::move(base), spec.refusal);
  if (spec.kind == "grinder") return Grinder(std::move(base), spec.predicate);
  throw InvalidParameter("unknown adversary '" + spec.kind + "'");
}

}  // namespace ibcs
