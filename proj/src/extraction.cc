#include "ibcs/extraction.h"

#include <cmath>
#include <utility>

#include "ibcs/error.h"
#include "ibcs/hash.h"

namespace ibcs {

bool KnowledgeSet::Offer(const vc::Opening& opening) {
  bool fresh = false;
  for (uint64_t pos : opening.positions) {
    if (pos == 0 || pos > covered_.size()) throw InvalidParameter("knowledge triple outside the proof string");
    if (!covered_[pos - 1]) fresh = true;
  }
  if (!fresh) return false;
  for (uint64_t pos : opening.positions) {
    if (!covered_[pos - 1]) {
      covered_[pos - 1] = true;
      ++covered_count_;
    }
  }
  triples_.push_back(opening);
  return true;
}

PositionSet KnowledgeSet::coverage() const {
  PositionSet out;
  for (uint64_t j = 0; j < covered_.size(); ++j)
    if (covered_[j]) out.push_back(j + 1);
  return out;
}

bool KnowledgeSet::CoversAll(const PositionSet& q) const {
  for (uint64_t pos : q)
    if (!Covers(pos)) return false;
  return true;
}

ExtractedOracle FillOracle(size_t round, const KnowledgeSet& k) {
  ExtractedOracle out;
  out.round = round;
  out.proof.round = round;
  out.proof.symbols.assign(k.length(), kPaddingSymbol);
  std::vector<bool> written(k.length(), false);
  for (const vc::Opening& op : k.triples()) {
    for (size_t j = 0; j < op.positions.size(); ++j) {
      const uint64_t pos = op.positions[j];
      if (written[pos - 1]) continue;
      written[pos - 1] = true;
      out.proof.symbols[pos - 1] = op.answers[j];
    }
  }
  out.covered = k.coverage();
  return out;
}

RewindBudget RewindBudget::For(uint64_t l_max, size_t rounds, double eps) {
  if (!(eps > 0.0 && eps <= 1.0)) throw InvalidParameter("epsilon must lie in (0, 1]");
  if (l_max == 0 || rounds == 0) throw InvalidParameter("l_max and k must be positive");
  RewindBudget b;
  b.eps_over_2k = eps / (2.0 * static_cast<double>(rounds));
  const double ratio = static_cast<double>(l_max) / b.eps_over_2k;
  const double nearest = std::round(ratio);
  b.T = static_cast<uint64_t>(std::fabs(ratio - nearest) <= 1e-9 * ratio ? nearest : std::ceil(ratio));
  return b;
}

bool HybridDecision(const ArgParams& pp, const Iop& iop, const std::vector<ProofString>& extracted, size_t vc_from,
                    const std::vector<Digest>& commitments, const std::vector<Challenge>& challenges,
                    const std::optional<FinalResponse>& response) {
  const IopSpec& spec = pp.spec;
  const size_t k = spec.rounds;
  if (vc_from == 0 || vc_from > extracted.size() + 1) throw InvalidParameter("unopened round without extraction");
  if (!response || response->size() != k || commitments.size() != k || challenges.size() != k) return false;
  QueryPlan plan;
  try {
    plan = iop.Query(challenges);
  } catch (const std::exception&) {
    return false;
  }
  Answers answers(k);
  for (size_t j = 1; j <= k; ++j) {
    const PositionSet& q = plan.rounds[j - 1];
    for (uint64_t pos : q)
      if (pos == 0 || pos > spec.proof_lengths[j - 1]) return false;
    const vc::Opening& op = (*response)[j - 1];
    if (j >= vc_from) {
      if (op.positions != q || op.answers.size() != q.size()) return false;
      if (!vc::Check(pp.vc, vc::Commitment{commitments[j - 1], pp.vc.capacity}, op)) return false;
    }
    if (j <= extracted.size()) {
      for (uint64_t pos : q) answers[j - 1].push_back(extracted[j - 1].symbols.at(pos - 1));
    } else {
      answers[j - 1] = op.answers;
    }
  }
  return iop.Decide(challenges, answers);
}

Continuation RunContinuation(ArgumentProver& adv, const ReductionContext& ctx, RandomStream& rng) {
  const IopSpec& spec = ctx.pp.spec;
  const size_t k = spec.rounds;
  Continuation run;
  run.commitments = ctx.commitments;
  run.challenges = ctx.challenges;
  try {
    for (size_t j = ctx.round(); j <= k; ++j) {
      const uint64_t bits = spec.challenge_bits[j - 1];
      run.challenges.push_back(Challenge{bits, rng.Bits(bits)});
      if (j < k) {
        run.commitments.push_back(adv.Commit(&run.challenges.back()));
      } else {
        run.response = adv.Respond(run.challenges.back());
      }
    }
    run.completed = true;
  } catch (const std::exception&) {
    run.completed = false;
  }
  return run;
}

bool GamePredicate(const ReductionContext& ctx, const Continuation& run) {
  if (!run.completed) return false;
  return HybridDecision(ctx.pp, *ctx.iop, ctx.extracted, ctx.round(), run.commitments, run.challenges, run.response);
}

namespace {

Digest StateHash(const ArgumentProver& adv) { return Sha256(adv.SerializeState()); }

void CheckContext(const ReductionContext& ctx) {
  const size_t i = ctx.round();
  if (i == 0 || i > ctx.pp.spec.rounds) throw InvalidParameter("context is not at a protocol round");
  if (ctx.challenges.size() != i - 1 || ctx.extracted.size() != i - 1)
    throw InvalidParameter("context challenges/extracted strings do not match its round");
}

}  // namespace

SamplerResult Sample(const ArgumentProver& adv, const ReductionContext& ctx, uint64_t t, uint64_t seed) {
  CheckContext(ctx);
  const size_t i = ctx.round();
  SamplerResult out{KnowledgeSet(ctx.pp.spec.proof_lengths[i - 1]), {}};
  RandomStream rng(seed);
  const Digest before = StateHash(adv);
  for (uint64_t it = 0; it < t; ++it) {
    auto copy = adv.Clone();
    const Continuation run = RunContinuation(*copy, ctx, rng);
    ++out.stats.iterations;
    if (!run.completed) {
      ++out.stats.voided;
    } else if (GamePredicate(ctx, run)) {
      ++out.stats.accepted;
      if (out.knowledge.Offer((*run.response)[i - 1])) ++out.stats.appended;
    }
    if (StateHash(adv) != before) out.stats.snapshot_intact = false;
  }
  return out;
}

ReductorResult Reduce(const ArgumentProver& adv, const ReductionContext& ctx, const RewindBudget& budget,
                      uint64_t seed) {
  ReductorResult out{ExtractedOracle{}, 0, SamplerResult{KnowledgeSet(0), {}}};
  out.t = RandomStream(DeriveSeed(seed, "stop-time", 0)).Between(0, budget.T);
  out.sampler = Sample(adv, ctx, out.t, DeriveSeed(seed, "sampler", 0));
  out.oracle = FillOracle(ctx.round(), out.sampler.knowledge);
  return out;
}

namespace {

class ExtractedIopProver final : public IopProver {
 public:
  ExtractedIopProver(std::unique_ptr<ArgumentProver> adv, ReductionContext ctx, RewindBudget budget, uint64_t seed)
      : adv_(std::move(adv)), ctx_(std::move(ctx)), budget_(budget), seed_(seed) {}
  ExtractedIopProver(const ExtractedIopProver& other)
      : adv_(other.adv_->Clone()),
        ctx_(other.ctx_),
        budget_(other.budget_),
        seed_(other.seed_),
        crashed_(other.crashed_) {}

  ProofString Start() override {
    if (ctx_.round() != 0 || crashed_) throw ProtocolViolation("prover already started");
    return Advance(nullptr);
  }

  ProofString Next(const Challenge& previous) override {
    const IopSpec& spec = ctx_.pp.spec;
    const size_t done = ctx_.extracted.size();
    if (done == 0 || done >= spec.rounds) throw ProtocolViolation("no such round");
    if (previous.bits != spec.challenge_bits[done - 1] || !previous.WellFormed())
      throw ProtocolViolation("challenge has wrong length");
    ctx_.challenges.push_back(previous);
    return Advance(&previous);
  }

  std::unique_ptr<IopProver> Clone() const override { return std::make_unique<ExtractedIopProver>(*this); }

  Bytes SerializeState() const override {
    Bytes out;
    PutU8(out, crashed_ ? 1 : 0);
    PutU64(out, ctx_.commitments.size());
    for (const Digest& d : ctx_.commitments) PutBytes(out, ByteSpan(d.data(), d.size()));
    for (const Challenge& c : ctx_.challenges) {
      PutU64(out, c.bits);
      PutBytes(out, c.data);
    }
    for (const ProofString& p : ctx_.extracted)
      for (Symbol s : p.symbols) PutU64(out, s);
    const Bytes inner = adv_->SerializeState();
    PutU64(out, inner.size());
    PutBytes(out, inner);
    return out;
  }

 private:
  ProofString Advance(const Challenge* previous) {
    const size_t i = ctx_.extracted.size() + 1;
    ProofString pi{i, std::vector<Symbol>(ctx_.pp.spec.proof_lengths[i - 1], kPaddingSymbol)};
    if (!crashed_) {
      try {
        ctx_.commitments.push_back(adv_->Commit(previous));
        pi = Reduce(*adv_, ctx_, budget_, DeriveSeed(seed_, "round", i)).oracle.proof;
      } catch (const std::exception&) {
        crashed_ = true;
      }
    }
    if (crashed_) ctx_.commitments.resize(i, Digest{});
    ctx_.extracted.push_back(pi);
    return pi;
  }

  std::unique_ptr<ArgumentProver> adv_;
  ReductionContext ctx_;
  RewindBudget budget_;
  uint64_t seed_;
  bool crashed_ = false;
};

}  // namespace

std::unique_ptr<IopProver> BuildIopProver(const ArgumentProver& adv, const ArgParams& pp,
                                          std::shared_ptr<const Iop> iop, const RewindBudget& budget, uint64_t seed) {
  ReductionContext ctx{pp, std::move(iop), {}, {}, {}};
  return std::make_unique<ExtractedIopProver>(adv.Clone(), std::move(ctx), budget, seed);
}

HybridTrial RunHybridTrial(const ArgumentProver& adv, const ArgParams& pp, std::shared_ptr<const Iop> iop,
                           size_t level, const RewindBudget& budget, uint64_t seed) {
  const IopSpec& spec = pp.spec;
  const size_t k = spec.rounds;
  if (level > k) throw InvalidParameter("hybrid level exceeds the round count");
  HybridTrial out;
  ReductionContext ctx{pp, iop, {}, {}, {}};
  std::optional<ReductorResult> at_level;
  std::optional<FinalResponse> response;
  auto a = adv.Clone();
  RandomStream main(DeriveSeed(seed, "main", 0));
  try {
    const Challenge* previous = nullptr;
    for (size_t i = 1; i <= k; ++i) {
      ctx.commitments.push_back(a->Commit(previous));
      if (i <= level) {
        ReductorResult r = Reduce(*a, ctx, budget, DeriveSeed(seed, "reductor", i));
        out.snapshot_intact = out.snapshot_intact && r.sampler.stats.snapshot_intact;
        ctx.extracted.push_back(r.oracle.proof);
        if (i == level) at_level = std::move(r);
      }
      const uint64_t bits = spec.challenge_bits[i - 1];
      ctx.challenges.push_back(Challenge{bits, main.Bits(bits)});
      previous = &ctx.challenges.back();
    }
    response = a->Respond(ctx.challenges.back());
  } catch (const std::exception&) {
    out.voided = true;
    return out;
  }
  out.accept = HybridDecision(pp, *iop, ctx.extracted, 1, ctx.commitments, ctx.challenges, response);
  if (level == 0) return out;

  const std::vector<ProofString> before(ctx.extracted.begin(), ctx.extracted.begin() + (level - 1));
  out.main_f_accept = HybridDecision(pp, *iop, before, level, ctx.commitments, ctx.challenges, response);
  out.appends = at_level->sampler.stats.appended;
  if (!out.main_f_accept) return out;

  const KnowledgeSet& known = at_level->sampler.knowledge;
  const vc::Opening& main_open = (*response)[level - 1];
  const ProofString& tilde = at_level->oracle.proof;
  const vc::Commitment cm{ctx.commitments[level - 1], pp.vc.capacity};
  out.missing = !known.CoversAll(main_open.positions);
  for (size_t j = 0; j < main_open.positions.size(); ++j) {
    const uint64_t q = main_open.positions[j];
    if (!known.Covers(q) || main_open.answers[j] == tilde.symbols[q - 1]) continue;
    out.disagreement = true;
    for (const vc::Opening& t : known.triples()) {
      bool holds = false;
      for (size_t m = 0; m < t.positions.size(); ++m)
        if (t.positions[m] == q && t.answers[m] != main_open.answers[j]) holds = true;
      if (holds && vc::Check(pp.vc, cm, t) && vc::Check(pp.vc, cm, main_open)) out.binding_break = true;
    }
  }
  return out;
}

Estimate MakeEstimate(uint64_t successes, uint64_t trials, double delta) {
  if (trials == 0) throw InvalidParameter("an estimate needs at least one trial");
  Estimate e;
  e.successes = successes;
  e.trials = trials;
  e.value = static_cast<double>(successes) / static_cast<double>(trials);
  e.radius = HoeffdingRadius(trials, delta);
  return e;
}

EventCounters RunEventsExperiment(const ArgumentProver& adv, const ArgParams& pp, std::shared_ptr<const Iop> iop,
                                  size_t level, const RewindBudget& budget, uint64_t trials, uint64_t seed) {
  EventCounters c;
  c.level = level;
  const uint64_t level_seed = DeriveSeed(seed, "hybrid-level", level);
  for (uint64_t n = 0; n < trials; ++n) {
    const HybridTrial t = RunHybridTrial(adv, pp, iop, level, budget, DeriveSeed(level_seed, "trial", n));
    ++c.trials;
    c.voided += t.voided;
    c.hybrid_accepts += t.accept;
    c.main_accepts += t.main_f_accept;
    c.disagreements += t.disagreement;
    c.missing += t.missing;
    c.binding_breaks += t.binding_break;
    c.snapshot_failures += !t.snapshot_intact;
    c.max_appends = std::max(c.max_appends, t.appends);
  }
  return c;
}

Estimate HybridValue(const ArgumentProver& adv, const ArgParams& pp, std::shared_ptr<const Iop> iop, size_t level,
                     const RewindBudget& budget, uint64_t trials, uint64_t seed) {
  const EventCounters c = RunEventsExperiment(adv, pp, std::move(iop), level, budget, trials, seed);
  return MakeEstimate(c.hybrid_accepts, c.trials);
}

TheoremBound TheoremBounds(const BoundInputs& in) {
  const auto unit = [](double v, const char* name) {
    if (!(v >= 0.0 && v <= 1.0)) throw InvalidParameter(std::string(name) + " must lie in [0, 1]");
  };
  unit(in.eps_iop, "eps_IOP");
  unit(in.kappa_iop, "kappa_IOP");
  unit(in.eps_vc, "eps_VC");
  unit(in.eps_collapse, "eps_VCCollapse");
  unit(in.eps, "eps");
  if (in.rounds == 0 || in.l_max == 0) throw InvalidParameter("k and l_max must be positive");
  TheoremBound b;
  b.vc_term = static_cast<double>(in.rounds) * (in.eps_vc + static_cast<double>(in.l_max) * in.eps_collapse);
  b.eps_arg = in.eps_iop + b.vc_term + in.eps;
  b.kappa_arg = in.kappa_iop + b.vc_term + in.eps;
  return b;
}

KnowledgeOutcome ExtractKnowledge(const ArgumentProver& adv, const ArgParams& pp, std::shared_ptr<const Iop> iop,
                                  const RewindBudget& budget, uint64_t seed, size_t attempts) {
  KnowledgeOutcome out;
  for (size_t a = 0; a < attempts; ++a) {
    ++out.attempts;
    auto prover = BuildIopProver(adv, pp, iop, budget, DeriveSeed(seed, "extract-attempt", a));
    const ProofString first = prover->Start();
    Witness w = iop->ExtractWitness(first);
    if (iop->CheckWitness(w)) {
      out.success = true;
      out.witness = std::move(w);
      return out;
    }
    out.witness = std::move(w);
  }
  out.failure = "no valid witness after " + std::to_string(attempts) + " attempts";
  return out;
}

}  // namespace ibcs
