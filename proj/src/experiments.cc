#include "ibcs/experiments.h"

#include <cmath>

#include "ibcs/error.h"
#include "ibcs/graph_coloring.h"
#include "ibcs/hash.h"
#include "ibcs/sumcheck.h"

#ifndef IBCS_VERSION
#define IBCS_VERSION "0.0.0"
#endif

namespace ibcs {

using ojson = nlohmann::ordered_json;

std::string ArtifactVersion() { return IBCS_VERSION; }

void ExperimentConfig::Validate() const {
  if (experiment != "soundness" && experiment != "extract")
    throw InvalidParameter("experiment must be soundness or extract");
  if (instance_path.empty()) throw InvalidParameter("instance path is required");
  if (lambda != 128 && lambda != 256) throw InvalidParameter("lambda must be 128 or 256");
  if (!(epsilon > 0.0 && epsilon <= 1.0)) throw InvalidParameter("epsilon must lie in (0, 1]");
  if (trials < 1) throw InvalidParameter("trials must be at least 1");
  for (const std::string& a : adversaries) AdversarySpec::Parse(a);
}

ojson ExperimentConfig::ToJson() const {
  ojson j;
  j["experiment"] = experiment;
  j["instance"] = instance_path;
  j["spec"] = IopKindName(kind);
  j["lambda"] = lambda;
  j["epsilon"] = epsilon;
  j["trials"] = trials;
  j["seed"] = seed;
  j["adversaries"] = adversaries;
  j["allow_satisfiable"] = allow_satisfiable;
  j["instance_digest"] = instance_digest;
  return j;
}

ExperimentConfig ExperimentConfig::FromJson(const nlohmann::json& j) {
  ExperimentConfig c;
  try {
    c.experiment = j.at("experiment").get<std::string>();
    c.instance_path = j.at("instance").get<std::string>();
    c.kind = ParseIopKind(j.at("spec").get<std::string>());
    c.lambda = j.at("lambda").get<unsigned>();
    c.epsilon = j.at("epsilon").get<double>();
    c.trials = j.at("trials").get<uint64_t>();
    c.seed = j.at("seed").get<uint64_t>();
    c.adversaries = j.value("adversaries", std::vector<std::string>{});
    c.allow_satisfiable = j.value("allow_satisfiable", false);
    c.instance_digest = j.value("instance_digest", std::string());
  } catch (const nlohmann::json::exception& e) {
    throw InvalidParameter(std::string("bad experiment config: ") + e.what());
  }
  c.Validate();
  return c;
}

std::vector<std::string> DefaultAdversaries(const std::string& experiment) {
  if (experiment == "soundness") return {"cheater", "equivocator", "grinder:1", "withholder", "abort"};
  return {"honest", "grinder:1", "withholder"};
}

SoundnessOracle ComputeSoundnessOracle(const Iop& iop) {
  SoundnessOracle out;
  try {
    out.eps_iop = BruteForceSoundness(iop);
    out.method = "strategy-tree";
    return out;
  } catch (const Infeasible& e) {
    out.note = e.what();
  }
  if (const auto* sc = dynamic_cast<const SumcheckIop*>(&iop)) {
    out.eps_iop = SumcheckCheatOracle(sc->instance()).Optimum();
    out.method = "sumcheck-dp";
    return out;
  }
  out.method = "infeasible";
  return out;
}

std::optional<double> KnownAcceptance(const AdversarySpec& spec, const Iop& iop) {
  if (spec.kind == "abort") return 0.0;
  if (spec.kind == "withholder" && spec.refusal.refuse_all) return 0.0;
  if (!iop.InLanguage()) return std::nullopt;
  if (spec.kind == "honest" || spec.kind == "cheater") return 1.0;
  if (spec.kind == "grinder") return spec.predicate.Measure();
  return std::nullopt;
}

std::shared_ptr<const Iop> LoadExperimentInstance(const ExperimentConfig& config) {
  std::shared_ptr<const Iop> iop = LoadInstanceFile(config.instance_path, config.kind);
  if (!config.instance_digest.empty()) {
    const Digest d = Sha256(iop->EncodeInstance());
    if (ToHex(ByteSpan(d.data(), d.size())) != config.instance_digest)
      throw InvalidParameter("instance file does not match the digest recorded in the config");
  }
  return iop;
}

namespace {

ojson SpecJson(const IopSpec& spec) {
  ojson j;
  j["relation"] = spec.relation;
  j["rounds"] = spec.rounds;
  j["alphabet_size"] = spec.alphabet_size;
  j["symbol_bits"] = spec.symbol_bits;
  j["proof_lengths"] = spec.proof_lengths;
  j["query_counts"] = spec.query_counts;
  j["challenge_bits"] = spec.challenge_bits;
  j["l_max"] = spec.l_max();
  return j;
}

ojson EstimateJson(const Estimate& e) {
  ojson j;
  j["successes"] = e.successes;
  j["trials"] = e.trials;
  j["estimate"] = e.value;
  j["radius"] = e.radius;
  return j;
}

struct Prepared {
  ExperimentConfig config;
  std::shared_ptr<const Iop> iop;
  ArgParams pp;
  std::vector<std::string> adversaries;
};

Prepared Prepare(const ExperimentConfig& config) {
  config.Validate();
  Prepared p{config, LoadExperimentInstance(config), {}, config.adversaries};
  const Bytes encoded = p.iop->EncodeInstance();
  const Digest d = Sha256(encoded);
  p.config.instance_digest = ToHex(ByteSpan(d.data(), d.size()));
  p.pp = ArgSetup(config.lambda, encoded.size(), p.iop->spec());
  if (p.adversaries.empty()) p.adversaries = DefaultAdversaries(config.experiment);
  return p;
}

ojson Header(const Prepared& p) {
  ojson j;
  j["experiment"] = p.config.experiment;
  j["version"] = ArtifactVersion();
  j["config"] = p.config.ToJson();
  j["seed"] = p.config.seed;
  j["trials"] = p.config.trials;
  ojson inst;
  inst["kind"] = IopKindName(p.config.kind);
  inst["digest"] = p.config.instance_digest;
  inst["in_language"] = p.iop->InLanguage();
  j["instance"] = inst;
  j["spec"] = SpecJson(p.iop->spec());
  j["public_parameter_bits"] = 8 * p.pp.Serialize().size();
  return j;
}

Estimate Acceptance(const ArgumentProver& proto, const Prepared& p, uint64_t seed) {
  uint64_t accepts = 0;
  for (uint64_t n = 0; n < p.config.trials; ++n) {
    auto adv = proto.Clone();
    accepts += RunArgument(p.pp, p.iop, *adv, DeriveSeed(seed, "session", n));
  }
  return MakeEstimate(accepts, p.config.trials);
}

}  // namespace

ojson RunSoundnessExperiment(const ExperimentConfig& config) {
  Prepared p = Prepare(config);
  if (p.iop->InLanguage() && !config.allow_satisfiable)
    throw InvalidParameter("instance is in the language; not a soundness instance (pass allow_satisfiable to override)");
  ojson report = Header(p);
  const IopSpec& spec = p.iop->spec();
  const SoundnessOracle oracle = ComputeSoundnessOracle(*p.iop);
  ojson oj;
  oj["method"] = oracle.method;
  if (oracle.eps_iop) {
    oj["eps_iop"] = oracle.eps_iop->ToString();
    oj["eps_iop_value"] = oracle.eps_iop->ToDouble();
  } else {
    oj["eps_iop"] = nullptr;
  }
  if (!oracle.note.empty()) oj["note"] = oracle.note;
  report["oracle"] = oj;

  const double radius = HoeffdingRadius(config.trials);
  std::optional<double> threshold;
  if (oracle.eps_iop) {
    const double e = oracle.eps_iop->ToDouble();
    const TheoremBound b = TheoremBounds({e, e, spec.rounds, spec.l_max(), 0.0, 0.0, config.epsilon});
    threshold = b.eps_arg + 3 * radius;
    ojson bj;
    bj["eps_iop"] = e;
    bj["vc_term"] = b.vc_term;
    bj["eps"] = config.epsilon;
    bj["eps_arg"] = b.eps_arg;
    bj["radius"] = radius;
    bj["threshold"] = *threshold;
    report["bound"] = bj;
  } else {
    report["bound"] = nullptr;
  }

  ojson advs = ojson::array();
  double best = 0;
  bool pass = threshold.has_value();
  for (size_t a = 0; a < p.adversaries.size(); ++a) {
    const AdversarySpec as = AdversarySpec::Parse(p.adversaries[a]);
    auto proto = MakeAdversary(as, p.pp, p.iop);
    const Estimate e = Acceptance(*proto, p, DeriveSeed(config.seed, "soundness-adversary", a));
    ojson aj;
    aj["name"] = as.ToString();
    aj.update(EstimateJson(e));
    aj["pass"] = threshold ? ojson(e.value <= *threshold) : ojson(nullptr);
    if (threshold && e.value > *threshold) pass = false;
    best = std::max(best, e.value);
    advs.push_back(aj);
  }
  report["adversaries"] = advs;
  report["best_acceptance"] = best;
  report["pass"] = threshold ? ojson(pass) : ojson(nullptr);
  return report;
}

ojson RunExtractExperiment(const ExperimentConfig& config) {
  Prepared p = Prepare(config);
  ojson report = Header(p);
  const IopSpec& spec = p.iop->spec();
  const size_t k = spec.rounds;
  const RewindBudget budget = RewindBudget::For(spec.l_max(), k, config.epsilon);
  ojson bj;
  bj["T"] = budget.T;
  bj["eps_over_2k"] = budget.eps_over_2k;
  bj["eps"] = config.epsilon;
  report["budget"] = bj;
  const bool knowledge = dynamic_cast<const GraphColoringPcp*>(p.iop.get()) != nullptr;

  bool pass = true;
  ojson advs = ojson::array();
  for (size_t a = 0; a < p.adversaries.size(); ++a) {
    const AdversarySpec as = AdversarySpec::Parse(p.adversaries[a]);
    auto proto = MakeAdversary(as, p.pp, p.iop);
    const uint64_t adv_seed = DeriveSeed(config.seed, "extract-adversary", a);
    ojson aj;
    aj["name"] = as.ToString();

    std::vector<EventCounters> levels;
    ojson hybrids = ojson::array();
    for (size_t level = 0; level <= k; ++level) {
      levels.push_back(RunEventsExperiment(*proto, p.pp, p.iop, level, budget, config.trials, adv_seed));
      ojson hj;
      hj["level"] = level;
      hj.update(EstimateJson(MakeEstimate(levels.back().hybrid_accepts, levels.back().trials)));
      hybrids.push_back(hj);
    }
    aj["hybrids"] = hybrids;
    const Estimate h0 = MakeEstimate(levels.front().hybrid_accepts, levels.front().trials);
    const Estimate hk = MakeEstimate(levels.back().hybrid_accepts, levels.back().trials);
    ojson chain;
    chain["h0"] = h0.value;
    chain["hk"] = hk.value;
    chain["slack"] = config.epsilon + h0.radius + hk.radius;
    chain["pass"] = h0.value <= hk.value + config.epsilon + h0.radius + hk.radius;
    pass = pass && chain["pass"].get<bool>();
    aj["chain"] = chain;

    ojson events = ojson::array();
    for (size_t level = 1; level <= k; ++level) {
      const EventCounters& c = levels[level];
      const double rate = static_cast<double>(c.missing) / static_cast<double>(c.trials);
      const double bound = static_cast<double>(spec.proof_lengths[level - 1]) / static_cast<double>(budget.T);
      const double radius = HoeffdingRadius(c.trials);
      ojson ej;
      ej["level"] = level;
      ej["trials"] = c.trials;
      ej["voided"] = c.voided;
      ej["main_accepts"] = c.main_accepts;
      ej["missing"] = c.missing;
      ej["missing_rate"] = rate;
      ej["missing_bound"] = bound;
      ej["radius"] = radius;
      ej["disagreements"] = c.disagreements;
      ej["binding_breaks"] = c.binding_breaks;
      ej["snapshot_failures"] = c.snapshot_failures;
      ej["max_appends"] = c.max_appends;
      ej["proof_length"] = spec.proof_lengths[level - 1];
      const bool ok = rate <= bound + 3 * radius && c.binding_breaks == 0 && c.snapshot_failures == 0 &&
                      c.max_appends <= spec.proof_lengths[level - 1];
      ej["pass"] = ok;
      pass = pass && ok;
      events.push_back(ej);
    }
    aj["events"] = events;

    if (knowledge) {
      uint64_t successes = 0;
      const uint64_t kseed = DeriveSeed(adv_seed, "knowledge", 0);
      for (uint64_t n = 0; n < config.trials; ++n)
        successes += ExtractKnowledge(*proto, p.pp, p.iop, budget, DeriveSeed(kseed, "seed", n)).success;
      const Estimate s = MakeEstimate(successes, config.trials);
      const Estimate acc = Acceptance(*proto, p, DeriveSeed(adv_seed, "acceptance", 0));
      const std::optional<double> known = KnownAcceptance(as, *p.iop);
      const double target = known ? *known - config.epsilon - 3 * s.radius
                                  : acc.value - config.epsilon - 3 * (s.radius + acc.radius);
      ojson kj;
      kj["success"] = EstimateJson(s);
      kj["acceptance"] = EstimateJson(acc);
      kj["known_acceptance"] = known ? ojson(*known) : ojson(nullptr);
      kj["target"] = target;
      kj["pass"] = s.value >= target;
      pass = pass && kj["pass"].get<bool>();
      aj["knowledge"] = kj;
    } else {
      aj["knowledge"] = nullptr;
    }
    advs.push_back(aj);
  }
  report["adversaries"] = advs;
  report["pass"] = pass;
  return report;
}

ojson RunExperiment(const ExperimentConfig& config) {
  if (config.experiment == "soundness") return RunSoundnessExperiment(config);
  if (config.experiment == "extract") return RunExtractExperiment(config);
  throw InvalidParameter("unknown experiment '" + config.experiment + "'");
}

}  // namespace ibcs
