#pragma once

// Seeded Monte-Carlo experiments behind the CLI's soundness and extract
// subcommands. Reports are JSON objects that embed their config; running
// the embedded config again reproduces every number.

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ibcs/adversaries.h"
#include "ibcs/compiler.h"
#include "ibcs/extraction.h"
#include "ibcs/instance_io.h"

namespace ibcs {

std::string ArtifactVersion();

struct ExperimentConfig {
  std::string experiment;  // "soundness" or "extract"
  std::string instance_path;
  IopKind kind = IopKind::kGraphColoring;
  unsigned lambda = 128;
  double epsilon = 0.5;
  uint64_t trials = 1000;
  uint64_t seed = 1;
  // Empty selects the experiment's default suite.
  std::vector<std::string> adversaries;
  // Soundness runs on a satisfiable instance only when set.
  bool allow_satisfiable = false;
  // Hex SHA-256 of the canonical instance encoding; checked on reruns when
  // present.
  std::string instance_digest;

  // Throws InvalidParameter on out-of-range fields.
  void Validate() const;
  nlohmann::ordered_json ToJson() const;
  static ExperimentConfig FromJson(const nlohmann::json& j);
};

std::vector<std::string> DefaultAdversaries(const std::string& experiment);

struct SoundnessOracle {
  std::optional<Rational> eps_iop;
  std::string method;  // "strategy-tree", "sumcheck-dp" or "infeasible"
  std::string note;
};

// Exact optimum of the IOP on this instance: generic strategy-tree search,
// falling back to the sumcheck oracle when the tree is too large.
SoundnessOracle ComputeSoundnessOracle(const Iop& iop);

// The acceptance probability an adversary is built to have, when known
// exactly for this instance.
std::optional<double> KnownAcceptance(const AdversarySpec& spec, const Iop& iop);

nlohmann::ordered_json RunSoundnessExperiment(const ExperimentConfig& config);
nlohmann::ordered_json RunExtractExperiment(const ExperimentConfig& config);
nlohmann::ordered_json RunExperiment(const ExperimentConfig& config);

// Loads the instance named by a config.
std::shared_ptr<const Iop> LoadExperimentInstance(const ExperimentConfig& config);

}  // namespace ibcs
