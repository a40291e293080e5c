#pragma once

// One-round graph 3-coloring PCP: the proof is a coloring, the verifier
// reads the two endpoints of a uniformly chosen edge and accepts iff their
// colors differ. Vertices are 0-based; proof positions are vertex + 1.

#include <optional>
#include <utility>
#include <vector>

#include "ibcs/iop.h"

namespace ibcs {

struct GraphColoringInstance {
  uint32_t vertices = 0;
  std::vector<std::pair<uint32_t, uint32_t>> edges;  // u < v, lexicographic, unique

  // Normalizes edge orientation and order; rejects self-loops, duplicate
  // edges, out-of-range endpoints and empty edge lists.
  static GraphColoringInstance Make(uint32_t vertices, std::vector<std::pair<uint32_t, uint32_t>> edges);

  bool operator==(const GraphColoringInstance&) const = default;
};

GraphColoringInstance CompleteGraph(uint32_t n);
GraphColoringInstance PetersenGraph();
GraphColoringInstance CycleGraph(uint32_t n);

bool IsProperColoring(const GraphColoringInstance& g, const Witness& coloring);
size_t SatisfiedEdges(const GraphColoringInstance& g, const Witness& coloring);
// Exhaustive search; first proper coloring in lexicographic order.
std::optional<Witness> FindColoring(const GraphColoringInstance& g);
// Exhaustive search for a coloring with the most satisfied edges.
Witness BestColoring(const GraphColoringInstance& g);

class GraphColoringPcp final : public Iop {
 public:
  static constexpr uint64_t kColors = 3;

  explicit GraphColoringPcp(GraphColoringInstance instance);

  const IopSpec& spec() const override { return spec_; }
  std::string name() const override { return "gc"; }
  QueryPlan Query(std::span<const Challenge> randomness) const override;
  bool Decide(std::span<const Challenge> randomness, const Answers& answers) const override;
  uint64_t ChallengeSpaceSize(size_t round) const override;
  bool InLanguage() const override;
  bool CheckWitness(const Witness& w) const override { return IsProperColoring(instance_, w); }
  Witness ExtractWitness(const ProofString& first) const override { return first.symbols; }
  std::unique_ptr<IopProver> HonestProver(const Witness& w) const override;
  Bytes EncodeInstance() const override;

  const GraphColoringInstance& instance() const { return instance_; }

 private:
  GraphColoringInstance instance_;
  IopSpec spec_;
};

}  // namespace ibcs
