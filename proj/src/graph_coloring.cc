#include "ibcs/graph_coloring.h"

#include <algorithm>

#include "ibcs/error.h"

namespace ibcs {

GraphColoringInstance GraphColoringInstance::Make(uint32_t vertices,
                                                  std::vector<std::pair<uint32_t, uint32_t>> edges) {
  if (edges.empty()) throw InvalidInstance("graph has no edges");
  for (auto& [u, v] : edges) {
    if (u >= vertices || v >= vertices) throw InvalidInstance("edge endpoint out of range");
    if (u == v) throw InvalidInstance("self-loop");
    if (u > v) std::swap(u, v);
  }
  std::sort(edges.begin(), edges.end());
  if (std::adjacent_find(edges.begin(), edges.end()) != edges.end()) throw InvalidInstance("duplicate edge");
  return GraphColoringInstance{vertices, std::move(edges)};
}

GraphColoringInstance CompleteGraph(uint32_t n) {
  std::vector<std::pair<uint32_t, uint32_t>> e;
  for (uint32_t u = 0; u < n; ++u)
    for (uint32_t v = u + 1; v < n; ++v) e.emplace_back(u, v);
  return GraphColoringInstance::Make(n, std::move(e));
}

GraphColoringInstance PetersenGraph() {
  std::vector<std::pair<uint32_t, uint32_t>> e;
  for (uint32_t i = 0; i < 5; ++i) {
    e.emplace_back(i, (i + 1) % 5);          // outer cycle
    e.emplace_back(i, i + 5);                // spokes
    e.emplace_back(5 + i, 5 + (i + 2) % 5);  // inner pentagram
  }
  return GraphColoringInstance::Make(10, std::move(e));
}

GraphColoringInstance CycleGraph(uint32_t n) {
  std::vector<std::pair<uint32_t, uint32_t>> e;
  for (uint32_t i = 0; i < n; ++i) e.emplace_back(i, (i + 1) % n);
  return GraphColoringInstance::Make(n, std::move(e));
}

size_t SatisfiedEdges(const GraphColoringInstance& g, const Witness& coloring) {
  if (coloring.size() != g.vertices) return 0;
  size_t ok = 0;
  for (auto [u, v] : g.edges) {
    const Symbol a = coloring[u], b = coloring[v];
    if (a < GraphColoringPcp::kColors && b < GraphColoringPcp::kColors && a != b) ++ok;
  }
  return ok;
}

bool IsProperColoring(const GraphColoringInstance& g, const Witness& coloring) {
  return coloring.size() == g.vertices && SatisfiedEdges(g, coloring) == g.edges.size();
}

namespace {

template <typename Visit>
void ForEachColoring(uint32_t n, Visit&& visit) {
  Witness c(n, 0);
  for (;;) {
    if (!visit(c)) return;
    size_t d = 0;
    while (d < n && ++c[d] == GraphColoringPcp::kColors) c[d++] = 0;
    if (d == n) return;
  }
}

}  // namespace

std::optional<Witness> FindColoring(const GraphColoringInstance& g) {
  std::optional<Witness> found;
  ForEachColoring(g.vertices, [&](const Witness& c) {
    if (IsProperColoring(g, c)) found = c;
    return !found;
  });
  return found;
}

Witness BestColoring(const GraphColoringInstance& g) {
  Witness best(g.vertices, 0);
  size_t best_count = SatisfiedEdges(g, best);
  ForEachColoring(g.vertices, [&](const Witness& c) {
    const size_t s = SatisfiedEdges(g, c);
    if (s > best_count) {
      best_count = s;
      best = c;
    }
    return best_count < g.edges.size();
  });
  return best;
}

namespace {

class ColoringProver final : public IopProver {
 public:
  explicit ColoringProver(Witness coloring) : coloring_(std::move(coloring)) {}

  ProofString Start() override {
    if (started_) throw ProtocolViolation("prover already started");
    started_ = true;
    return ProofString{1, coloring_};
  }
  ProofString Next(const Challenge&) override {
    throw ProtocolViolation("graph coloring PCP has a single round");
  }
  std::unique_ptr<IopProver> Clone() const override { return std::make_unique<ColoringProver>(*this); }
  Bytes SerializeState() const override {
    Bytes out;
    PutU8(out, started_ ? 1 : 0);
    for (Symbol s : coloring_) PutU64(out, s);
    return out;
  }

 private:
  Witness coloring_;
  bool started_ = false;
};

}  // namespace

GraphColoringPcp::GraphColoringPcp(GraphColoringInstance instance) : instance_(std::move(instance)) {
  if (instance_.edges.empty()) throw InvalidInstance("graph has no edges");
  spec_.relation = "graph-3-coloring";
  spec_.rounds = 1;
  spec_.alphabet_size = kColors;
  spec_.symbol_bits = 2;
  spec_.proof_lengths = {instance_.vertices};
  spec_.challenge_bits = {CeilLog2(instance_.edges.size()) + 64};
  spec_.query_counts = {2};
  spec_.Validate();
}

uint64_t GraphColoringPcp::ChallengeSpaceSize(size_t round) const {
  if (round != 1) throw InvalidParameter("graph coloring PCP has a single round");
  return instance_.edges.size();
}

QueryPlan GraphColoringPcp::Query(std::span<const Challenge> randomness) const {
  CheckRandomnessShape(spec_, randomness);
  const auto [u, v] = instance_.edges[ChallengeElement(randomness[0], instance_.edges.size())];
  return QueryPlan{{PositionSet{uint64_t{u} + 1, uint64_t{v} + 1}}};
}

bool GraphColoringPcp::Decide(std::span<const Challenge> randomness, const Answers& answers) const {
  try {
    CheckRandomnessShape(spec_, randomness);
  } catch (const ProtocolViolation&) {
    return false;
  }
  if (answers.size() != 1 || answers[0].size() != 2) return false;
  const Symbol a = answers[0][0], b = answers[0][1];
  return a < kColors && b < kColors && a != b;
}

bool GraphColoringPcp::InLanguage() const { return FindColoring(instance_).has_value(); }

std::unique_ptr<IopProver> GraphColoringPcp::HonestProver(const Witness& w) const {
  if (w.size() != instance_.vertices) throw InvalidInstance("coloring length does not match vertex count");
  for (Symbol s : w) {
    if (s >= kColors) throw InvalidInstance("color out of range");
  }
  return std::make_unique<ColoringProver>(w);
}

Bytes GraphColoringPcp::EncodeInstance() const {
  Bytes out;
  PutU8(out, 1);
  PutU32(out, instance_.vertices);
  PutU32(out, static_cast<uint32_t>(instance_.edges.size()));
  for (auto [u, v] : instance_.edges) {
    PutU32(out, u);
    PutU32(out, v);
  }
  return out;
}

}  // namespace ibcs
