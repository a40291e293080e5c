#include "ibcs/instance_io.h"

#include <fstream>
#include <iterator>
#include <sstream>

#include "ibcs/error.h"

namespace ibcs {
namespace {

std::string StripComments(std::string_view text) {
  std::string out;
  bool comment = false;
  for (char c : text) {
    if (c == '#') comment = true;
    if (c == '\n') comment = false;
    if (!comment) out.push_back(c);
  }
  return out;
}

}  // namespace

IopKind ParseIopKind(std::string_view name) {
  if (name == "gc") return IopKind::kGraphColoring;
  if (name == "sumcheck") return IopKind::kSumcheck;
  throw InvalidParameter("unknown IOP '" + std::string(name) + "' (expected gc or sumcheck)");
}

std::string IopKindName(IopKind kind) { return kind == IopKind::kGraphColoring ? "gc" : "sumcheck"; }

GraphColoringInstance ParseGraphText(std::string_view text) {
  std::istringstream in(StripComments(text));
  std::string line;
  std::optional<uint32_t> vertices;
  std::vector<std::pair<uint32_t, uint32_t>> edges;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag)) continue;
    auto fail = [&](const std::string& msg) {
      throw InvalidInstance("graph line " + std::to_string(line_no) + ": " + msg);
    };
    if (tag == "v") {
      uint64_t n;
      if (vertices || !(ls >> n) || n > UINT32_MAX) fail("bad vertex header");
      vertices = static_cast<uint32_t>(n);
    } else if (tag == "e") {
      uint64_t u, v;
      if (!vertices) fail("edge before vertex header");
      if (!(ls >> u >> v) || u > UINT32_MAX || v > UINT32_MAX) fail("bad edge");
      edges.emplace_back(static_cast<uint32_t>(u), static_cast<uint32_t>(v));
    } else {
      fail("unknown record '" + tag + "'");
    }
    std::string extra;
    if (ls >> extra) fail("trailing tokens");
  }
  if (!vertices) throw InvalidInstance("graph: missing vertex header");
  return GraphColoringInstance::Make(*vertices, std::move(edges));
}

SumcheckInstance ParseSumcheckText(std::string_view text) {
  std::istringstream in(StripComments(text));
  uint64_t p, n, d, s;
  if (!(in >> p >> n >> d >> s)) throw InvalidInstance("sumcheck: expected header 'p n d S'");
  if (n > 64 || d > 1024) throw InvalidInstance("sumcheck: header out of range");
  std::vector<uint64_t> coeffs;
  uint64_t c;
  while (in >> c) coeffs.push_back(c);
  if (!in.eof()) throw InvalidInstance("sumcheck: non-numeric coefficient");
  return SumcheckInstance::Make(p, static_cast<uint32_t>(n), static_cast<uint32_t>(d), std::move(coeffs), s);
}

std::unique_ptr<Iop> DecodeInstance(ByteSpan data) {
  ByteReader r(data);
  const uint8_t kind = r.U8();
  if (kind == 1) {
    const uint32_t vertices = r.U32();
    const uint32_t m = r.U32();
    if (m > r.remaining() / 8) throw DecodeError("edge count exceeds payload", r.offset());
    std::vector<std::pair<uint32_t, uint32_t>> edges(m);
    for (auto& [u, v] : edges) {
      u = r.U32();
      v = r.U32();
    }
    r.ExpectEnd();
    auto inst = GraphColoringInstance::Make(vertices, edges);
    if (inst.edges != edges) throw DecodeError("edges not in canonical order", 9);
    return std::make_unique<GraphColoringPcp>(std::move(inst));
  }
  if (kind == 2) {
    const uint64_t p = r.U64();
    const uint32_t n = r.U32();
    const uint32_t d = r.U32();
    const uint64_t s = r.U64();
    std::vector<uint64_t> coeffs;
    while (!r.done()) coeffs.push_back(r.U64());
    return std::make_unique<SumcheckIop>(SumcheckInstance::Make(p, n, d, std::move(coeffs), s));
  }
  throw DecodeError("unknown instance kind", 0);
}

std::unique_ptr<Iop> LoadInstanceFile(const std::string& path, IopKind kind) {
  const std::string text = ReadFile(path);
  if (kind == IopKind::kGraphColoring) return std::make_unique<GraphColoringPcp>(ParseGraphText(text));
  return std::make_unique<SumcheckIop>(ParseSumcheckText(text));
}

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidParameter("cannot open " + path);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

Bytes ReadBinaryFile(const std::string& path) {
  const std::string s = ReadFile(path);
  return Bytes(s.begin(), s.end());
}

void WriteBinaryFile(const std::string& path, ByteSpan data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InvalidParameter("cannot write " + path);
  out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
  if (!out) throw InvalidParameter("write failed for " + path);
}

}  // namespace ibcs
