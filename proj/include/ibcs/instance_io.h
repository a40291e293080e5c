#pragma once

// Instance files. Binary form is the canonical encoding carried in 0x10
// frames (Iop::EncodeInstance). Text forms:
//
//   graph:     "v <n>" header, then one "e <u> <v>" line per edge
//   sumcheck:  "p n d S" header, then (d+1)^n coefficients, any whitespace
//
// '#' starts a comment in both text forms.

#include <memory>
#include <string>
#include <string_view>

#include "ibcs/graph_coloring.h"
#include "ibcs/iop.h"
#include "ibcs/sumcheck.h"

namespace ibcs {

enum class IopKind { kGraphColoring, kSumcheck };

IopKind ParseIopKind(std::string_view name);
std::string IopKindName(IopKind kind);

GraphColoringInstance ParseGraphText(std::string_view text);
SumcheckInstance ParseSumcheckText(std::string_view text);

std::unique_ptr<Iop> DecodeInstance(ByteSpan data);
// Loads a text instance file of the given kind.
std::unique_ptr<Iop> LoadInstanceFile(const std::string& path, IopKind kind);

std::string ReadFile(const std::string& path);
Bytes ReadBinaryFile(const std::string& path);
void WriteBinaryFile(const std::string& path, ByteSpan data);

}  // namespace ibcs
