#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lcn/model.hpp"

namespace lcn {

struct Diagnostic {
  int line = 0;    // 1-based
  int column = 0;  // 1-based
  std::string message;
};

struct ParseResult {
  std::optional<LCNProgram> program;  // present iff no diagnostics
  std::vector<Diagnostic> diagnostics;
  bool ok() const { return diagnostics.empty(); }
};

// Parses the LCN text format. Total: never throws on malformed input, all
// problems come back as diagnostics with positions.
//
//   # comment
//   domain People = {Tim, Tom, Tam}
//   predicate Fr(People, People) symmetric
//   [label:] L <= P(F [| G]) <= U [forall [distinct] v1,...,vk : Domain] [; tau=false]
//   [label:] P(F [| G]) = v
//   query P(F [| G])
//
// Formula connectives, loosest to tightest: iff, implies, or, xor, and, not.
// `!` and `&` are synonyms for not/and; `|` only separates P(q | r).
// Formula-level quantifiers: forall/exists [distinct] vars : Domain . body
ParseResult parse_program(const std::string& text);

// Parses a query expression ("P(F)" or "P(F | G)") against a program's
// declarations and resolves it against the ground atom table. Unknown atoms
// are diagnostics.
struct QueryParseResult {
  std::optional<Query> query;
  std::vector<Diagnostic> diagnostics;
  bool ok() const { return diagnostics.empty(); }
};
QueryParseResult parse_query(const std::string& text, const LCNProgram& program,
                             const GroundProgram& gp);

// Deterministic textual form that parses back to a structurally identical
// program.
std::string pretty_print(const LCNProgram& program);

}  // namespace lcn
