#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lcn/error.hpp"

namespace lcn {

// A world is a complete truth assignment to the ground atoms: bit i holds the
// value of the atom with index i, bit 0 least significant.
using World = std::uint32_t;

// Hard cap on world enumeration; beyond this the exact engine is hopeless
// anyway (the joint program is exponential in the atom count).
constexpr int kMaxEnumAtoms = 25;

enum class Connective { Atom, Not, And, Or, Xor, Implies, Iff, Forall, Exists };

// Formula AST. Atom leaves carry the predicate/proposition name plus argument
// terms; after grounding every argument is a constant and atom_index points
// into the ground program's atom table. Forall/Exists nodes only exist before
// grounding (they expand to And/Or).
struct Formula {
  Connective kind = Connective::Atom;

  // Atom leaves
  std::string name;
  std::vector<std::string> args;
  int atom_index = -1;

  // Quantifier nodes
  std::vector<std::string> bound_vars;
  std::string domain;
  bool distinct = false;

  std::vector<Formula> children;

  static Formula make_atom(std::string name, std::vector<std::string> args = {});
  static Formula make_not(Formula f);
  static Formula make_nary(Connective kind, std::vector<Formula> children);
  static Formula make_binary(Connective kind, Formula lhs, Formula rhs);

  bool is_atom() const { return kind == Connective::Atom; }
};

// Deterministic textual form; parenthesized so that parsing it back yields a
// structurally identical tree.
std::string to_text(const Formula& f);

bool structurally_equal(const Formula& a, const Formula& b);

// Sorted list of distinct atom indices referenced by a ground formula.
std::vector<int> atom_indices(const Formula& f);

struct Atom {
  std::string name;                // predicate or proposition name
  std::vector<std::string> args;   // canonicalized constants; empty for propositions
  int index = -1;
  std::string text;                // canonical printable form, e.g. "Fr(Tam,Tim)"
};

struct Sentence {
  std::string label;
  bool conditional = false;
  Formula q;
  std::optional<Formula> r;
  double lower = 0.0;
  double upper = 1.0;
  bool tau = true;

  // Sentence-level universal quantifier (empty when ground).
  std::vector<std::string> forall_vars;
  std::string forall_domain;
  bool forall_distinct = false;
};

struct PredicateDecl {
  std::string name;
  std::vector<std::string> arg_domains;
  bool symmetric = false;
};

struct Query {
  bool conditional = false;
  Formula q;
  std::optional<Formula> e;
};

struct LCNProgram {
  std::vector<std::pair<std::string, std::vector<std::string>>> domains;
  std::vector<PredicateDecl> predicates;
  std::vector<Sentence> sentences;
  std::vector<Query> queries;

  const std::vector<std::string>* find_domain(const std::string& name) const;
  const PredicateDecl* find_predicate(const std::string& name) const;
};

struct GroundSentence {
  std::string label;
  bool conditional = false;
  Formula q;                      // canonical, atom_index set on leaves
  std::optional<Formula> r;
  double lower = 0.0;
  double upper = 1.0;
  bool tau = true;

  // Provenance back to the quantified source.
  std::string source_label;
  std::vector<std::pair<std::string, std::string>> binding;
};

struct GroundProgram {
  std::vector<Atom> atoms;
  std::vector<GroundSentence> sentences;
  std::vector<Query> queries;

  int atom_index(const std::string& text) const;
  // Trivial embedding back into an LCNProgram (used for idempotence checks
  // and for re-grounding with extra sentences).
  LCNProgram to_program() const;
};

// Expands quantifiers, canonicalizes symmetric-predicate atoms, assigns atom
// indices by first appearance, and deduplicates ground sentences.
GroundProgram ground(const LCNProgram& program);

// Truth value of a ground formula under a world. Total over all connectives;
// xor of k arguments is odd parity.
bool evaluate(const Formula& f, World w);

// All worlds over atom_count atoms where f holds. Throws a capacity error
// beyond kMaxEnumAtoms.
std::vector<World> satisfying_worlds(const Formula& f, int atom_count);

// Structural canonical form used for formula-node identity: implies/iff
// desugared to not/or/and, nested and/or/xor flattened, n-ary operands sorted.
Formula canonicalize(const Formula& f);

std::string atom_text(const std::string& name, const std::vector<std::string>& args);

}  // namespace lcn
