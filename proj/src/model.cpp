#include "lcn/model.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

namespace lcn {

Formula Formula::make_atom(std::string name, std::vector<std::string> args) {
  Formula f;
  f.kind = Connective::Atom;
  f.name = std::move(name);
  f.args = std::move(args);
  return f;
}

Formula Formula::make_not(Formula inner) {
  Formula f;
  f.kind = Connective::Not;
  f.children.push_back(std::move(inner));
  return f;
}

Formula Formula::make_nary(Connective kind, std::vector<Formula> children) {
  Formula f;
  f.kind = kind;
  f.children = std::move(children);
  return f;
}

Formula Formula::make_binary(Connective kind, Formula lhs, Formula rhs) {
  Formula f;
  f.kind = kind;
  f.children.push_back(std::move(lhs));
  f.children.push_back(std::move(rhs));
  return f;
}

std::string atom_text(const std::string& name, const std::vector<std::string>& args) {
  if (args.empty()) return name;
  std::string s = name;
  s += '(';
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (i) s += ',';
    s += args[i];
  }
  s += ')';
  return s;
}

namespace {

const char* connective_word(Connective k) {
  switch (k) {
    case Connective::And: return "and";
    case Connective::Or: return "or";
    case Connective::Xor: return "xor";
    case Connective::Implies: return "implies";
    case Connective::Iff: return "iff";
    default: return "?";
  }
}

void print_formula(const Formula& f, std::string& out) {
  switch (f.kind) {
    case Connective::Atom:
      out += atom_text(f.name, f.args);
      return;
    case Connective::Not:
      out += "(not ";
      print_formula(f.children[0], out);
      out += ')';
      return;
    case Connective::Forall:
    case Connective::Exists: {
      out += '(';
      out += (f.kind == Connective::Forall) ? "forall " : "exists ";
      if (f.distinct) out += "distinct ";
      for (std::size_t i = 0; i < f.bound_vars.size(); ++i) {
        if (i) out += ',';
        out += f.bound_vars[i];
      }
      out += " : ";
      out += f.domain;
      out += " . ";
      print_formula(f.children[0], out);
      out += ')';
      return;
    }
    default: {
      out += '(';
      for (std::size_t i = 0; i < f.children.size(); ++i) {
        if (i) {
          out += ' ';
          out += connective_word(f.kind);
          out += ' ';
        }
        print_formula(f.children[i], out);
      }
      out += ')';
      return;
    }
  }
}

}  // namespace

std::string to_text(const Formula& f) {
  std::string out;
  print_formula(f, out);
  return out;
}

bool structurally_equal(const Formula& a, const Formula& b) {
  if (a.kind != b.kind) return false;
  if (a.kind == Connective::Atom)
    return a.name == b.name && a.args == b.args;
  if (a.kind == Connective::Forall || a.kind == Connective::Exists) {
    if (a.bound_vars != b.bound_vars || a.domain != b.domain || a.distinct != b.distinct)
      return false;
  }
  if (a.children.size() != b.children.size()) return false;
  for (std::size_t i = 0; i < a.children.size(); ++i)
    if (!structurally_equal(a.children[i], b.children[i])) return false;
  return true;
}

namespace {

void collect_atom_indices(const Formula& f, std::set<int>& out) {
  if (f.kind == Connective::Atom) {
    out.insert(f.atom_index);
    return;
  }
  for (const Formula& c : f.children) collect_atom_indices(c, out);
}

}  // namespace

std::vector<int> atom_indices(const Formula& f) {
  std::set<int> s;
  collect_atom_indices(f, s);
  return std::vector<int>(s.begin(), s.end());
}

const std::vector<std::string>* LCNProgram::find_domain(const std::string& name) const {
  for (const auto& [n, consts] : domains)
    if (n == name) return &consts;
  return nullptr;
}

const PredicateDecl* LCNProgram::find_predicate(const std::string& name) const {
  for (const auto& p : predicates)
    if (p.name == name) return &p;
  return nullptr;
}

int GroundProgram::atom_index(const std::string& text) const {
  for (const Atom& a : atoms)
    if (a.text == text) return a.index;
  return -1;
}

LCNProgram GroundProgram::to_program() const {
  LCNProgram p;
  // Synthesize declarations for the ground predicates: one shared domain
  // holding every constant in use. Atom arguments are already canonical, so
  // the symmetric flag is not needed.
  std::vector<std::string> consts;
  std::map<std::string, std::size_t> arity;
  for (const Atom& a : atoms) {
    for (const std::string& c : a.args)
      if (std::find(consts.begin(), consts.end(), c) == consts.end()) consts.push_back(c);
    if (!a.args.empty()) arity[a.name] = a.args.size();
  }
  if (!consts.empty()) p.domains.emplace_back("_constants", consts);
  for (const auto& [name, k] : arity) {
    PredicateDecl d;
    d.name = name;
    d.arg_domains.assign(k, "_constants");
    p.predicates.push_back(std::move(d));
  }
  for (const GroundSentence& gs : sentences) {
    Sentence s;
    s.label = gs.label;
    s.conditional = gs.conditional;
    s.q = gs.q;
    s.r = gs.r;
    s.lower = gs.lower;
    s.upper = gs.upper;
    s.tau = gs.tau;
    p.sentences.push_back(std::move(s));
  }
  p.queries = queries;
  return p;
}

bool evaluate(const Formula& f, World w) {
  switch (f.kind) {
    case Connective::Atom:
      return (w >> f.atom_index) & 1u;
    case Connective::Not:
      return !evaluate(f.children[0], w);
    case Connective::And:
      for (const Formula& c : f.children)
        if (!evaluate(c, w)) return false;
      return true;
    case Connective::Or:
      for (const Formula& c : f.children)
        if (evaluate(c, w)) return true;
      return false;
    case Connective::Xor: {
      bool acc = false;
      for (const Formula& c : f.children) acc ^= evaluate(c, w);
      return acc;
    }
    case Connective::Implies:
      return !evaluate(f.children[0], w) || evaluate(f.children[1], w);
    case Connective::Iff:
      return evaluate(f.children[0], w) == evaluate(f.children[1], w);
    default:
      throw Error::user("cannot evaluate an unground quantified formula");
  }
}

std::vector<World> satisfying_worlds(const Formula& f, int atom_count) {
  if (atom_count > kMaxEnumAtoms)
    throw Error::capacity("world enumeration over " + std::to_string(atom_count) +
                          " atoms exceeds the cap of " + std::to_string(kMaxEnumAtoms));
  for (int idx : atom_indices(f))
    if (idx < 0 || idx >= atom_count)
      throw Error::user("formula references atom index outside the program");
  Formula canon = canonicalize(f);
  std::vector<World> out;
  const World limit = World(1) << atom_count;
  for (World w = 0; w < limit; ++w)
    if (evaluate(canon, w)) out.push_back(w);
  return out;
}

Formula canonicalize(const Formula& f) {
  switch (f.kind) {
    case Connective::Atom:
      return f;
    case Connective::Not:
      return Formula::make_not(canonicalize(f.children[0]));
    case Connective::Implies: {
      // a implies b  ==>  (not a) or b
      Formula lhs = Formula::make_not(canonicalize(f.children[0]));
      Formula rhs = canonicalize(f.children[1]);
      return canonicalize(Formula::make_binary(Connective::Or, std::move(lhs), std::move(rhs)));
    }
    case Connective::Iff: {
      // a iff b  ==>  ((not a) or b) and ((not b) or a)
      Formula a = canonicalize(f.children[0]);
      Formula b = canonicalize(f.children[1]);
      Formula fwd = Formula::make_binary(Connective::Or, Formula::make_not(a), b);
      Formula bwd = Formula::make_binary(Connective::Or, Formula::make_not(b), a);
      return canonicalize(Formula::make_binary(Connective::And, std::move(fwd), std::move(bwd)));
    }
    case Connective::And:
    case Connective::Or:
    case Connective::Xor: {
      // Flatten nested same-connective children (associative), then sort for a
      // canonical operand order. No idempotence rewriting: xor(a,a) != a.
      std::vector<Formula> flat;
      for (const Formula& c : f.children) {
        Formula cc = canonicalize(c);
        if (cc.kind == f.kind) {
          for (Formula& g : cc.children) flat.push_back(std::move(g));
        } else {
          flat.push_back(std::move(cc));
        }
      }
      std::vector<std::pair<std::string, std::size_t>> keys;
      keys.reserve(flat.size());
      for (std::size_t i = 0; i < flat.size(); ++i) keys.emplace_back(to_text(flat[i]), i);
      std::stable_sort(keys.begin(), keys.end());
      std::vector<Formula> sorted;
      sorted.reserve(flat.size());
      for (const auto& [_, i] : keys) sorted.push_back(std::move(flat[i]));
      return Formula::make_nary(f.kind, std::move(sorted));
    }
    default:
      throw Error::user("cannot canonicalize an unground quantified formula");
  }
}

namespace {

struct Grounder {
  const LCNProgram& program;
  std::vector<Atom> atoms;
  std::map<std::string, int> atom_by_text;

  explicit Grounder(const LCNProgram& p) : program(p) {}

  const std::vector<std::string>& domain_or_throw(const std::string& name) const {
    const auto* d = program.find_domain(name);
    if (!d) throw Error::user("unknown domain '" + name + "'");
    if (d->empty()) throw Error::user("domain '" + name + "' is empty");
    return *d;
  }

  // All bindings of vars over domain, optionally pairwise distinct.
  std::vector<std::vector<std::string>> bindings(const std::vector<std::string>& vars,
                                                 const std::string& domain_name,
                                                 bool distinct) const {
    const auto& consts = domain_or_throw(domain_name);
    std::vector<std::vector<std::string>> out;
    std::vector<std::size_t> idx(vars.size(), 0);
    while (true) {
      bool ok = true;
      if (distinct) {
        for (std::size_t i = 0; ok && i < idx.size(); ++i)
          for (std::size_t j = i + 1; ok && j < idx.size(); ++j)
            if (idx[i] == idx[j]) ok = false;
      }
      if (ok) {
        std::vector<std::string> b(vars.size());
        for (std::size_t i = 0; i < vars.size(); ++i) b[i] = consts[idx[i]];
        out.push_back(std::move(b));
      }
      std::size_t k = 0;
      while (k < idx.size()) {
        if (++idx[k] < consts.size()) break;
        idx[k++] = 0;
      }
      if (k == idx.size()) break;
    }
    return out;
  }

  // Atom indices are assigned by first appearance in the canonical ground
  // sentences (q before r, depth-first over the sorted operand order).
  void register_formula_atoms(Formula& f) {
    if (f.kind == Connective::Atom) {
      f.atom_index = register_atom(f.name, f.args);
      return;
    }
    for (Formula& c : f.children) register_formula_atoms(c);
  }

  int register_atom(const std::string& name, const std::vector<std::string>& args) {
    std::string text = atom_text(name, args);
    auto it = atom_by_text.find(text);
    if (it != atom_by_text.end()) return it->second;
    Atom a;
    a.name = name;
    a.args = args;
    a.index = static_cast<int>(atoms.size());
    a.text = text;
    atom_by_text.emplace(text, a.index);
    atoms.push_back(std::move(a));
    return atoms.back().index;
  }

  // Substitutes the binding, expands formula-level quantifiers, canonicalizes
  // symmetric-predicate arguments, and registers atoms in appearance order.
  Formula ground_formula(const Formula& f, std::map<std::string, std::string>& env) {
    switch (f.kind) {
      case Connective::Atom: {
        std::vector<std::string> args;
        args.reserve(f.args.size());
        const PredicateDecl* pred = nullptr;
        if (!f.args.empty()) {
          pred = program.find_predicate(f.name);
          if (!pred) throw Error::user("unknown predicate '" + f.name + "'");
          if (pred->arg_domains.size() != f.args.size())
            throw Error::user("arity mismatch for predicate '" + f.name + "': expected " +
                              std::to_string(pred->arg_domains.size()) + " arguments, got " +
                              std::to_string(f.args.size()));
        } else if (program.find_predicate(f.name)) {
          throw Error::user("predicate '" + f.name + "' used without arguments");
        }
        for (std::size_t i = 0; i < f.args.size(); ++i) {
          const std::string& t = f.args[i];
          auto it = env.find(t);
          std::string value = (it != env.end()) ? it->second : t;
          const auto& dom = domain_or_throw(pred->arg_domains[i]);
          if (std::find(dom.begin(), dom.end(), value) == dom.end()) {
            if (it == env.end())
              throw Error::user("unknown constant or unbound variable '" + t +
                                "' for predicate '" + f.name + "'");
            throw Error::user("constant '" + value + "' is not in domain '" +
                              pred->arg_domains[i] + "'");
          }
          args.push_back(value);
        }
        if (pred && pred->symmetric) std::sort(args.begin(), args.end());
        return Formula::make_atom(f.name, args);
      }
      case Connective::Forall:
      case Connective::Exists: {
        auto bs = bindings(f.bound_vars, f.domain, f.distinct);
        if (bs.empty())
          throw Error::user("quantifier over " + f.domain + " admits no bindings");
        std::vector<Formula> parts;
        parts.reserve(bs.size());
        for (const auto& b : bs) {
          std::map<std::string, std::string> saved;
          for (std::size_t i = 0; i < f.bound_vars.size(); ++i) {
            auto it = env.find(f.bound_vars[i]);
            if (it != env.end()) saved.emplace(f.bound_vars[i], it->second);
            env[f.bound_vars[i]] = b[i];
          }
          parts.push_back(ground_formula(f.children[0], env));
          for (const std::string& v : f.bound_vars) {
            auto it = saved.find(v);
            if (it != saved.end())
              env[v] = it->second;
            else
              env.erase(v);
          }
        }
        if (parts.size() == 1) return std::move(parts[0]);
        return Formula::make_nary(
            f.kind == Connective::Forall ? Connective::And : Connective::Or, std::move(parts));
      }
      case Connective::Not:
        return Formula::make_not(ground_formula(f.children[0], env));
      default: {
        std::vector<Formula> children;
        children.reserve(f.children.size());
        for (const Formula& c : f.children) children.push_back(ground_formula(c, env));
        return Formula::make_nary(f.kind, std::move(children));
      }
    }
  }
};

std::string sentence_key(const GroundSentence& s) {
  std::ostringstream os;
  os << (s.conditional ? "c|" : "u|") << to_text(s.q);
  if (s.r) os << '|' << to_text(*s.r);
  os.precision(17);
  os << '|' << s.lower << '|' << s.upper << '|' << (s.tau ? 't' : 'f');
  return os.str();
}

}  // namespace

GroundProgram ground(const LCNProgram& program) {
  Grounder g(program);
  GroundProgram out;
  std::set<std::string> seen;

  for (const Sentence& s : program.sentences) {
    std::vector<std::vector<std::string>> bs;
    if (s.forall_vars.empty())
      bs.push_back({});
    else
      bs = g.bindings(s.forall_vars, s.forall_domain, s.forall_distinct);

    for (const auto& b : bs) {
      std::map<std::string, std::string> env;
      for (std::size_t i = 0; i < s.forall_vars.size(); ++i) env[s.forall_vars[i]] = b[i];

      GroundSentence gs;
      gs.q = canonicalize(g.ground_formula(s.q, env));
      if (s.r) gs.r = canonicalize(g.ground_formula(*s.r, env));
      gs.conditional = s.conditional;
      gs.lower = s.lower;
      gs.upper = s.upper;
      gs.tau = s.tau;
      gs.source_label = s.label;
      for (std::size_t i = 0; i < s.forall_vars.size(); ++i)
        gs.binding.emplace_back(s.forall_vars[i], b[i]);

      std::string key = sentence_key(gs);
      if (!seen.insert(key).second) continue;
      g.register_formula_atoms(gs.q);
      if (gs.r) g.register_formula_atoms(*gs.r);

      gs.label = s.label;
      if (!b.empty()) {
        gs.label += '[';
        for (std::size_t i = 0; i < b.size(); ++i) {
          if (i) gs.label += ',';
          gs.label += b[i];
        }
        gs.label += ']';
      }
      out.sentences.push_back(std::move(gs));
    }
  }

  for (const Query& q : program.queries) {
    std::map<std::string, std::string> env;
    Query gq;
    gq.conditional = q.conditional;
    gq.q = canonicalize(g.ground_formula(q.q, env));
    g.register_formula_atoms(gq.q);
    if (q.e) {
      gq.e = canonicalize(g.ground_formula(*q.e, env));
      g.register_formula_atoms(*gq.e);
    }
    out.queries.push_back(std::move(gq));
  }

  out.atoms = std::move(g.atoms);
  return out;
}

}  // namespace lcn
