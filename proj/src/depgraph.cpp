#include "lcn/depgraph.hpp"

#include <algorithm>
#include <sstream>

namespace lcn {

std::vector<int> DependencyGraph::successors(int node) const {
  std::vector<int> out;
  for (auto it = edges.lower_bound({node, -1});
       it != edges.end() && it->first == node; ++it)
    out.push_back(it->second);
  return out;
}

std::vector<int> DependencyGraph::predecessors(int node) const {
  std::vector<int> out;
  for (const auto& [u, v] : edges)
    if (v == node) out.push_back(u);
  return out;
}

namespace {

struct Builder {
  DependencyGraph g;
  std::map<std::string, int> node_by_text;

  int atom_node(int atom_index) { return atom_index; }

  int formula_node(const Formula& canonical) {
    std::string text = to_text(canonical);
    auto it = node_by_text.find(text);
    if (it != node_by_text.end()) return it->second;
    DependencyGraph::Node n;
    n.is_atom = false;
    n.text = text;
    int id = static_cast<int>(g.nodes.size());
    g.nodes.push_back(std::move(n));
    node_by_text.emplace(text, id);
    return id;
  }

  int node_of(const Formula& f) {
    if (f.is_atom()) return atom_node(f.atom_index);
    return formula_node(f);
  }

  void add_edge(int from, int to, const std::string& label) {
    if (from == to) return;  // self-loops are meaningless for parents/descendants
    g.edges.insert({from, to});
    g.provenance[{from, to}].insert(label);
  }
};

}  // namespace

DependencyGraph build_dependency_graph(const GroundProgram& gp) {
  Builder b;
  b.g.atom_count = static_cast<int>(gp.atoms.size());
  for (const Atom& a : gp.atoms) {
    DependencyGraph::Node n;
    n.is_atom = true;
    n.atom_index = a.index;
    n.text = a.text;
    b.g.nodes.push_back(std::move(n));
    b.node_by_text.emplace(a.text, a.index);
  }

  for (const GroundSentence& s : gp.sentences) {
    if (!s.conditional) {
      // Unconditional stamp: bidirectional q <-> x_i edges when tau holds and
      // q is non-atomic; empty otherwise.
      if (!s.tau || s.q.is_atom()) continue;
      int qn = b.formula_node(s.q);
      for (int x : atom_indices(s.q)) {
        b.add_edge(qn, x, s.label);
        b.add_edge(x, qn, s.label);
      }
      continue;
    }

    // Conditional stamp: r -> q, a_j -> r for the atoms of a non-atomic r,
    // q -> x_i always, x_i -> q only when tau holds.
    int rn = b.node_of(*s.r);
    int qn = b.node_of(s.q);
    b.add_edge(rn, qn, s.label);
    if (!s.r->is_atom())
      for (int a : atom_indices(*s.r)) b.add_edge(a, rn, s.label);
    if (!s.q.is_atom()) {
      for (int x : atom_indices(s.q)) {
        b.add_edge(qn, x, s.label);
        if (s.tau) b.add_edge(x, qn, s.label);
      }
    }
  }
  return b.g;
}

std::set<int> parents(const DependencyGraph& g, int atom) {
  // Reverse traversal from x through formula nodes only; atoms reached are
  // path starting points with all-non-atomic intermediates.
  std::set<int> result;
  std::vector<int> stack = {atom};
  std::set<int> visited_formulas;
  while (!stack.empty()) {
    int node = stack.back();
    stack.pop_back();
    for (int pred : g.predecessors(node)) {
      if (g.nodes[pred].is_atom) {
        if (pred != atom) result.insert(g.nodes[pred].atom_index);
      } else if (visited_formulas.insert(pred).second) {
        stack.push_back(pred);
      }
    }
  }
  return result;
}

std::set<int> descendants(const DependencyGraph& g, int atom) {
  std::set<int> blocked = parents(g, atom);
  std::set<int> result;
  std::set<int> expanded;
  std::vector<int> stack = {atom};
  expanded.insert(atom);
  while (!stack.empty()) {
    int node = stack.back();
    stack.pop_back();
    for (int succ : g.successors(node)) {
      if (g.nodes[succ].is_atom) {
        int ai = g.nodes[succ].atom_index;
        if (ai != atom) result.insert(ai);
        // Atoms in parents(x) may terminate a path but never continue one.
        if (blocked.count(ai)) continue;
      }
      if (expanded.insert(succ).second) stack.push_back(succ);
    }
  }
  return result;
}

std::vector<IndependenceStatement> markov_statements(const DependencyGraph& g) {
  std::vector<IndependenceStatement> out;
  for (int x = 0; x < g.atom_count; ++x) {
    std::set<int> pa = parents(g, x);
    std::set<int> de = descendants(g, x);
    IndependenceStatement st;
    st.x = x;
    for (int a = 0; a < g.atom_count; ++a) {
      if (a == x) continue;
      if (pa.count(a)) continue;
      if (de.count(a)) continue;
      st.independent_of.push_back(a);
    }
    if (st.independent_of.empty()) continue;
    st.given.assign(pa.begin(), pa.end());
    out.push_back(std::move(st));
  }
  return out;
}

std::string to_dot(const DependencyGraph& g) {
  std::ostringstream os;
  os << "digraph dependency {\n";
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    const auto& n = g.nodes[i];
    os << "  n" << i << " [label=\"" << n.text << "\"";
    if (n.is_atom) os << ", style=filled, fillcolor=lightgray";
    os << "];\n";
  }
  for (const auto& [u, v] : g.edges) os << "  n" << u << " -> n" << v << ";\n";
  os << "}\n";
  return os.str();
}

std::vector<EdgeRecord> export_edges(const DependencyGraph& g) {
  std::vector<EdgeRecord> out;
  for (const auto& [u, v] : g.edges) {
    EdgeRecord e;
    e.from = g.nodes[u].text;
    e.to = g.nodes[v].text;
    e.from_atom = g.nodes[u].is_atom;
    e.to_atom = g.nodes[v].is_atom;
    auto it = g.provenance.find({u, v});
    if (it != g.provenance.end()) e.labels = it->second;
    out.push_back(std::move(e));
  }
  return out;
}

DependencyGraph rebuild_from_edges(const GroundProgram& gp,
                                   const std::vector<EdgeRecord>& edges) {
  DependencyGraph g;
  g.atom_count = static_cast<int>(gp.atoms.size());
  std::map<std::string, int> by_text;
  for (const Atom& a : gp.atoms) {
    DependencyGraph::Node n;
    n.is_atom = true;
    n.atom_index = a.index;
    n.text = a.text;
    g.nodes.push_back(std::move(n));
    by_text.emplace(a.text, a.index);
  }
  auto intern = [&](const std::string& text, bool is_atom) {
    auto it = by_text.find(text);
    if (it != by_text.end()) return it->second;
    if (is_atom) throw Error::user("edge references unknown atom '" + text + "'");
    DependencyGraph::Node n;
    n.is_atom = false;
    n.text = text;
    int id = static_cast<int>(g.nodes.size());
    g.nodes.push_back(std::move(n));
    by_text.emplace(text, id);
    return id;
  };
  for (const EdgeRecord& e : edges) {
    int u = intern(e.from, e.from_atom);
    int v = intern(e.to, e.to_atom);
    g.edges.insert({u, v});
    g.provenance[{u, v}].insert(e.labels.begin(), e.labels.end());
  }
  return g;
}

}  // namespace lcn
