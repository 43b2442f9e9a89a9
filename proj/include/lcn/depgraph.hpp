#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "lcn/model.hpp"

namespace lcn {

// Directed dependency graph over atom nodes and formula nodes. Nodes
// 0..atom_count-1 are the program atoms; formula nodes follow in first
// appearance order. Formula-node identity is structural equality of the
// canonical form, so the same formula in two sentences is one node.
struct DependencyGraph {
  struct Node {
    bool is_atom = false;
    int atom_index = -1;  // valid when is_atom
    std::string text;     // atom text or canonical formula text
  };

  std::vector<Node> nodes;
  int atom_count = 0;
  std::set<std::pair<int, int>> edges;
  // sentence labels that stamped each edge
  std::map<std::pair<int, int>, std::set<std::string>> provenance;

  std::vector<int> successors(int node) const;
  std::vector<int> predecessors(int node) const;
};

struct IndependenceStatement {
  int x = -1;                        // atom index
  std::vector<int> given;            // parents(x)
  std::vector<int> independent_of;   // ndnp(x), non-empty
};

DependencyGraph build_dependency_graph(const GroundProgram& gp);

// Atoms y with a directed path y -> ... -> x whose intermediate nodes are all
// non-atomic formula nodes (a direct edge counts; x itself excluded).
std::set<int> parents(const DependencyGraph& g, int atom);

// Atoms reachable from x along directed paths in which no intermediate node
// belongs to parents(x); x itself excluded.
std::set<int> descendants(const DependencyGraph& g, int atom);

// One statement per atom with non-empty ndnp(x) = atoms \ parents(x)
// \ descendants(x) \ {x}.
std::vector<IndependenceStatement> markov_statements(const DependencyGraph& g);

// Graphviz export: atom nodes shaded, formula nodes unshaded.
std::string to_dot(const DependencyGraph& g);

struct EdgeRecord {
  std::string from, to;
  bool from_atom = false, to_atom = false;
  std::set<std::string> labels;
};
std::vector<EdgeRecord> export_edges(const DependencyGraph& g);
DependencyGraph rebuild_from_edges(const GroundProgram& gp, const std::vector<EdgeRecord>& edges);

}  // namespace lcn
