#include <fstream>
#include <sstream>

#include "doctest.h"
#include "lcn/depgraph.hpp"
#include "support.hpp"

using namespace lcn;

namespace {

std::set<std::string> atom_names(const GroundProgram& gp, const std::set<int>& idx) {
  std::set<std::string> out;
  for (int i : idx) out.insert(gp.atoms[i].text);
  return out;
}

const char* kAppendixA = R"(
e1: 0.6 <= P(a and b) <= 1
e2: 0 <= P(a | c) <= 0.2
e3: 0 <= P(a | not c) <= 0.8
e4: 0 <= P(b | d) <= 0.7
e5: 0 <= P(b | not d) <= 0.3
)";

const char* kIncompat = R"(
a1: 0.2 <= P(a) <= 0.3
a2: 0.6 <= P(b | a) <= 0.7
a3: 0.1 <= P(b | not a) <= 0.2
a4: 0.3 <= P(b) <= 0.4
)";

}  // namespace

TEST_CASE("four-variable program: parents, descendants, ndnp") {
  GroundProgram gp = testsup::ground_text(kAppendixA);
  DependencyGraph g = build_dependency_graph(gp);
  int a = gp.atom_index("a"), b = gp.atom_index("b"), c = gp.atom_index("c"),
      d = gp.atom_index("d");
  REQUIRE(a >= 0);

  CHECK(atom_names(gp, parents(g, a)) == std::set<std::string>{"b", "c"});
  CHECK(atom_names(gp, parents(g, b)) == std::set<std::string>{"a", "d"});
  CHECK(parents(g, c).empty());
  CHECK(parents(g, d).empty());

  CHECK(atom_names(gp, descendants(g, c)) == std::set<std::string>{"a", "b"});
  CHECK(atom_names(gp, descendants(g, a)) == std::set<std::string>{"b"});
  CHECK(atom_names(gp, descendants(g, d)) == std::set<std::string>{"a", "b"});

  // ndnp via the statements: a ind {d} | {b,c}; b ind {c} | {a,d};
  // c ind {d} | {}; d ind {c} | {} (the last duplicates the symmetric pair).
  auto stmts = markov_statements(g);
  REQUIRE(stmts.size() == 4);
  std::map<int, std::pair<std::set<int>, std::set<int>>> by_atom;
  for (const auto& st : stmts)
    by_atom[st.x] = {std::set<int>(st.given.begin(), st.given.end()),
                     std::set<int>(st.independent_of.begin(), st.independent_of.end())};
  CHECK(by_atom.at(a).first == std::set<int>{b, c});
  CHECK(by_atom.at(a).second == std::set<int>{d});
  CHECK(by_atom.at(b).first == std::set<int>{a, d});
  CHECK(by_atom.at(b).second == std::set<int>{c});
  CHECK(by_atom.at(c).first.empty());
  CHECK(by_atom.at(c).second == std::set<int>{d});
  CHECK(by_atom.at(d).second == std::set<int>{c});
}

TEST_CASE("chain program has empty ndnp everywhere") {
  GroundProgram gp = testsup::ground_text(kIncompat);
  DependencyGraph g = build_dependency_graph(gp);
  int a = gp.atom_index("a"), b = gp.atom_index("b");
  CHECK(atom_names(gp, parents(g, b)) == std::set<std::string>{"a"});
  CHECK(parents(g, a).empty());
  CHECK(markov_statements(g).empty());
}

TEST_CASE("atomic unconditional sentences stamp nothing") {
  GroundProgram gp = testsup::ground_text("0.3 <= P(x) <= 0.7\n0.3 <= P(y) <= 0.7");
  DependencyGraph g = build_dependency_graph(gp);
  CHECK(g.edges.empty());
  CHECK(g.nodes.size() == 2);  // just the two atom nodes
  CHECK(parents(g, 0).empty());
  CHECK(descendants(g, 0).empty());
  // ... but full mutual independence is implied
  auto stmts = markov_statements(g);
  REQUIRE(stmts.size() == 2);
  CHECK(stmts[0].independent_of == std::vector<int>{1});
}

TEST_CASE("tau=false removes the unconditional stamp") {
  GroundProgram gp = testsup::ground_text("0.2 <= P(a and b) <= 0.4 ; tau=false");
  CHECK(build_dependency_graph(gp).edges.empty());

  GroundProgram gp2 = testsup::ground_text("0.2 <= P(a and b) <= 0.4");
  DependencyGraph g2 = build_dependency_graph(gp2);
  CHECK(g2.edges.size() == 4);  // q<->a, q<->b
}

TEST_CASE("tau toggling on a conditional sentence only changes x->q edges") {
  GroundProgram t = testsup::ground_text("0.2 <= P(a and b | c) <= 0.4");
  GroundProgram f = testsup::ground_text("0.2 <= P(a and b | c) <= 0.4 ; tau=false");
  DependencyGraph gt = build_dependency_graph(t);
  DependencyGraph gf = build_dependency_graph(f);
  CHECK(gt.edges.size() == gf.edges.size() + 2);
  for (const auto& e : gf.edges) CHECK(gt.edges.count(e) == 1);
}

TEST_CASE("smokers graph: Ca(Tim) depends only on Sm(Tim)") {
  std::ifstream in(testsup::data_file("smokers.lcn"));
  std::stringstream buf;
  buf << in.rdbuf();
  GroundProgram gp = testsup::ground_text(buf.str());
  DependencyGraph g = build_dependency_graph(gp);

  int ca_tim = gp.atom_index("Ca(Tim)");
  int sm_tim = gp.atom_index("Sm(Tim)");
  REQUIRE(ca_tim >= 0);
  CHECK(parents(g, ca_tim) == std::set<int>{sm_tim});

  // Sm(Tim) is independent of Fr(Tom,Tam), Ca(Tom), Ca(Tam) given
  // Fr(Tim,Tom), Fr(Tim,Tam), Sm(Tom), Sm(Tam).
  CHECK(atom_names(gp, parents(g, sm_tim)) ==
        std::set<std::string>{"Fr(Tim,Tom)", "Fr(Tam,Tim)", "Sm(Tom)", "Sm(Tam)"});
  auto stmts = markov_statements(g);
  for (const auto& st : stmts) {
    if (st.x != sm_tim) continue;
    CHECK(atom_names(gp, std::set<int>(st.independent_of.begin(), st.independent_of.end())) ==
          std::set<std::string>{"Fr(Tam,Tom)", "Ca(Tom)", "Ca(Tam)"});
  }
}

TEST_CASE("parents/descendants/ndnp cover the atom set") {
  Rng rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    auto net = testsup::random_polytree(rng, 5, 0.2, false);
    GroundProgram gp = ground(net.to_lcn());
    DependencyGraph g = build_dependency_graph(gp);
    for (int x = 0; x < g.atom_count; ++x) {
      std::set<int> cover = parents(g, x);
      for (int d : descendants(g, x)) cover.insert(d);
      cover.insert(x);
      int covered = static_cast<int>(cover.size());
      std::set<int> nd;
      for (const auto& st : markov_statements(g))
        if (st.x == x) nd.insert(st.independent_of.begin(), st.independent_of.end());
      for (int v : nd) {
        CHECK(cover.count(v) == 0);  // ndnp disjoint from parents/descendants/x
        ++covered;
      }
      CHECK(covered == g.atom_count);
    }
  }
}

TEST_CASE("BN-structured programs reproduce the BN parent sets") {
  Rng rng(31);
  for (int trial = 0; trial < 25; ++trial) {
    auto net = testsup::random_polytree(rng, 6, 0.0, true);
    GroundProgram gp = ground(net.to_lcn());
    DependencyGraph g = build_dependency_graph(gp);
    for (int i = 0; i < net.n; ++i) {
      int idx = gp.atom_index(net.names[i]);
      REQUIRE(idx >= 0);
      std::set<std::string> expect;
      for (int p : net.parents[i]) expect.insert(net.names[p]);
      CHECK(atom_names(gp, parents(g, idx)) == expect);
    }
  }
}

TEST_CASE("DOT export and edge-list rebuild") {
  GroundProgram gp = testsup::ground_text(kAppendixA);
  DependencyGraph g = build_dependency_graph(gp);

  std::string dot = to_dot(g);
  CHECK(dot.find("digraph") != std::string::npos);
  CHECK(dot.find("fillcolor=lightgray") != std::string::npos);

  DependencyGraph g2 = rebuild_from_edges(gp, export_edges(g));
  REQUIRE(g.nodes.size() == g2.nodes.size());
  auto edge_texts = [](const DependencyGraph& gr) {
    std::set<std::pair<std::string, std::string>> out;
    for (const auto& [u, v] : gr.edges) out.insert({gr.nodes[u].text, gr.nodes[v].text});
    return out;
  };
  CHECK(edge_texts(g) == edge_texts(g2));
  for (int x = 0; x < g.atom_count; ++x) {
    CHECK(parents(g, x) == parents(g2, x));
    CHECK(descendants(g, x) == descendants(g2, x));
  }
}
