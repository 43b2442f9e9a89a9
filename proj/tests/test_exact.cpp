#include <fstream>
#include <sstream>

#include "doctest.h"
#include "lcn/exact.hpp"
#include "support.hpp"

using namespace lcn;
using namespace lcn::exact;

namespace {

const char* kAppendixA = R"(
e1: 0.6 <= P(a and b) <= 1
e2: 0 <= P(a | c) <= 0.2
e3: 0 <= P(a | not c) <= 0.8
e4: 0 <= P(b | d) <= 0.7
e5: 0 <= P(b | not d) <= 0.3
)";

Query marginal(const GroundProgram& gp, const std::string& name) {
  Query q;
  q.q = Formula::make_atom(name);
  q.q.atom_index = gp.atom_index(name);
  REQUIRE(q.q.atom_index >= 0);
  return q;
}

Query conditional(const GroundProgram& gp, const std::string& qn, const std::string& en) {
  Query q = marginal(gp, qn);
  q.conditional = true;
  Formula e = Formula::make_atom(en);
  e.atom_index = gp.atom_index(en);
  q.e = e;
  return q;
}

nlp::SolverConfig fast_config(std::uint64_t seed = 0) {
  nlp::SolverConfig cfg;
  cfg.seed = seed;
  return cfg;
}

}  // namespace

TEST_CASE("linear constraint rows take the appendix shapes") {
  GroundProgram gp = testsup::ground_text(kAppendixA);
  auto rows = build_linear_constraints(gp);
  REQUIRE(rows.size() == 10);  // two per sentence

  // P(a and b) >= 0.6 sums the worlds with bits a,b set: four of sixteen
  const auto& lo = rows[0];
  CHECK(lo.rel == nlp::Relation::GreaterEq);
  CHECK(lo.rhs == doctest::Approx(0.6));
  CHECK(lo.terms.size() == 4);
  CHECK(!lo.vacuous);
  // its upper side is 1.0 and vacuous
  CHECK(rows[1].vacuous);

  // P(a | c) <= 0.2 becomes sum_{a,c} p - 0.2 sum_{c} p <= 0
  const auto& cond = rows[3];
  CHECK(cond.rel == nlp::Relation::LessEq);
  CHECK(cond.rhs == doctest::Approx(0.0));
  int pos = 0, neg = 0;
  for (auto [i, c] : cond.terms) {
    (void)i;
    if (c > 0) ++pos;
    if (c < 0) ++neg;
  }
  CHECK(pos == 4);  // worlds with a=1, c=1
  CHECK(neg == 8);  // worlds with c=1, scaled by -0.2
  // the lower side 0 <= P(a|c) is vacuous but retained
  CHECK(rows[2].vacuous);
}

TEST_CASE("vacuous bounds produce retained, flagged rows") {
  GroundProgram gp = testsup::ground_text("0 <= P(q) <= 1");
  auto rows = build_linear_constraints(gp);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].vacuous);
  CHECK(rows[1].vacuous);
}

TEST_CASE("Markov constraints reproduce the appendix count and shapes") {
  GroundProgram gp = testsup::ground_text(kAppendixA);
  DependencyGraph g = build_dependency_graph(gp);
  auto stmts = markov_statements(g);
  auto quads = build_markov_constraints(stmts, 4);
  // one pairwise independence + two families of four, duplicates collapsed
  CHECK(quads.size() == 9);

  int pairwise = 0;
  for (const auto& q : quads) {
    if (!q.linear.empty()) {
      // P(c) P(d) == P(c and d): one product and a linear right side
      ++pairwise;
      REQUIRE(q.products.size() == 1);
      CHECK(q.products[0].a.size() == 8);
      CHECK(q.products[0].b.size() == 8);
      CHECK(q.linear.size() == 4);
    } else {
      REQUIRE(q.products.size() == 2);
    }
  }
  CHECK(pairwise == 1);
}

TEST_CASE("statement with empty independent set contributes nothing") {
  std::vector<IndependenceStatement> stmts;
  IndependenceStatement st;
  st.x = 0;
  st.given = {1};
  st.independent_of = {};
  stmts.push_back(st);
  CHECK(build_markov_constraints(stmts, 2).empty());
}

TEST_CASE("appendix program: P(c) in [0, 0.33] and P(a|b) in [0.85, 1]") {
  GroundProgram gp = testsup::ground_text(kAppendixA);
  nlp::SolverConfig cfg = fast_config(2024);

  IntervalResult pc = query_interval(gp, marginal(gp, "c"), Mode::Markov, cfg);
  CHECK(pc.lower <= 0.01);
  CHECK(std::fabs(pc.upper - 1.0 / 3) <= 0.01);
  CHECK(pc.lo.status == nlp::SolveStatus::Converged);
  CHECK(pc.hi.status == nlp::SolveStatus::Converged);
  CHECK(pc.lo_report.max_residual <= cfg.tol_feas);
  CHECK(pc.hi_report.max_residual <= cfg.tol_feas);

  IntervalResult pab = query_interval(gp, conditional(gp, "a", "b"), Mode::Markov, cfg);
  CHECK(std::fabs(pab.lower - 6.0 / 7) <= 0.015);
  CHECK(std::fabs(pab.upper - 1.0) <= 0.01);
}

TEST_CASE("xor example: [0.42, 0.58] with the Markov condition, [0,1] without") {
  GroundProgram gp = testsup::ground_text("0.3 <= P(x) <= 0.7\n0.3 <= P(y) <= 0.7");
  Query q;
  Formula x = Formula::make_atom("x");
  x.atom_index = gp.atom_index("x");
  Formula y = Formula::make_atom("y");
  y.atom_index = gp.atom_index("y");
  q.q = Formula::make_binary(Connective::Xor, x, y);

  nlp::SolverConfig cfg = fast_config(7);
  IntervalResult markov = query_interval(gp, q, Mode::Markov, cfg);
  CHECK(std::fabs(markov.lower - 0.42) <= 0.005);
  CHECK(std::fabs(markov.upper - 0.58) <= 0.005);

  IntervalResult nilsson = query_interval(gp, q, Mode::NoMarkov, cfg);
  CHECK(nilsson.lower <= 0.005);
  CHECK(nilsson.upper >= 0.995);
}

TEST_CASE("chain program answers P(b) = [0.3, 0.35]") {
  GroundProgram gp = testsup::ground_text(R"(
a1: 0.2 <= P(a) <= 0.3
a2: 0.6 <= P(b | a) <= 0.7
a3: 0.1 <= P(b | not a) <= 0.2
a4: 0.3 <= P(b) <= 0.4
)");
  IntervalResult pb = query_interval(gp, marginal(gp, "b"), Mode::Markov, fast_config(3));
  CHECK(std::fabs(pb.lower - 0.30) <= 0.003);
  CHECK(std::fabs(pb.upper - 0.35) <= 0.003);
}

TEST_CASE("no-markov intervals are never narrower") {
  Rng rng(41);
  for (int trial = 0; trial < 6; ++trial) {
    auto net = testsup::random_polytree(rng, 4, 0.25, false);
    GroundProgram gp = ground(net.to_lcn());
    Query q = marginal(gp, net.names[rng.next_below(net.n)]);
    nlp::SolverConfig cfg = fast_config(trial);
    IntervalResult with = query_interval(gp, q, Mode::Markov, cfg);
    IntervalResult without = query_interval(gp, q, Mode::NoMarkov, cfg);
    CHECK(without.lower <= with.lower + 1e-3);
    CHECK(without.upper >= with.upper - 1e-3);
  }
}

TEST_CASE("maxent: no sentences gives the uniform distribution") {
  GroundProgram gp;
  for (int i = 0; i < 2; ++i) {
    Atom a;
    a.name = "v" + std::to_string(i);
    a.text = a.name;
    a.index = i;
    gp.atoms.push_back(a);
  }
  MaxentResult me = query_maxent(gp, fast_config(5));
  for (double p : me.p) CHECK(p == doctest::Approx(0.25).epsilon(1e-4));
}

TEST_CASE("maxent: single point sentence factorizes") {
  GroundProgram gp = testsup::ground_text("P(a) = 0.3\n0 <= P(b) <= 1");
  MaxentResult me = query_maxent(gp, fast_config(5));
  Formula a = Formula::make_atom("a");
  a.atom_index = gp.atom_index("a");
  Formula b = Formula::make_atom("b");
  b.atom_index = gp.atom_index("b");
  CHECK(me.prob(a) == doctest::Approx(0.3).epsilon(1e-3));
  CHECK(me.prob(b) == doctest::Approx(0.5).epsilon(1e-3));
  Formula ab = Formula::make_binary(Connective::And, a, b);
  CHECK(me.prob(ab) == doctest::Approx(0.15).epsilon(2e-3));
}

TEST_CASE("maxent on the xor pair: P(x)=P(y)=0.5 and P(x xor y)=0.5") {
  GroundProgram gp = testsup::ground_text("0.3 <= P(x) <= 0.7\n0.3 <= P(y) <= 0.7");
  MaxentResult me = query_maxent(gp, fast_config(5));
  Formula x = Formula::make_atom("x");
  x.atom_index = gp.atom_index("x");
  Formula y = Formula::make_atom("y");
  y.atom_index = gp.atom_index("y");
  CHECK(me.prob(x) == doctest::Approx(0.5).epsilon(1e-3));
  CHECK(me.prob(y) == doctest::Approx(0.5).epsilon(1e-3));
  Formula f = Formula::make_binary(Connective::Xor, x, y);
  CHECK(me.prob(f) == doctest::Approx(0.5).epsilon(1e-3));
}

TEST_CASE("factored fast path: corner bounds for prior-only programs") {
  GroundProgram gp = testsup::ground_text("0.3 <= P(l1) <= 0.7\n0.3 <= P(l2) <= 0.7");
  Query q;
  Formula l1 = Formula::make_atom("l1");
  l1.atom_index = gp.atom_index("l1");
  Formula l2 = Formula::make_atom("l2");
  l2.atom_index = gp.atom_index("l2");
  q.q = Formula::make_binary(Connective::And, l1, Formula::make_not(l2));

  IntervalResult r = factored_query_interval(gp, q, fast_config(1));
  CHECK(r.lower == doctest::Approx(0.09).epsilon(1e-9));
  CHECK(r.upper == doctest::Approx(0.49).epsilon(1e-9));
}

TEST_CASE("factored fast path on a single atom equals the joint engine") {
  GroundProgram gp = testsup::ground_text("0.25 <= P(a) <= 0.6");
  Query q = marginal(gp, "a");
  IntervalResult fast = factored_query_interval(gp, q, fast_config(2));
  IntervalResult full = query_interval(gp, q, Mode::Markov, fast_config(2));
  CHECK(fast.lower == doctest::Approx(full.lower).epsilon(1e-4));
  CHECK(fast.upper == doctest::Approx(full.upper).epsilon(1e-4));
}

TEST_CASE("factored path refuses programs whose graph has edges") {
  GroundProgram gp = testsup::ground_text("0.2 <= P(b | a) <= 0.4");
  Query q = marginal(gp, "b");
  CHECK_THROWS_AS((void)factored_query_interval(gp, q, fast_config(0)), Error);
}

TEST_CASE("random edge-free programs: factored matches the full joint engine") {
  Rng rng(55);
  for (int trial = 0; trial < 8; ++trial) {
    const int n = 4 + static_cast<int>(rng.next_below(3));  // 4..6 atoms
    std::ostringstream program;
    for (int i = 0; i < n; ++i) {
      double lo = rng.uniform(0.15, 0.45), hi = lo + rng.uniform(0.05, 0.4);
      program << "p" << i << ": " << lo << " <= P(l" << i << ") <= " << std::min(0.9, hi)
              << "\n";
    }
    // AND/OR knowledge over consecutive atoms; tau=false keeps the graph bare
    for (int i = 0; i + 1 < n && i < 3; ++i) {
      const char* op = (i % 2 == 0) ? "and" : "or";
      double lo = (i % 2 == 0) ? 0.0 : 0.2;
      program << "k" << i << ": " << lo << " <= P(l" << i << " " << op << " l" << i + 1
              << ") <= " << ((i % 2 == 0) ? 0.6 : 1.0) << " ; tau=false\n";
    }
    GroundProgram gp = testsup::ground_text(program.str());
    REQUIRE(factored_applicable(gp));

    Query q;
    Formula a = Formula::make_atom("l0");
    a.atom_index = gp.atom_index("l0");
    Formula b = Formula::make_atom("l1");
    b.atom_index = gp.atom_index("l1");
    q.q = Formula::make_binary(Connective::And, a, Formula::make_not(b));

    nlp::SolverConfig cfg = fast_config(trial + 100);
    IntervalResult fast = factored_query_interval(gp, q, cfg);
    IntervalResult full = query_interval(gp, q, Mode::Markov, cfg);
    CAPTURE(program.str());
    CHECK(std::fabs(fast.lower - full.lower) <= 0.01);
    CHECK(std::fabs(fast.upper - full.upper) <= 0.01);
  }
}

TEST_CASE("credal vertex oracle: point networks give zero-width intervals") {
  Rng rng(60);
  auto net = testsup::random_polytree(rng, 5, 0.0, true);
  // query in net-node index space
  Query q;
  q.q = Formula::make_atom(net.names[2]);
  q.q.atom_index = 2;
  IntervalResult r = credal_vertex_oracle(net, q);
  CHECK(r.upper - r.lower <= 1e-12);
  // independent full-joint product evaluation
  double expect = testsup::bn_joint_query(net, satisfying_worlds(q.q, net.n), {}, false);
  CHECK(r.lower == doctest::Approx(expect).epsilon(1e-9));
}

TEST_CASE("credal chain: solver and vertex oracle agree") {
  GroundProgram gp = testsup::ground_text(R"(
c1: 0.3 <= P(x) <= 0.7
c2: 0.1 <= P(y | x) <= 0.2
c3: 0.6 <= P(y | not x) <= 0.7
c4: 0.3 <= P(z | y) <= 0.4
c5: 0.8 <= P(z | not y) <= 0.9
)");
  Query q = marginal(gp, "z");
  IntervalResult oracle = credal_vertex_oracle(gp, q);
  IntervalResult solved = query_interval(gp, q, Mode::Markov, fast_config(12));
  CHECK(std::fabs(solved.lower - oracle.lower) <= 0.02);
  CHECK(std::fabs(solved.upper - oracle.upper) <= 0.02);
}

TEST_CASE("random polytree credal networks: solver matches the oracle within 0.02") {
  Rng rng(61);
  for (int trial = 0; trial < 5; ++trial) {
    auto net = testsup::random_polytree(rng, 5, 0.25, false);
    GroundProgram gp = ground(net.to_lcn());
    int pick = static_cast<int>(rng.next_below(net.n));
    // the oracle indexes by net node, the solver by ground-program atom
    Query q_net;
    q_net.q = Formula::make_atom(net.names[pick]);
    q_net.q.atom_index = pick;
    IntervalResult oracle = credal_vertex_oracle(net, q_net);
    Query q_gp = marginal(gp, net.names[pick]);
    IntervalResult solved = query_interval(gp, q_gp, Mode::Markov, fast_config(trial));
    CAPTURE(trial);
    CHECK(std::fabs(solved.lower - oracle.lower) <= 0.02);
    CHECK(std::fabs(solved.upper - oracle.upper) <= 0.02);
    // the detection path sees the ground program directly and must agree
    IntervalResult detected = credal_vertex_oracle(gp, q_gp);
    CHECK(detected.lower == doctest::Approx(oracle.lower).epsilon(1e-9));
    CHECK(detected.upper == doctest::Approx(oracle.upper).epsilon(1e-9));
  }
}

TEST_CASE("detect_credal_network rejects non-credal programs") {
  GroundProgram gp = testsup::ground_text(R"(
a1: 0.2 <= P(a) <= 0.3
a2: 0.6 <= P(b | a) <= 0.7
a3: 0.1 <= P(b | not a) <= 0.2
a4: 0.3 <= P(b) <= 0.4
)");
  Query q = marginal(gp, "b");
  CHECK_THROWS_AS((void)credal_vertex_oracle(gp, q), Error);
}

TEST_CASE("infeasible program raises an infeasible error") {
  GroundProgram gp = testsup::ground_text("s1: 0.8 <= P(a) <= 0.9\ns2: 0.0 <= P(a) <= 0.1");
  Query q = marginal(gp, "a");
  CHECK_THROWS_AS((void)query_interval(gp, q, Mode::Markov, fast_config(0)), Error);
}

TEST_CASE("undefined conditional raises a user error") {
  GroundProgram gp = testsup::ground_text("P(e) = 0\n0 <= P(a) <= 1");
  Query q = conditional(gp, "a", "e");
  CHECK_THROWS_AS((void)query_interval(gp, q, Mode::Markov, fast_config(0)), Error);
}

TEST_CASE("rejection sampling merges only values inside the reported interval") {
  GroundProgram gp = testsup::ground_text("0.3 <= P(x) <= 0.7\n0.2 <= P(y) <= 0.9");
  Query q = marginal(gp, "x");
  nlp::SolverConfig cfg = fast_config(8);
  cfg.rejection_samples = 2000;
  IntervalResult merged = query_interval(gp, q, Mode::NoMarkov, cfg);
  cfg.rejection_samples = 0;
  IntervalResult plain = query_interval(gp, q, Mode::NoMarkov, cfg);
  CHECK(merged.lower >= plain.lower - 1e-6);
  CHECK(merged.upper <= plain.upper + 1e-6);
}
