#include "doctest.h"
#include "lcn/nlp.hpp"
#include "support.hpp"

using namespace lcn;
using namespace lcn::nlp;

namespace {

NLP simplex_lp(int m) {
  NLP p;
  p.dimension = m;
  p.simplex = true;
  return p;
}

std::vector<double> interior_point(Rng& rng, int m) {
  // strictly interior: mix a random simplex point with the uniform one
  std::vector<double> p = rng.simplex_point(m);
  for (double& v : p) v = 0.5 * v + 0.5 / m;
  return p;
}

}  // namespace

TEST_CASE("maximizing a coordinate over the bare simplex hits a vertex") {
  NLP p = simplex_lp(3);
  p.objective.kind = Objective::Kind::Linear;
  p.objective.linear = {{0, 1.0}};
  SolverConfig cfg;
  cfg.seed = 1;
  SolveReport r = solve(p, Direction::Maximize, cfg);
  CHECK(r.status == SolveStatus::Converged);
  CHECK(r.value == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(r.max_residual <= cfg.tol_feas);
}

TEST_CASE("random small LPs match the vertex-enumeration oracle") {
  Rng rng(5);
  int solved = 0;
  for (int trial = 0; trial < 30; ++trial) {
    const int m = 3 + static_cast<int>(rng.next_below(2));  // 3..4 variables
    NLP p = simplex_lp(m);
    const int rows = 1 + static_cast<int>(rng.next_below(3));
    for (int r = 0; r < rows; ++r) {
      LinearConstraint c;
      for (int i = 0; i < m; ++i)
        if (rng.next_below(2)) c.terms.emplace_back(i, 1.0);
      if (c.terms.empty()) c.terms.emplace_back(0, 1.0);
      c.rel = rng.next_below(2) ? Relation::LessEq : Relation::GreaterEq;
      c.rhs = rng.uniform(0.1, 0.9);
      p.linear_constraints.push_back(std::move(c));
    }
    p.objective.kind = Objective::Kind::Linear;
    for (int i = 0; i < m; ++i)
      if (rng.next_below(2)) p.objective.linear.emplace_back(i, 1.0);
    if (p.objective.linear.empty()) p.objective.linear.emplace_back(0, 1.0);

    testsup::LpOracleResult oracle = testsup::lp_vertex_oracle(p);
    if (!oracle.feasible) continue;
    ++solved;

    SolverConfig cfg;
    cfg.seed = 77 + trial;
    SolveReport lo = solve(p, Direction::Minimize, cfg);
    SolveReport hi = solve(p, Direction::Maximize, cfg);
    REQUIRE(lo.status == SolveStatus::Converged);
    REQUIRE(hi.status == SolveStatus::Converged);
    CHECK(lo.value == doctest::Approx(oracle.min_value).epsilon(1e-5));
    CHECK(hi.value == doctest::Approx(oracle.max_value).epsilon(1e-5));
  }
  CHECK(solved >= 15);  // the generator must exercise enough feasible programs
}

TEST_CASE("certificate property: converged reports are feasible points") {
  Rng rng(9);
  NLP p = simplex_lp(4);
  LinearConstraint c;
  c.terms = {{0, 1.0}, {1, 1.0}};
  c.rel = Relation::GreaterEq;
  c.rhs = 0.4;
  p.linear_constraints.push_back(c);
  QuadraticConstraint q;  // x0 * (x2+x3) == x1
  q.products.push_back({{0}, {2, 3}, 1.0});
  q.linear = {{1, -1.0}};
  p.quadratic_constraints.push_back(q);
  p.objective.kind = Objective::Kind::Linear;
  p.objective.linear = {{0, 1.0}, {2, 1.0}};

  SolverConfig cfg;
  cfg.seed = 3;
  for (Direction d : {Direction::Minimize, Direction::Maximize}) {
    SolveReport r = solve(p, d, cfg);
    REQUIRE(r.status == SolveStatus::Converged);
    CHECK(r.max_residual <= cfg.tol_feas);
    // value is the objective at the returned point
    double v = 0;
    for (auto [i, co] : p.objective.linear) v += co * r.point[i];
    CHECK(r.value == doctest::Approx(v).epsilon(1e-12));
    double sum = 0;
    for (double x : r.point) {
      CHECK(x >= -1e-12);
      sum += x;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("determinism: identical inputs give identical reports") {
  NLP p = simplex_lp(4);
  QuadraticConstraint q;
  q.products.push_back({{0, 1}, {2, 3}, 1.0});
  q.constant = -0.2;
  p.quadratic_constraints.push_back(q);
  p.objective.kind = Objective::Kind::Linear;
  p.objective.linear = {{1, 1.0}, {3, 0.5}};
  SolverConfig cfg;
  cfg.seed = 42;
  SolveReport a = solve(p, Direction::Maximize, cfg);
  SolveReport b = solve(p, Direction::Maximize, cfg);
  CHECK(a.value == b.value);
  CHECK(a.point == b.point);
  CHECK(a.starts_used == b.starts_used);
}

TEST_CASE("monotonicity in starts") {
  NLP p = simplex_lp(6);
  QuadraticConstraint q;
  q.products.push_back({{0, 1, 2}, {3, 4, 5}, 1.0});
  q.constant = -0.21;
  p.quadratic_constraints.push_back(q);
  p.objective.kind = Objective::Kind::Linear;
  p.objective.linear = {{0, 1.0}, {4, 0.25}};

  double prev_max = -1e300, prev_min = 1e300;
  for (int k = 1; k <= 12; k += 2) {
    SolverConfig cfg;
    cfg.seed = 11;
    cfg.starts = k;
    SolveReport hi = solve(p, Direction::Maximize, cfg);
    SolveReport lo = solve(p, Direction::Minimize, cfg);
    if (hi.status == SolveStatus::Converged) {
      CHECK(hi.value >= prev_max - 1e-12);
      prev_max = std::max(prev_max, hi.value);
    }
    if (lo.status == SolveStatus::Converged) {
      CHECK(lo.value <= prev_min + 1e-12);
      prev_min = std::min(prev_min, lo.value);
    }
  }
}

TEST_CASE("infeasible programs are reported as such") {
  NLP p = simplex_lp(4);
  LinearConstraint a;
  a.terms = {{0, 1.0}};
  a.rel = Relation::GreaterEq;
  a.rhs = 0.8;
  LinearConstraint b;
  b.terms = {{0, 1.0}};
  b.rel = Relation::LessEq;
  b.rhs = 0.1;
  p.linear_constraints = {a, b};
  p.objective.kind = Objective::Kind::Linear;
  p.objective.linear = {{0, 1.0}};
  SolverConfig cfg;
  cfg.seed = 1;
  SolveReport r = solve(p, Direction::Maximize, cfg);
  CHECK(r.status == SolveStatus::Infeasible);
}

TEST_CASE("gradient checks: linear exact, entropy and quadratics within 1e-5") {
  Rng rng(17);

  NLP lin = simplex_lp(5);
  lin.objective.kind = Objective::Kind::Linear;
  lin.objective.linear = {{0, 1.0}, {3, -2.0}};
  CHECK(check_gradients(lin, interior_point(rng, 5)) <= 1e-8);

  NLP ent = simplex_lp(5);
  ent.objective.kind = Objective::Kind::Entropy;
  std::vector<double> uniform(5, 0.2);
  CHECK(check_gradients(ent, uniform) <= 1e-5);

  // all objective/constraint kinds at 100 random interior points
  for (int trial = 0; trial < 100; ++trial) {
    const int m = 4 + static_cast<int>(rng.next_below(3));
    NLP p = simplex_lp(m);
    switch (trial % 3) {
      case 0:
        p.objective.kind = Objective::Kind::Linear;
        p.objective.linear = {{0, 1.0}, {m - 1, 0.5}};
        break;
      case 1:
        p.objective.kind = Objective::Kind::Ratio;
        p.objective.linear = {{0, 1.0}, {1, 1.0}};
        p.objective.denominator = {{1, 1.0}, {2, 1.0}, {3, 1.0}};
        break;
      default:
        p.objective.kind = Objective::Kind::Entropy;
        break;
    }
    LinearConstraint c;
    c.terms = {{0, 1.0}, {2, -0.3}};
    c.rel = Relation::LessEq;
    c.rhs = 0.5;
    p.linear_constraints.push_back(c);
    QuadraticConstraint q;
    q.products.push_back({{0, 1}, {2, 3}, 1.0});
    q.products.push_back({{1}, {0, 3}, -0.5});
    q.linear = {{0, 0.25}};
    q.constant = -0.1;
    p.quadratic_constraints.push_back(q);
    CHECK(check_gradients(p, interior_point(rng, m)) <= 1e-5);
  }
}

TEST_CASE("quadratic triplet expansion matches the factored evaluation") {
  QuadraticConstraint q;
  q.products.push_back({{0, 1}, {1, 2}, 2.0});
  q.linear = {{0, 1.0}};
  q.constant = -0.5;
  std::vector<double> x = {0.2, 0.3, 0.5};
  double via_triplets = q.constant;
  for (auto [i, c] : q.linear) via_triplets += c * x[i];
  q.for_each_triplet([&](int i, int j, double c) { via_triplets += c * x[i] * x[j]; });
  double direct = q.constant + 1.0 * x[0] + 2.0 * (x[0] + x[1]) * (x[1] + x[2]);
  CHECK(via_triplets == doctest::Approx(direct).epsilon(1e-12));
}

TEST_CASE("simplex projection") {
  std::vector<double> v = {0.5, 0.5, 0.5};
  project_to_simplex(v);
  double sum = 0;
  for (double x : v) {
    CHECK(x >= 0);
    sum += x;
  }
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(v[0] == doctest::Approx(1.0 / 3).epsilon(1e-12));

  std::vector<double> w = {10.0, -5.0, 0.0};
  project_to_simplex(w);
  CHECK(w[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(w[1] == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("dimension overflow raises a capacity error") {
  NLP p = simplex_lp((1 << 20) + 1);
  CHECK_THROWS_AS((void)solve(p, Direction::Minimize, SolverConfig{}), Error);
}
