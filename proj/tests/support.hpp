#pragma once

// Shared test fixtures and independent oracles. Everything here stays out of
// the library so the oracles cannot share code paths with the implementation
// they check.

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "lcn/exact.hpp"
#include "lcn/model.hpp"
#include "lcn/nlp.hpp"
#include "lcn/parser.hpp"
#include "lcn/rng.hpp"

namespace testsup {

inline lcn::LCNProgram parse_or_die(const std::string& text) {
  lcn::ParseResult r = lcn::parse_program(text);
  if (!r.ok()) {
    std::string msg = "parse failed:";
    for (const auto& d : r.diagnostics)
      msg += " [" + std::to_string(d.line) + ":" + std::to_string(d.column) + "] " + d.message;
    throw std::runtime_error(msg);
  }
  return *r.program;
}

inline lcn::GroundProgram ground_text(const std::string& text) {
  return lcn::ground(parse_or_die(text));
}

inline std::string data_file(const std::string& name) {
  return std::string(LCN_DATA_DIR) + "/" + name;
}

// Brute-force truth evaluation written independently of lcn::evaluate:
// recursion over the raw connective definitions with no canonicalization.
inline bool eval_oracle(const lcn::Formula& f, lcn::World w) {
  using lcn::Connective;
  switch (f.kind) {
    case Connective::Atom:
      return ((w >> f.atom_index) & 1u) != 0;
    case Connective::Not:
      return !eval_oracle(f.children[0], w);
    case Connective::And: {
      bool v = true;
      for (const auto& c : f.children) v = v && eval_oracle(c, w);
      return v;
    }
    case Connective::Or: {
      bool v = false;
      for (const auto& c : f.children) v = v || eval_oracle(c, w);
      return v;
    }
    case Connective::Xor: {
      int ones = 0;
      for (const auto& c : f.children) ones += eval_oracle(c, w) ? 1 : 0;
      return ones % 2 == 1;
    }
    case Connective::Implies:
      return eval_oracle(f.children[1], w) || !eval_oracle(f.children[0], w);
    case Connective::Iff:
      return eval_oracle(f.children[0], w) == eval_oracle(f.children[1], w);
    default:
      throw std::runtime_error("oracle: quantifier in ground formula");
  }
}

// Random ground formula over atoms [0, n).
inline lcn::Formula random_formula(lcn::Rng& rng, int n, int depth) {
  using lcn::Connective;
  using lcn::Formula;
  if (depth == 0 || rng.next_below(4) == 0) {
    Formula a = Formula::make_atom("a" + std::to_string(rng.next_below(n)));
    a.atom_index = static_cast<int>(rng.next_below(n));
    a.name = "a" + std::to_string(a.atom_index);
    return a;
  }
  switch (rng.next_below(6)) {
    case 0:
      return Formula::make_not(random_formula(rng, n, depth - 1));
    case 1:
    case 2: {
      std::vector<Formula> cs;
      int k = 2 + static_cast<int>(rng.next_below(2));
      for (int i = 0; i < k; ++i) cs.push_back(random_formula(rng, n, depth - 1));
      return Formula::make_nary(rng.next_below(2) ? Connective::And : Connective::Or,
                                std::move(cs));
    }
    case 3: {
      std::vector<Formula> cs;
      cs.push_back(random_formula(rng, n, depth - 1));
      cs.push_back(random_formula(rng, n, depth - 1));
      return Formula::make_nary(Connective::Xor, std::move(cs));
    }
    case 4:
      return Formula::make_binary(Connective::Implies, random_formula(rng, n, depth - 1),
                                  random_formula(rng, n, depth - 1));
    default:
      return Formula::make_binary(Connective::Iff, random_formula(rng, n, depth - 1),
                                  random_formula(rng, n, depth - 1));
  }
}

// ---- LP vertex-enumeration oracle -------------------------------------------
// Enumerates basic feasible solutions of {x >= 0, sum x = 1, rows} and takes
// the extreme objective values. Only for small linear programs.

struct LpOracleResult {
  double min_value = 0, max_value = 0;
  bool feasible = false;
};

inline LpOracleResult lp_vertex_oracle(const lcn::nlp::NLP& nlp) {
  const int n = nlp.dimension;
  // Build the full constraint list as rows a.x (rel) b, including simplex.
  struct Row {
    std::vector<double> a;
    double b;
    int rel;  // -1: <=, 0: ==, +1: >=
  };
  std::vector<Row> rows;
  {
    Row sum{std::vector<double>(n, 1.0), 1.0, 0};
    rows.push_back(sum);
  }
  for (int i = 0; i < n; ++i) {
    Row r{std::vector<double>(n, 0.0), 0.0, 1};
    r.a[i] = 1.0;
    rows.push_back(r);
  }
  for (const auto& c : nlp.linear_constraints) {
    Row r{std::vector<double>(n, 0.0), c.rhs, 0};
    for (auto [i, v] : c.terms) r.a[i] += v;
    r.rel = c.rel == lcn::nlp::Relation::LessEq ? -1
            : c.rel == lcn::nlp::Relation::GreaterEq ? 1 : 0;
    rows.push_back(r);
  }

  auto feasible = [&](const std::vector<double>& x) {
    for (const Row& r : rows) {
      double v = 0;
      for (int i = 0; i < n; ++i) v += r.a[i] * x[i];
      if (r.rel == 0 && std::fabs(v - r.b) > 1e-8) return false;
      if (r.rel < 0 && v > r.b + 1e-8) return false;
      if (r.rel > 0 && v < r.b - 1e-8) return false;
    }
    return true;
  };

  // Solve each n x n subsystem of tight constraints by Gaussian elimination.
  const int m = static_cast<int>(rows.size());
  std::vector<int> pick(n);
  LpOracleResult res;
  auto objective = [&](const std::vector<double>& x) {
    double v = 0;
    for (auto [i, c] : nlp.objective.linear) v += c * x[i];
    return v;
  };

  std::function<void(int, int)> rec = [&](int start, int chosen) {
    if (chosen == n) {
      std::vector<std::vector<double>> mat(n, std::vector<double>(n + 1));
      for (int r = 0; r < n; ++r) {
        for (int i = 0; i < n; ++i) mat[r][i] = rows[pick[r]].a[i];
        mat[r][n] = rows[pick[r]].b;
      }
      // Gaussian elimination with partial pivoting.
      for (int col = 0; col < n; ++col) {
        int piv = -1;
        double best = 1e-10;
        for (int r = col; r < n; ++r)
          if (std::fabs(mat[r][col]) > best) {
            best = std::fabs(mat[r][col]);
            piv = r;
          }
        if (piv < 0) return;
        std::swap(mat[col], mat[piv]);
        for (int r = 0; r < n; ++r) {
          if (r == col) continue;
          double f = mat[r][col] / mat[col][col];
          for (int i = col; i <= n; ++i) mat[r][i] -= f * mat[col][i];
        }
      }
      std::vector<double> x(n);
      for (int i = 0; i < n; ++i) x[i] = mat[i][n] / mat[i][i];
      if (!feasible(x)) return;
      double v = objective(x);
      if (!res.feasible) {
        res.feasible = true;
        res.min_value = res.max_value = v;
      } else {
        res.min_value = std::min(res.min_value, v);
        res.max_value = std::max(res.max_value, v);
      }
      return;
    }
    if (start == m) return;
    pick[chosen] = start;
    rec(start + 1, chosen + 1);
    rec(start + 1, chosen);
  };
  rec(0, 0);
  return res;
}

// ---- random credal / Bayesian network generators ------------------------------

struct TestNet {
  lcn::exact::CredalNetwork net;
};

// Random polytree over n binary nodes with parent count capped at 2 and
// interval CPT entries inside [margin, 1-margin].
inline lcn::exact::CredalNetwork random_polytree(lcn::Rng& rng, int n, double max_width,
                                                 bool point_probabilities) {
  lcn::exact::CredalNetwork net;
  net.n = n;
  net.parents.resize(n);
  net.cpt.resize(n);
  for (int i = 0; i < n; ++i) net.names.push_back("x" + std::to_string(i));

  // random spanning tree: connect each node i>0 to a random earlier node,
  // orienting the edge at random while respecting the parent cap.
  for (int i = 1; i < n; ++i) {
    int j = static_cast<int>(rng.next_below(i));
    bool j_parent_of_i = rng.next_below(2) == 0;
    if (j_parent_of_i && net.parents[i].size() >= 2) j_parent_of_i = false;
    if (!j_parent_of_i && net.parents[j].size() >= 2) j_parent_of_i = true;
    if (j_parent_of_i && net.parents[i].size() >= 2) continue;  // drop the edge
    if (j_parent_of_i)
      net.parents[i].push_back(j);
    else
      net.parents[j].push_back(i);
  }
  for (int i = 0; i < n; ++i) std::sort(net.parents[i].begin(), net.parents[i].end());

  for (int i = 0; i < n; ++i) {
    std::size_t configs = std::size_t(1) << net.parents[i].size();
    net.cpt[i].resize(configs);
    for (std::size_t c = 0; c < configs; ++c) {
      double center = rng.uniform(0.15, 0.85);
      double w = point_probabilities ? 0.0 : rng.uniform(0.0, max_width);
      double lo = std::max(0.05, center - w / 2);
      double hi = std::min(0.95, center + w / 2);
      net.cpt[i][c] = {lo, hi};
    }
  }
  return net;
}

// Exhaustive joint inference for a point-probability Bayesian network.
inline double bn_joint_query(const lcn::exact::CredalNetwork& net,
                             const std::vector<lcn::World>& qw,
                             const std::vector<lcn::World>& ew, bool conditional) {
  const int n = net.n;
  const lcn::World limit = lcn::World(1) << n;
  std::vector<double> joint(limit, 1.0);
  for (lcn::World w = 0; w < limit; ++w) {
    double p = 1.0;
    for (int i = 0; i < n; ++i) {
      std::size_t cfg = 0;
      for (std::size_t k = 0; k < net.parents[i].size(); ++k)
        if ((w >> net.parents[i][k]) & 1u) cfg |= std::size_t(1) << k;
      double t = net.cpt[i][cfg][0];
      p *= ((w >> i) & 1u) ? t : 1.0 - t;
    }
    joint[w] = p;
  }
  std::set<lcn::World> qs(qw.begin(), qw.end()), es(ew.begin(), ew.end());
  if (!conditional) {
    double v = 0;
    for (lcn::World w : qs) v += joint[w];
    return v;
  }
  double num = 0, den = 0;
  for (lcn::World w = 0; w < limit; ++w) {
    if (es.count(w)) {
      den += joint[w];
      if (qs.count(w)) num += joint[w];
    }
  }
  return num / den;
}

}  // namespace testsup
