#pragma once

#include <map>
#include <string>
#include <vector>

#include "lcn/exact.hpp"
#include "lcn/model.hpp"
#include "lcn/nlp.hpp"

namespace lcn::bp {

struct Interval {
  double lo = 0.0;
  double hi = 1.0;
};

// Bipartite factor graph: one variable node per atom, one factor node per
// group of sentences sharing an identical atom set.
struct FactorGraph {
  struct Factor {
    std::vector<int> atoms;         // sorted global atom indices
    std::vector<int> sentences;     // indices into gp.sentences
  };
  std::vector<Factor> factors;                // deterministic first-appearance order
  std::vector<std::vector<int>> var_factors;  // per atom: incident factors
};

FactorGraph build_factor_graph(const GroundProgram& gp);

struct BpConfig {
  nlp::SolverConfig solver;  // local constraint programs (defaults to 8 starts)
  int max_rounds = 100;
  double msg_tol = 1e-6;
  bool trace = false;

  BpConfig() { solver.starts = 8; }
};

// Degree-one variables send [0,1]; otherwise the tightest combination of the
// other factors' messages. Throws when the interval crosses.
Interval variable_to_factor(const FactorGraph& fg, int atom, int factor,
                            const std::map<std::pair<int, int>, Interval>& factor_to_var_msgs,
                            const GroundProgram& gp);

// Solves the factor's local constraint program (its sentences, interval rows
// for the other neighbors, pairwise independence among them) for min/max P(v).
Interval factor_to_variable(const FactorGraph& fg, int factor, int atom,
                            const std::map<std::pair<int, int>, Interval>& var_to_factor_msgs,
                            const GroundProgram& gp, const nlp::SolverConfig& solver);

struct BpResult {
  std::vector<Interval> per_atom;
  int rounds = 0;
  std::map<std::pair<int, int>, Interval> var_to_factor;  // (atom, factor)
  std::map<std::pair<int, int>, Interval> factor_to_var;  // (factor, atom)
  std::vector<std::string> trace;
  // per-round message snapshots for monotonicity checks
  std::vector<std::map<std::pair<int, int>, Interval>> history_var_to_factor;
  std::vector<std::map<std::pair<int, int>, Interval>> history_factor_to_var;
};

// Synchronous rounds from all-[0,1] until no message moves more than msg_tol
// or the round cap; per-atom result combines incident factor messages.
BpResult run_bp(const GroundProgram& gp, const BpConfig& config);

}  // namespace lcn::bp
