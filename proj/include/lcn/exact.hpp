#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "lcn/depgraph.hpp"
#include "lcn/model.hpp"
#include "lcn/nlp.hpp"

namespace lcn::exact {

enum class Mode { Markov, NoMarkov };

// The compiled constraint program: one decision variable per world, simplex
// handled natively by the solver, sentence bounds as linear rows, Markov
// statements as quadratic equality rows (Markov mode only).
struct ConstraintProgram {
  nlp::NLP nlp;
  int atom_count = 0;
  std::vector<std::string> atom_names;

  struct RowInfo {
    std::string sentence_label;
    int row = -1;
    bool vacuous = false;
  };
  std::vector<RowInfo> sentence_rows;

  struct QuadInfo {
    int statement_atom = -1;
    int row = -1;  // index into nlp.quadratic_constraints
  };
  std::vector<QuadInfo> markov_rows;
};

std::vector<nlp::LinearConstraint> build_linear_constraints(const GroundProgram& gp);

// One quadratic equality per (parent config, non-all-false ndnp config), x
// fixed true; the complement rows are implied by normalization. Duplicate
// constraints (symmetric pairwise independence seen from both sides) collapse.
std::vector<nlp::QuadraticConstraint> build_markov_constraints(
    const std::vector<IndependenceStatement>& statements, int atom_count);

ConstraintProgram compile(const GroundProgram& gp, Mode mode);

struct SideStatus {
  nlp::SolveStatus status = nlp::SolveStatus::Infeasible;
  double residual = 0.0;
};

struct IntervalResult {
  double lower = 0.0;
  double upper = 1.0;
  SideStatus lo, hi;
  nlp::SolveReport lo_report, hi_report;
};

// Optimizes P(q) (or the ratio for a conditional query) over the compiled
// program in both directions. Throws: infeasible program, undefined
// conditional (max P(e) <= denominator floor), capacity beyond the atom cap.
IntervalResult query_interval(const GroundProgram& gp, const Query& query, Mode mode,
                              const nlp::SolverConfig& config);

struct MaxentResult {
  std::vector<double> p;   // one entry per world
  int atom_count = 0;
  double entropy = 0.0;
  double prob(const Formula& f) const;
  double prob(const Formula& f, const Formula& given) const;
};

// Feasible distribution minimizing sum p log p, Markov constraints included.
MaxentResult query_maxent(const GroundProgram& gp, const nlp::SolverConfig& config);

// ---- factored fast path -----------------------------------------------------
// Valid only when the dependency graph has no edges: the Markov condition then
// forces full mutual independence and the feasible set is exactly the set of
// product distributions, so inference runs over the n marginals.

bool factored_applicable(const GroundProgram& gp);

IntervalResult factored_query_interval(const GroundProgram& gp, const Query& query,
                                       const nlp::SolverConfig& config);

struct FactoredMaxent {
  std::vector<double> marginals;
  double prob(const Formula& f) const;
};

FactoredMaxent factored_query_maxent(const GroundProgram& gp,
                                     const nlp::SolverConfig& config);

// ---- credal-network vertex oracle --------------------------------------------

struct CredalNetwork {
  int n = 0;
  std::vector<std::vector<int>> parents;                      // per node, sorted
  std::vector<std::vector<std::array<double, 2>>> cpt;        // [node][parent config]
  std::vector<std::string> names;                             // atom names

  LCNProgram to_lcn() const;
};

// Reconstructs a separately specified credal network from a BN/CN-structured
// ground program (unique assessment, CPT-complete, acyclic) or throws.
CredalNetwork detect_credal_network(const GroundProgram& gp);

// Enumerates all interval-endpoint combinations of the CPT entries and takes
// min/max of the query over the resulting product-form joints.
IntervalResult credal_vertex_oracle(const GroundProgram& gp, const Query& query);
IntervalResult credal_vertex_oracle(const CredalNetwork& net, const Query& query);

// Indicator rows shared with the BP local programs.
std::vector<std::pair<int, double>> world_indicator(const std::vector<World>& worlds);

}  // namespace lcn::exact
