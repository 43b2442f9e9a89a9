#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "lcn/error.hpp"

namespace lcn::nlp {

enum class Relation { LessEq, GreaterEq, Equal };

struct LinearConstraint {
  std::vector<std::pair<int, double>> terms;
  Relation rel = Relation::LessEq;
  double rhs = 0.0;
  bool vacuous = false;  // always satisfied on the simplex; retained for provenance
  std::string tag;
};

// coeff * (sum_{i in a} x_i) * (sum_{j in b} x_j)
struct BilinearTerm {
  std::vector<int> a, b;
  double coeff = 1.0;
};

// Equality constraint: sum of bilinear products + linear part + constant == 0.
struct QuadraticConstraint {
  std::vector<BilinearTerm> products;
  std::vector<std::pair<int, double>> linear;
  double constant = 0.0;
  std::string tag;

  // Expanded sparse (i, j, coeff) view of the quadratic part.
  void for_each_triplet(const std::function<void(int, int, double)>& fn) const;
};

struct Objective {
  enum class Kind { Linear, Ratio, Entropy };
  Kind kind = Kind::Linear;
  std::vector<std::pair<int, double>> linear;       // Linear, or Ratio numerator
  std::vector<std::pair<int, double>> denominator;  // Ratio only
  double denom_floor = 1e-9;
};

struct NLP {
  int dimension = 0;
  bool simplex = true;  // x >= 0, sum x == 1
  // When the decision vector is a distribution over the worlds of k atoms
  // (dimension == 2^k), multistart seeds include random product
  // distributions; those satisfy every independence constraint exactly.
  int structure_atoms = 0;
  std::vector<LinearConstraint> linear_constraints;
  std::vector<QuadraticConstraint> quadratic_constraints;
  Objective objective;
};

enum class Direction { Minimize, Maximize };
enum class SolveStatus { Converged, MaxIterations, Infeasible };

struct SolverConfig {
  int starts = 16;
  double tol_feas = 1e-7;
  double tol_step = 1e-9;
  int max_outer = 200;
  int max_inner = 400;
  std::uint64_t seed = 0;
  int threads = 1;
  int rejection_samples = 0;  // test mode: merge uniform feasible samples into bounds
};

struct SolveReport {
  double value = 0.0;
  std::vector<double> point;
  SolveStatus status = SolveStatus::Infeasible;
  double max_residual = std::numeric_limits<double>::infinity();
  int starts_used = 0;
};

// Certificate solver: a Converged report returns a feasible point (residual
// <= tol_feas) and its objective value, so for Maximize the true optimum is
// >= value and for Minimize it is <= value. Deterministic in (nlp, config).
SolveReport solve(const NLP& nlp, Direction direction, const SolverConfig& config);

// Max abs error between analytic gradients and central finite differences
// (h = 1e-6) over the objective and every constraint residual.
double check_gradients(const NLP& nlp, const std::vector<double>& point);

// Euclidean projection onto the probability simplex.
void project_to_simplex(std::vector<double>& v);

double eval_objective(const Objective& obj, const std::vector<double>& x);

}  // namespace lcn::nlp
