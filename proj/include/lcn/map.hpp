#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "lcn/exact.hpp"
#include "lcn/model.hpp"
#include "lcn/nlp.hpp"

namespace lcn::map_infer {

enum class Criterion { Maximax, Maximin, Maxent };

struct MapTask {
  std::vector<int> query_atoms;      // non-empty, subset of program atoms
  std::optional<Formula> evidence;   // conditioning formula
  Criterion criterion = Criterion::Maximax;
};

struct Interval {
  double lo = 0.0;
  double hi = 1.0;
};

struct MapResult {
  // Assignment bit k corresponds to query_atoms[k]; argmax holds the full tie
  // set sorted ascending (lexicographic order of assignments).
  std::vector<std::uint32_t> argmax;
  std::map<std::uint32_t, double> scores;
  std::map<std::uint32_t, Interval> intervals;  // maximax/maximin detail
  bool used_factored = false;
};

constexpr int kMapEnumCap = 20;
constexpr double kTieTol = 1e-9;

// Scores a literal-conjunction query (optionally conditioned on evidence)
// through the exact engine, or the factored fast path on edge-free programs.
Interval score_literals(const GroundProgram& gp,
                        const std::vector<std::pair<int, bool>>& literals,
                        const std::optional<Formula>& evidence,
                        const nlp::SolverConfig& config, bool use_factored);

// Enumerates all assignments to the query atoms, scores them under the
// criterion, and returns the complete argmax set.
MapResult map_assignment(const GroundProgram& gp, const MapTask& task,
                         const nlp::SolverConfig& config);

}  // namespace lcn::map_infer
