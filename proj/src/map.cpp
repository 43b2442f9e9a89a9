#include "lcn/map.hpp"

#include <algorithm>
#include <cmath>

namespace lcn::map_infer {

namespace {

Formula conjunction_of(const std::vector<std::pair<int, bool>>& literals,
                       const GroundProgram& gp) {
  std::vector<Formula> lits;
  for (const auto& [atom, positive] : literals) {
    Formula a = Formula::make_atom(gp.atoms[atom].name, gp.atoms[atom].args);
    a.atom_index = atom;
    lits.push_back(positive ? std::move(a) : Formula::make_not(std::move(a)));
  }
  if (lits.size() == 1) return std::move(lits[0]);
  return Formula::make_nary(Connective::And, std::move(lits));
}

}  // namespace

Interval score_literals(const GroundProgram& gp,
                        const std::vector<std::pair<int, bool>>& literals,
                        const std::optional<Formula>& evidence,
                        const nlp::SolverConfig& config, bool use_factored) {
  Query q;
  q.q = conjunction_of(literals, gp);
  q.conditional = evidence.has_value();
  q.e = evidence;
  exact::IntervalResult r = use_factored
                                ? exact::factored_query_interval(gp, q, config)
                                : exact::query_interval(gp, q, exact::Mode::Markov, config);
  return {r.lower, r.upper};
}

MapResult map_assignment(const GroundProgram& gp, const MapTask& task,
                         const nlp::SolverConfig& config) {
  if (task.query_atoms.empty()) throw Error::user("MAP task has no query atoms");
  if (static_cast<int>(task.query_atoms.size()) > kMapEnumCap)
    throw Error::capacity("MAP enumeration over " + std::to_string(task.query_atoms.size()) +
                          " atoms exceeds the cap of " + std::to_string(kMapEnumCap));
  for (int a : task.query_atoms)
    if (a < 0 || a >= static_cast<int>(gp.atoms.size()))
      throw Error::user("MAP query atom outside the program");

  MapResult res;
  res.used_factored = !task.evidence && exact::factored_applicable(gp);
  const std::uint64_t count = std::uint64_t(1) << task.query_atoms.size();

  if (task.criterion == Criterion::Maxent) {
    double best = -1.0;
    if (res.used_factored) {
      exact::FactoredMaxent me = exact::factored_query_maxent(gp, config);
      for (std::uint64_t bits = 0; bits < count; ++bits) {
        double p = 1.0;
        for (std::size_t k = 0; k < task.query_atoms.size(); ++k) {
          double m = me.marginals[task.query_atoms[k]];
          p *= ((bits >> k) & 1u) ? m : 1.0 - m;
        }
        res.scores[static_cast<std::uint32_t>(bits)] = p;
        best = std::max(best, p);
      }
    } else {
      exact::MaxentResult me = exact::query_maxent(gp, config);
      for (std::uint64_t bits = 0; bits < count; ++bits) {
        std::vector<std::pair<int, bool>> lits;
        for (std::size_t k = 0; k < task.query_atoms.size(); ++k)
          lits.emplace_back(task.query_atoms[k], ((bits >> k) & 1u) != 0);
        Formula conj = conjunction_of(lits, gp);
        double p = task.evidence ? me.prob(conj, *task.evidence) : me.prob(conj);
        res.scores[static_cast<std::uint32_t>(bits)] = p;
        best = std::max(best, p);
      }
    }
    for (const auto& [bits, s] : res.scores)
      if (s >= best - kTieTol) res.argmax.push_back(bits);
    return res;
  }

  double best = -1.0;
  for (std::uint64_t bits = 0; bits < count; ++bits) {
    std::vector<std::pair<int, bool>> lits;
    for (std::size_t k = 0; k < task.query_atoms.size(); ++k)
      lits.emplace_back(task.query_atoms[k], ((bits >> k) & 1u) != 0);
    Interval iv = score_literals(gp, lits, task.evidence, config, res.used_factored);
    res.intervals[static_cast<std::uint32_t>(bits)] = iv;
    double score = task.criterion == Criterion::Maximax ? iv.hi : iv.lo;
    res.scores[static_cast<std::uint32_t>(bits)] = score;
    best = std::max(best, score);
  }
  for (const auto& [bits, s] : res.scores)
    if (s >= best - kTieTol) res.argmax.push_back(bits);
  return res;
}

}  // namespace lcn::map_infer
