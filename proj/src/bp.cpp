#include "lcn/bp.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace lcn::bp {

namespace {

constexpr double kCross = 1e-9;

void remap_formula(Formula& f, const std::map<int, int>& local) {
  if (f.kind == Connective::Atom) {
    f.atom_index = local.at(f.atom_index);
    return;
  }
  for (Formula& c : f.children) remap_formula(c, local);
}

// The factor's sentences over its own atom set, re-indexed to local bits.
GroundProgram local_program(const FactorGraph::Factor& factor, const GroundProgram& gp) {
  GroundProgram local;
  std::map<int, int> idx;
  for (std::size_t i = 0; i < factor.atoms.size(); ++i) {
    const Atom& a = gp.atoms[factor.atoms[i]];
    Atom la = a;
    la.index = static_cast<int>(i);
    idx[a.index] = la.index;
    local.atoms.push_back(std::move(la));
  }
  for (int si : factor.sentences) {
    GroundSentence s = gp.sentences[si];
    remap_formula(s.q, idx);
    if (s.r) remap_formula(*s.r, idx);
    local.sentences.push_back(std::move(s));
  }
  return local;
}

std::vector<int> atom_worlds(int local_atom, int k) {
  std::vector<int> out;
  const World limit = World(1) << k;
  for (World w = 0; w < limit; ++w)
    if ((w >> local_atom) & 1u) out.push_back(static_cast<int>(w));
  return out;
}

}  // namespace

FactorGraph build_factor_graph(const GroundProgram& gp) {
  FactorGraph fg;
  fg.var_factors.resize(gp.atoms.size());
  std::map<std::vector<int>, int> by_atom_set;
  for (std::size_t si = 0; si < gp.sentences.size(); ++si) {
    const GroundSentence& s = gp.sentences[si];
    std::vector<int> atoms = atom_indices(s.q);
    if (s.r) {
      std::vector<int> ra = atom_indices(*s.r);
      atoms.insert(atoms.end(), ra.begin(), ra.end());
      std::sort(atoms.begin(), atoms.end());
      atoms.erase(std::unique(atoms.begin(), atoms.end()), atoms.end());
    }
    auto it = by_atom_set.find(atoms);
    int fi;
    if (it == by_atom_set.end()) {
      fi = static_cast<int>(fg.factors.size());
      by_atom_set.emplace(atoms, fi);
      FactorGraph::Factor f;
      f.atoms = atoms;
      fg.factors.push_back(std::move(f));
      for (int a : atoms) fg.var_factors[a].push_back(fi);
    } else {
      fi = it->second;
    }
    fg.factors[fi].sentences.push_back(static_cast<int>(si));
  }
  return fg;
}

Interval variable_to_factor(const FactorGraph& fg, int atom, int factor,
                            const std::map<std::pair<int, int>, Interval>& factor_to_var_msgs,
                            const GroundProgram& gp) {
  const auto& incident = fg.var_factors[atom];
  if (incident.size() <= 1) return {0.0, 1.0};
  Interval out{0.0, 1.0};
  for (int f : incident) {
    if (f == factor) continue;
    const Interval& msg = factor_to_var_msgs.at({f, atom});
    out.lo = std::max(out.lo, msg.lo);
    out.hi = std::min(out.hi, msg.hi);
  }
  if (out.lo > out.hi + kCross)
    throw Error::inconsistent("inconsistent bounds for atom '" + gp.atoms[atom].text +
                              "': [" + std::to_string(out.lo) + ", " +
                              std::to_string(out.hi) + "]");
  return out;
}

Interval factor_to_variable(const FactorGraph& fg, int factor, int atom,
                            const std::map<std::pair<int, int>, Interval>& var_to_factor_msgs,
                            const GroundProgram& gp, const nlp::SolverConfig& solver) {
  const FactorGraph::Factor& f = fg.factors[factor];
  const int k = static_cast<int>(f.atoms.size());
  GroundProgram local = local_program(f, gp);

  nlp::NLP prog;
  prog.dimension = 1 << k;
  prog.simplex = true;
  prog.structure_atoms = k;
  prog.linear_constraints = exact::build_linear_constraints(local);

  int local_v = -1;
  std::vector<int> others;
  for (int i = 0; i < k; ++i) {
    if (f.atoms[i] == atom)
      local_v = i;
    else
      others.push_back(i);
  }
  if (local_v < 0) throw Error::user("factor_to_variable: atom not adjacent to factor");

  // interval rows for the other neighbors
  for (int o : others) {
    const Interval& msg = var_to_factor_msgs.at({f.atoms[o], factor});
    auto terms = exact::world_indicator(
        std::vector<World>(atom_worlds(o, k).begin(), atom_worlds(o, k).end()));
    if (msg.lo > 0.0) {
      nlp::LinearConstraint lo;
      lo.terms = terms;
      lo.rel = nlp::Relation::GreaterEq;
      lo.rhs = msg.lo;
      prog.linear_constraints.push_back(std::move(lo));
    }
    if (msg.hi < 1.0) {
      nlp::LinearConstraint hi;
      hi.terms = terms;
      hi.rel = nlp::Relation::LessEq;
      hi.rhs = msg.hi;
      prog.linear_constraints.push_back(std::move(hi));
    }
  }

  // pairwise independence among the other neighbors: P(a & b) == P(a) P(b)
  for (std::size_t i = 0; i < others.size(); ++i) {
    for (std::size_t j = i + 1; j < others.size(); ++j) {
      nlp::QuadraticConstraint q;
      nlp::BilinearTerm t;
      t.a = atom_worlds(others[i], k);
      t.b = atom_worlds(others[j], k);
      t.coeff = 1.0;
      q.products.push_back(std::move(t));
      const World limit = World(1) << k;
      for (World w = 0; w < limit; ++w)
        if (((w >> others[i]) & 1u) && ((w >> others[j]) & 1u))
          q.linear.emplace_back(static_cast<int>(w), -1.0);
      prog.quadratic_constraints.push_back(std::move(q));
    }
  }

  prog.objective.kind = nlp::Objective::Kind::Linear;
  prog.objective.linear = exact::world_indicator(
      std::vector<World>(atom_worlds(local_v, k).begin(), atom_worlds(local_v, k).end()));

  nlp::SolveReport lo = nlp::solve(prog, nlp::Direction::Minimize, solver);
  nlp::SolveReport hi = nlp::solve(prog, nlp::Direction::Maximize, solver);
  if (lo.status == nlp::SolveStatus::Infeasible || hi.status == nlp::SolveStatus::Infeasible) {
    std::ostringstream os;
    os << "local constraint program of factor {";
    for (std::size_t i = 0; i < f.atoms.size(); ++i)
      os << (i ? "," : "") << gp.atoms[f.atoms[i]].text;
    os << "} is infeasible";
    throw Error::inconsistent(os.str());
  }
  return {lo.value, hi.value};
}

BpResult run_bp(const GroundProgram& gp, const BpConfig& config) {
  FactorGraph fg = build_factor_graph(gp);
  BpResult res;
  const int n = static_cast<int>(gp.atoms.size());

  std::map<std::pair<int, int>, Interval> vf, fv;
  for (std::size_t fi = 0; fi < fg.factors.size(); ++fi)
    for (int a : fg.factors[fi].atoms) {
      vf[{a, static_cast<int>(fi)}] = {0.0, 1.0};
      fv[{static_cast<int>(fi), a}] = {0.0, 1.0};
    }

  // Message cache: factor-to-variable solves are pure functions of the
  // inbound messages, so unchanged inboxes skip the solver.
  std::map<std::pair<int, int>, std::pair<std::vector<double>, Interval>> solve_cache;

  int round = 0;
  for (round = 1; round <= config.max_rounds; ++round) {
    double delta = 0.0;

    // variable -> factor, from the previous round's factor messages
    std::map<std::pair<int, int>, Interval> vf_new = vf;
    for (const auto& [key, old] : vf) {
      Interval raw = variable_to_factor(fg, key.first, key.second, fv, gp);
      // bounds only ever tighten; intersect with the previous message
      Interval next{std::max(old.lo, raw.lo), std::min(old.hi, raw.hi)};
      if (next.lo > next.hi + kCross)
        throw Error::inconsistent("inconsistent bounds for atom '" +
                                  gp.atoms[key.first].text + "'");
      delta = std::max({delta, std::fabs(next.lo - old.lo), std::fabs(next.hi - old.hi)});
      vf_new[key] = next;
    }
    vf.swap(vf_new);

    // factor -> variable, from the new variable messages
    std::map<std::pair<int, int>, Interval> fv_new = fv;
    for (const auto& [key, old] : fv) {
      int fi = key.first, a = key.second;
      std::vector<double> inbox;
      for (int o : fg.factors[fi].atoms) {
        if (o == a) continue;
        const Interval& m = vf.at({o, fi});
        inbox.push_back(m.lo);
        inbox.push_back(m.hi);
      }
      Interval raw;
      auto cached = solve_cache.find(key);
      if (cached != solve_cache.end() && cached->second.first == inbox) {
        raw = cached->second.second;
      } else {
        raw = factor_to_variable(fg, fi, a, vf, gp, config.solver);
        solve_cache[key] = {inbox, raw};
      }
      Interval next{std::max(old.lo, raw.lo), std::min(old.hi, raw.hi)};
      if (next.lo > next.hi + kCross)
        throw Error::inconsistent("inconsistent message from factor " + std::to_string(fi) +
                                  " to atom '" + gp.atoms[a].text + "'");
      delta = std::max({delta, std::fabs(next.lo - old.lo), std::fabs(next.hi - old.hi)});
      fv_new[key] = next;
    }
    fv.swap(fv_new);

    res.history_var_to_factor.push_back(vf);
    res.history_factor_to_var.push_back(fv);
    if (config.trace) {
      std::ostringstream os;
      os << "round " << round << ": max message change " << delta;
      res.trace.push_back(os.str());
      for (const auto& [key, m] : fv) {
        std::ostringstream ms;
        ms << "  f" << key.first << " -> " << gp.atoms[key.second].text << " = ["
           << m.lo << ", " << m.hi << "]";
        res.trace.push_back(ms.str());
      }
    }
    if (delta < config.msg_tol) break;
  }

  res.rounds = std::min(round, config.max_rounds);
  res.var_to_factor = vf;
  res.factor_to_var = fv;
  res.per_atom.assign(n, Interval{0.0, 1.0});
  for (int a = 0; a < n; ++a) {
    Interval out{0.0, 1.0};
    for (int fi : fg.var_factors[a]) {
      const Interval& m = fv.at({fi, a});
      out.lo = std::max(out.lo, m.lo);
      out.hi = std::min(out.hi, m.hi);
    }
    if (out.lo > out.hi + kCross)
      throw Error::inconsistent("inconsistent final bounds for atom '" + gp.atoms[a].text + "'");
    res.per_atom[a] = out;
  }
  return res;
}

}  // namespace lcn::bp
