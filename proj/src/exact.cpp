#include "lcn/exact.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "lcn/solver_core.hpp"

namespace lcn::exact {

namespace {

constexpr double kDenomFloor = 1e-9;

std::vector<World> worlds_of(const Formula& f, int n) { return satisfying_worlds(f, n); }

// Worlds matching a partial assignment: bits in `mask` take the values in
// `bits`, everything else free.
std::vector<int> config_worlds(World mask, World bits, int n) {
  std::vector<int> out;
  const World limit = World(1) << n;
  for (World w = 0; w < limit; ++w)
    if ((w & mask) == bits) out.push_back(static_cast<int>(w));
  return out;
}

void check_cap(int n) {
  if (n > kMaxEnumAtoms)
    throw Error::capacity("exact inference over " + std::to_string(n) +
                          " atoms exceeds the cap of " + std::to_string(kMaxEnumAtoms));
}

}  // namespace

std::vector<std::pair<int, double>> world_indicator(const std::vector<World>& worlds) {
  std::vector<std::pair<int, double>> terms;
  terms.reserve(worlds.size());
  for (World w : worlds) terms.emplace_back(static_cast<int>(w), 1.0);
  return terms;
}

std::vector<nlp::LinearConstraint> build_linear_constraints(const GroundProgram& gp) {
  const int n = static_cast<int>(gp.atoms.size());
  check_cap(n);
  std::vector<nlp::LinearConstraint> rows;
  for (const GroundSentence& s : gp.sentences) {
    if (!s.conditional) {
      auto qw = world_indicator(worlds_of(s.q, n));
      nlp::LinearConstraint lo;
      lo.terms = qw;
      lo.rel = nlp::Relation::GreaterEq;
      lo.rhs = s.lower;
      lo.vacuous = s.lower <= 0.0;
      lo.tag = s.label + ":lower";
      rows.push_back(std::move(lo));

      nlp::LinearConstraint hi;
      hi.terms = qw;
      hi.rel = nlp::Relation::LessEq;
      hi.rhs = s.upper;
      hi.vacuous = s.upper >= 1.0;
      hi.tag = s.label + ":upper";
      rows.push_back(std::move(hi));
      continue;
    }

    // l * P(r) <= P(q and r) <= u * P(r), linear and valid also when P(r)=0.
    Formula qr = Formula::make_binary(Connective::And, s.q, *s.r);
    auto qrw = worlds_of(qr, n);
    auto rw = worlds_of(*s.r, n);

    nlp::LinearConstraint lo;
    for (World w : qrw) lo.terms.emplace_back(static_cast<int>(w), 1.0);
    for (World w : rw) lo.terms.emplace_back(static_cast<int>(w), -s.lower);
    lo.rel = nlp::Relation::GreaterEq;
    lo.rhs = 0.0;
    lo.vacuous = s.lower <= 0.0;
    lo.tag = s.label + ":lower";
    rows.push_back(std::move(lo));

    nlp::LinearConstraint hi;
    for (World w : qrw) hi.terms.emplace_back(static_cast<int>(w), 1.0);
    for (World w : rw) hi.terms.emplace_back(static_cast<int>(w), -s.upper);
    hi.rel = nlp::Relation::LessEq;
    hi.rhs = 0.0;
    hi.vacuous = s.upper >= 1.0;
    hi.tag = s.label + ":upper";
    rows.push_back(std::move(hi));
  }
  return rows;
}

namespace {

std::string quad_key(const nlp::QuadraticConstraint& q) {
  std::ostringstream os;
  std::vector<std::string> parts;
  for (const nlp::BilinearTerm& t : q.products) {
    std::ostringstream ts;
    const auto& first = t.a <= t.b ? t.a : t.b;
    const auto& second = t.a <= t.b ? t.b : t.a;
    ts << t.coeff << '[';
    for (int i : first) ts << i << ',';
    ts << "][";
    for (int i : second) ts << i << ',';
    ts << ']';
    parts.push_back(ts.str());
  }
  std::sort(parts.begin(), parts.end());
  for (const auto& p : parts) os << p << '|';
  os << "L:";
  for (const auto& [i, c] : q.linear) os << i << ':' << c << ',';
  return os.str();
}

}  // namespace

std::vector<nlp::QuadraticConstraint> build_markov_constraints(
    const std::vector<IndependenceStatement>& statements, int atom_count) {
  check_cap(atom_count);
  std::vector<nlp::QuadraticConstraint> out;
  std::set<std::string> seen;

  for (const IndependenceStatement& st : statements) {
    const auto& pi = st.given;
    const auto& nd = st.independent_of;
    World pi_mask = 0, nd_mask = 0;
    for (int a : pi) pi_mask |= World(1) << a;
    for (int a : nd) nd_mask |= World(1) << a;
    const World x_bit = World(1) << st.x;

    const World pi_count = World(1) << pi.size();
    const World nd_count = World(1) << nd.size();
    for (World pc = 0; pc < pi_count; ++pc) {
      World pi_bits = 0;
      for (std::size_t i = 0; i < pi.size(); ++i)
        if ((pc >> i) & 1u) pi_bits |= World(1) << pi[i];
      for (World nc = 1; nc < nd_count; ++nc) {  // skip the all-false config
        World nd_bits = 0;
        for (std::size_t i = 0; i < nd.size(); ++i)
          if ((nc >> i) & 1u) nd_bits |= World(1) << nd[i];

        // P(x & pi) * P(pi & nu) == P(x & pi & nu) * P(pi)
        nlp::QuadraticConstraint q;
        nlp::BilinearTerm pos;
        pos.a = config_worlds(pi_mask | x_bit, pi_bits | x_bit, atom_count);
        pos.b = config_worlds(pi_mask | nd_mask, pi_bits | nd_bits, atom_count);
        pos.coeff = 1.0;
        if (pi.empty()) {
          // P(x) * P(nu) == P(x & nu): right side is linear since P() == 1.
          auto joint = config_worlds(x_bit | nd_mask, x_bit | nd_bits, atom_count);
          for (int w : joint) q.linear.emplace_back(w, -1.0);
          q.products.push_back(std::move(pos));
        } else {
          nlp::BilinearTerm neg;
          neg.a = config_worlds(pi_mask | nd_mask | x_bit, pi_bits | nd_bits | x_bit, atom_count);
          neg.b = config_worlds(pi_mask, pi_bits, atom_count);
          neg.coeff = -1.0;
          q.products.push_back(std::move(pos));
          q.products.push_back(std::move(neg));
        }
        std::ostringstream tag;
        tag << "markov:x" << st.x << ":pi" << pc << ":nu" << nc;
        q.tag = tag.str();
        std::string key = quad_key(q);
        if (seen.insert(key).second) out.push_back(std::move(q));
      }
    }
  }
  return out;
}

ConstraintProgram compile(const GroundProgram& gp, Mode mode) {
  const int n = static_cast<int>(gp.atoms.size());
  check_cap(n);
  ConstraintProgram cp;
  cp.atom_count = n;
  for (const Atom& a : gp.atoms) cp.atom_names.push_back(a.text);
  cp.nlp.dimension = 1 << n;
  cp.nlp.simplex = true;
  cp.nlp.structure_atoms = n;
  cp.nlp.linear_constraints = build_linear_constraints(gp);
  for (std::size_t i = 0; i < cp.nlp.linear_constraints.size(); ++i) {
    ConstraintProgram::RowInfo info;
    info.sentence_label = cp.nlp.linear_constraints[i].tag;
    info.row = static_cast<int>(i);
    info.vacuous = cp.nlp.linear_constraints[i].vacuous;
    cp.sentence_rows.push_back(std::move(info));
  }
  if (mode == Mode::Markov) {
    DependencyGraph g = build_dependency_graph(gp);
    cp.nlp.quadratic_constraints = build_markov_constraints(markov_statements(g), n);
    for (std::size_t i = 0; i < cp.nlp.quadratic_constraints.size(); ++i) {
      ConstraintProgram::QuadInfo info;
      info.row = static_cast<int>(i);
      cp.markov_rows.push_back(info);
    }
  }
  return cp;
}

namespace {

SideStatus side_status(const nlp::SolveReport& r) {
  return SideStatus{r.status, r.max_residual};
}

void merge_certificates(IntervalResult& res, const nlp::NLP& prog,
                        const nlp::SolverConfig& config) {
  // Any feasible point certifies both directions; cross-evaluate the two
  // returned points and widen toward the truth.
  auto value_at = [&](const std::vector<double>& pt) {
    return nlp::eval_objective(prog.objective, pt);
  };
  if (res.lo.status == nlp::SolveStatus::Converged &&
      res.hi.status == nlp::SolveStatus::Converged) {
    double lv = value_at(res.lo_report.point);
    double hv = value_at(res.hi_report.point);
    res.lower = std::min(lv, hv);
    res.upper = std::max(lv, hv);
  }

  if (config.rejection_samples > 0) {
    Rng rng(Rng::derive(config.seed, 0xEC5A11));
    const int m = prog.dimension;
    for (int s = 0; s < config.rejection_samples; ++s) {
      std::vector<double> pt = rng.simplex_point(m);
      double resid = 0.0;
      for (const auto& c : prog.linear_constraints) {
        double v = -c.rhs;
        for (const auto& [i, co] : c.terms) v += co * pt[i];
        if (c.rel == nlp::Relation::GreaterEq) v = -v;
        double r = (c.rel == nlp::Relation::Equal) ? std::fabs(v) : std::max(0.0, v);
        resid = std::max(resid, r);
      }
      for (const auto& qc : prog.quadratic_constraints) {
        double v = qc.constant;
        for (const auto& [i, co] : qc.linear) v += co * pt[i];
        for (const auto& t : qc.products) {
          double sa = 0, sb = 0;
          for (int i : t.a) sa += pt[i];
          for (int i : t.b) sb += pt[i];
          v += t.coeff * sa * sb;
        }
        resid = std::max(resid, std::fabs(v));
      }
      if (resid <= 1e-7) {
        double v = value_at(pt);
        res.lower = std::min(res.lower, v);
        res.upper = std::max(res.upper, v);
      }
    }
  }
}

}  // namespace

IntervalResult query_interval(const GroundProgram& gp, const Query& query, Mode mode,
                              const nlp::SolverConfig& config) {
  const int n = static_cast<int>(gp.atoms.size());
  ConstraintProgram cp = compile(gp, mode);

  if (query.conditional) {
    // Undefined when the evidence cannot have positive probability.
    nlp::NLP den = cp.nlp;
    den.objective.kind = nlp::Objective::Kind::Linear;
    den.objective.linear = world_indicator(worlds_of(*query.e, n));
    nlp::SolveReport den_max = nlp::solve(den, nlp::Direction::Maximize, config);
    if (den_max.status == nlp::SolveStatus::Infeasible)
      throw Error::infeasible("program has no feasible distribution");
    if (den_max.value <= kDenomFloor)
      throw Error::user("conditional query undefined: evidence probability is zero "
                        "over the whole feasible set");

    Formula qe = Formula::make_binary(Connective::And, query.q, *query.e);
    cp.nlp.objective.kind = nlp::Objective::Kind::Ratio;
    cp.nlp.objective.linear = world_indicator(worlds_of(qe, n));
    cp.nlp.objective.denominator = world_indicator(worlds_of(*query.e, n));
    cp.nlp.objective.denom_floor = kDenomFloor;
  } else {
    cp.nlp.objective.kind = nlp::Objective::Kind::Linear;
    cp.nlp.objective.linear = world_indicator(worlds_of(query.q, n));
  }

  IntervalResult res;
  res.lo_report = nlp::solve(cp.nlp, nlp::Direction::Minimize, config);
  res.hi_report = nlp::solve(cp.nlp, nlp::Direction::Maximize, config);
  res.lo = side_status(res.lo_report);
  res.hi = side_status(res.hi_report);
  if (res.lo.status == nlp::SolveStatus::Infeasible &&
      res.hi.status == nlp::SolveStatus::Infeasible)
    throw Error::infeasible("program has no feasible distribution");
  res.lower = res.lo_report.value;
  res.upper = res.hi_report.value;
  merge_certificates(res, cp.nlp, config);
  return res;
}

double MaxentResult::prob(const Formula& f) const {
  double s = 0.0;
  for (World w : satisfying_worlds(f, atom_count)) s += p[w];
  return s;
}

double MaxentResult::prob(const Formula& f, const Formula& given) const {
  Formula both = Formula::make_binary(Connective::And, f, given);
  double num = prob(both);
  double den = prob(given);
  if (den <= kDenomFloor)
    throw Error::user("conditional probability undefined under the maxent model");
  return num / den;
}

MaxentResult query_maxent(const GroundProgram& gp, const nlp::SolverConfig& config) {
  ConstraintProgram cp = compile(gp, Mode::Markov);
  cp.nlp.objective.kind = nlp::Objective::Kind::Entropy;
  nlp::SolveReport r = nlp::solve(cp.nlp, nlp::Direction::Minimize, config);
  if (r.status == nlp::SolveStatus::Infeasible)
    throw Error::infeasible("program has no feasible distribution");
  MaxentResult out;
  out.p = std::move(r.point);
  out.atom_count = cp.atom_count;
  out.entropy = -r.value;
  return out;
}

// ---- factored fast path -------------------------------------------------------

namespace {

// Multilinear expectation of a ground formula under a product distribution,
// tabulated over the formula's own atoms.
struct MultilinearFn {
  std::vector<int> atoms;                        // global atom indices, sorted
  std::vector<std::uint32_t> sat;                // satisfying assignments
  bool conjunction = false;
  std::vector<std::pair<int, bool>> literals;    // conjunction fast path

  static bool collect_literals(const Formula& f, std::vector<std::pair<int, bool>>& out) {
    switch (f.kind) {
      case Connective::Atom:
        out.emplace_back(f.atom_index, true);
        return true;
      case Connective::Not:
        if (f.children[0].kind != Connective::Atom) return false;
        out.emplace_back(f.children[0].atom_index, false);
        return true;
      case Connective::And:
        for (const Formula& c : f.children)
          if (!collect_literals(c, out)) return false;
        return true;
      default:
        return false;
    }
  }

  static MultilinearFn build(const Formula& f) {
    MultilinearFn fn;
    std::vector<std::pair<int, bool>> lits;
    if (collect_literals(f, lits)) {
      std::set<int> uniq;
      bool distinct = true;
      for (const auto& [a, _] : lits)
        if (!uniq.insert(a).second) distinct = false;
      if (distinct) {
        fn.conjunction = true;
        fn.literals = std::move(lits);
        return fn;
      }
    }
    fn.atoms = atom_indices(f);
    if (fn.atoms.size() > 20)
      throw Error::capacity("factored engine: formula over " +
                            std::to_string(fn.atoms.size()) + " atoms");
    // Remap to local bit positions and enumerate satisfying assignments.
    Formula local = f;
    std::map<int, int> pos;
    for (std::size_t i = 0; i < fn.atoms.size(); ++i) pos[fn.atoms[i]] = static_cast<int>(i);
    remap(local, pos);
    for (World w : satisfying_worlds(local, static_cast<int>(fn.atoms.size())))
      fn.sat.push_back(w);
    return fn;
  }

  static void remap(Formula& f, const std::map<int, int>& pos) {
    if (f.kind == Connective::Atom) {
      f.atom_index = pos.at(f.atom_index);
      return;
    }
    for (Formula& c : f.children) remap(c, pos);
  }

  double eval(const std::vector<double>& m) const {
    if (conjunction) {
      double v = 1.0;
      for (const auto& [a, positive] : literals) v *= positive ? m[a] : 1.0 - m[a];
      return v;
    }
    double total = 0.0;
    const int k = static_cast<int>(atoms.size());
    for (std::uint32_t w : sat) {
      double v = 1.0;
      for (int i = 0; i < k; ++i)
        v *= ((w >> i) & 1u) ? m[atoms[i]] : 1.0 - m[atoms[i]];
      total += v;
    }
    return total;
  }

  void grad_axpy(const std::vector<double>& m, double weight, std::vector<double>& g) const {
    if (conjunction) {
      const int k = static_cast<int>(literals.size());
      std::vector<double> f(k), pre(k + 1), suf(k + 1);
      for (int i = 0; i < k; ++i)
        f[i] = literals[i].second ? m[literals[i].first] : 1.0 - m[literals[i].first];
      pre[0] = 1.0;
      for (int i = 0; i < k; ++i) pre[i + 1] = pre[i] * f[i];
      suf[k] = 1.0;
      for (int i = k - 1; i >= 0; --i) suf[i] = suf[i + 1] * f[i];
      for (int i = 0; i < k; ++i) {
        double d = pre[i] * suf[i + 1];
        g[literals[i].first] += weight * (literals[i].second ? d : -d);
      }
      return;
    }
    const int k = static_cast<int>(atoms.size());
    std::vector<double> f(k), pre(k + 1), suf(k + 1);
    for (std::uint32_t w : sat) {
      for (int i = 0; i < k; ++i)
        f[i] = ((w >> i) & 1u) ? m[atoms[i]] : 1.0 - m[atoms[i]];
      pre[0] = 1.0;
      for (int i = 0; i < k; ++i) pre[i + 1] = pre[i] * f[i];
      suf[k] = 1.0;
      for (int i = k - 1; i >= 0; --i) suf[i] = suf[i + 1] * f[i];
      for (int i = 0; i < k; ++i) {
        double d = pre[i] * suf[i + 1];
        g[atoms[i]] += weight * (((w >> i) & 1u) ? d : -d);
      }
    }
  }
};

// Inequality rows over marginals; each sentence contributes its lower and
// upper side. Conditional sentences use the multiplied-through linear form.
struct FactoredRow {
  MultilinearFn fn;                       // main expectation
  std::optional<MultilinearFn> cond;      // E[r] for conditional rows
  double scale = 1.0;                     // row: sign*(fn - scale*cond - rhs) <= 0
  double rhs = 0.0;
  double sign = 1.0;                      // +1: fn <= ..., -1: fn >= ...
};

struct FactoredProblem {
  int n = 0;
  enum class Obj { Marginal, Ratio, Maxent } obj_kind = Obj::Marginal;
  MultilinearFn obj, obj_den;
  std::vector<FactoredRow> rows;
  double sign = 1.0;  // minimize sign * objective

  int dim() const { return n; }

  double objective(const std::vector<double>& x, std::vector<double>* grad) const {
    if (grad) grad->assign(n, 0.0);
    switch (obj_kind) {
      case Obj::Marginal: {
        double v = obj.eval(x);
        if (grad) obj.grad_axpy(x, sign, *grad);
        return sign * v;
      }
      case Obj::Ratio: {
        double num = obj.eval(x);
        double den = obj_den.eval(x);
        bool floored = den <= kDenomFloor;
        double d = floored ? kDenomFloor : den;
        if (grad) {
          obj.grad_axpy(x, sign / d, *grad);
          if (!floored) obj_den.grad_axpy(x, -sign * num / (d * d), *grad);
        }
        return sign * num / d;
      }
      case Obj::Maxent: {
        // minimize sum m log m + (1-m) log(1-m)  (negative total entropy)
        double v = 0.0;
        for (int i = 0; i < n; ++i) {
          double m = x[i];
          if (m > 0.0) v += m * std::log(m);
          if (m < 1.0) v += (1.0 - m) * std::log(1.0 - m);
          if (grad) {
            double mc = std::min(1.0 - 1e-12, std::max(1e-12, m));
            (*grad)[i] = sign * (std::log(mc) - std::log(1.0 - mc));
          }
        }
        return sign * v;
      }
    }
    return 0.0;
  }

  int num_constraints() const { return static_cast<int>(rows.size()); }
  bool is_equality(int) const { return false; }

  void constraints_eval(const std::vector<double>& x, std::vector<double>& values) const {
    for (std::size_t j = 0; j < rows.size(); ++j) {
      const FactoredRow& r = rows[j];
      double v = r.fn.eval(x);
      if (r.cond) v -= r.scale * r.cond->eval(x);
      values[j] = r.sign * (v - r.rhs);
    }
  }

  void constraints_grad_axpy(const std::vector<double>& x, const std::vector<double>& w,
                             std::vector<double>& grad) const {
    for (std::size_t j = 0; j < rows.size(); ++j) {
      if (w[j] == 0.0) continue;
      const FactoredRow& r = rows[j];
      r.fn.grad_axpy(x, w[j] * r.sign, grad);
      if (r.cond) r.cond->grad_axpy(x, -w[j] * r.sign * r.scale, grad);
    }
  }

  void project(std::vector<double>& x) const {
    for (double& v : x) v = std::min(1.0, std::max(0.0, v));
  }

  std::vector<double> start_point(int index, Rng& rng) const {
    if (index == 0) return std::vector<double>(n, 0.5);
    std::vector<double> x(n);
    for (double& v : x) v = rng.next_double();
    return x;
  }
};

FactoredProblem build_factored(const GroundProgram& gp) {
  FactoredProblem p;
  p.n = static_cast<int>(gp.atoms.size());
  for (const GroundSentence& s : gp.sentences) {
    if (!s.conditional) {
      MultilinearFn fn = MultilinearFn::build(s.q);
      if (s.upper < 1.0) {
        FactoredRow hi;
        hi.fn = fn;
        hi.rhs = s.upper;
        hi.sign = 1.0;
        p.rows.push_back(std::move(hi));
      }
      if (s.lower > 0.0) {
        FactoredRow lo;
        lo.fn = fn;
        lo.rhs = s.lower;
        lo.sign = -1.0;
        p.rows.push_back(std::move(lo));
      }
      continue;
    }
    Formula qr = Formula::make_binary(Connective::And, s.q, *s.r);
    MultilinearFn fn_qr = MultilinearFn::build(qr);
    MultilinearFn fn_r = MultilinearFn::build(*s.r);
    if (s.upper < 1.0) {
      FactoredRow hi;  // E[qr] - u E[r] <= 0
      hi.fn = fn_qr;
      hi.cond = fn_r;
      hi.scale = s.upper;
      hi.sign = 1.0;
      p.rows.push_back(std::move(hi));
    }
    if (s.lower > 0.0) {
      FactoredRow lo;  // l E[r] - E[qr] <= 0
      lo.fn = fn_qr;
      lo.cond = fn_r;
      lo.scale = s.lower;
      lo.sign = -1.0;
      p.rows.push_back(std::move(lo));
    }
  }
  return p;
}

// Closed-form corner bounds when every sentence pins a single literal and the
// query is a literal conjunction: the objective is monotone per coordinate.
std::optional<IntervalResult> factored_corner_bounds(const GroundProgram& gp,
                                                     const Query& query) {
  if (query.conditional) return std::nullopt;
  std::vector<std::pair<int, bool>> lits;
  if (!MultilinearFn::collect_literals(query.q, lits)) return std::nullopt;
  std::set<int> uniq;
  for (const auto& [a, _] : lits)
    if (!uniq.insert(a).second) return std::nullopt;

  const int n = static_cast<int>(gp.atoms.size());
  std::vector<double> lo(n, 0.0), hi(n, 1.0);
  for (const GroundSentence& s : gp.sentences) {
    if (s.conditional) return std::nullopt;
    std::vector<std::pair<int, bool>> sl;
    if (!MultilinearFn::collect_literals(s.q, sl) || sl.size() != 1) return std::nullopt;
    auto [atom, positive] = sl[0];
    double l = positive ? s.lower : 1.0 - s.upper;
    double u = positive ? s.upper : 1.0 - s.lower;
    lo[atom] = std::max(lo[atom], l);
    hi[atom] = std::min(hi[atom], u);
  }
  for (int i = 0; i < n; ++i)
    if (lo[i] > hi[i] + 1e-12)
      throw Error::infeasible("marginal bounds for '" + gp.atoms[i].text + "' are empty");

  IntervalResult res;
  double lo_val = 1.0, hi_val = 1.0;
  for (const auto& [a, positive] : lits) {
    lo_val *= positive ? lo[a] : 1.0 - hi[a];
    hi_val *= positive ? hi[a] : 1.0 - lo[a];
  }
  res.lower = lo_val;
  res.upper = hi_val;
  res.lo = {nlp::SolveStatus::Converged, 0.0};
  res.hi = {nlp::SolveStatus::Converged, 0.0};
  res.lo_report.status = nlp::SolveStatus::Converged;
  res.hi_report.status = nlp::SolveStatus::Converged;
  res.lo_report.value = lo_val;
  res.hi_report.value = hi_val;
  return res;
}

detail::CoreConfig core_config(const nlp::SolverConfig& config) {
  detail::CoreConfig cc;
  cc.starts = config.starts;
  cc.tol_feas = config.tol_feas;
  cc.tol_step = config.tol_step;
  cc.max_outer = config.max_outer;
  cc.max_inner = config.max_inner;
  cc.seed = config.seed;
  return cc;
}

}  // namespace

bool factored_applicable(const GroundProgram& gp) {
  return build_dependency_graph(gp).edges.empty();
}

IntervalResult factored_query_interval(const GroundProgram& gp, const Query& query,
                                       const nlp::SolverConfig& config) {
  if (!factored_applicable(gp))
    throw Error::user("factored engine requires an edge-free dependency graph; "
                      "run the full joint mode instead");

  if (auto corner = factored_corner_bounds(gp, query)) return *corner;

  FactoredProblem p = build_factored(gp);
  if (query.conditional) {
    p.obj_kind = FactoredProblem::Obj::Ratio;
    Formula qe = Formula::make_binary(Connective::And, query.q, *query.e);
    p.obj = MultilinearFn::build(qe);
    p.obj_den = MultilinearFn::build(*query.e);
  } else {
    p.obj_kind = FactoredProblem::Obj::Marginal;
    p.obj = MultilinearFn::build(query.q);
  }

  IntervalResult res;
  auto run = [&](double sign) {
    FactoredProblem q = p;
    q.sign = sign;
    detail::CoreResult r = detail::solve_core(q, core_config(config));
    nlp::SolveReport rep;
    rep.point = std::move(r.point);
    rep.max_residual = r.residual;
    rep.starts_used = r.starts_used;
    rep.status = r.status == detail::CoreStatus::Converged ? nlp::SolveStatus::Converged
                 : r.status == detail::CoreStatus::MaxIterations
                     ? nlp::SolveStatus::MaxIterations
                     : nlp::SolveStatus::Infeasible;
    FactoredProblem plain = p;
    plain.sign = 1.0;
    rep.value = rep.point.empty() ? 0.0 : plain.objective(rep.point, nullptr);
    return rep;
  };
  res.lo_report = run(1.0);
  res.hi_report = run(-1.0);
  res.lo = side_status(res.lo_report);
  res.hi = side_status(res.hi_report);
  if (res.lo.status == nlp::SolveStatus::Infeasible &&
      res.hi.status == nlp::SolveStatus::Infeasible)
    throw Error::infeasible("program has no feasible product distribution");
  res.lower = res.lo_report.value;
  res.upper = res.hi_report.value;
  if (res.lo.status == nlp::SolveStatus::Converged &&
      res.hi.status == nlp::SolveStatus::Converged && res.lower > res.upper)
    std::swap(res.lower, res.upper);
  return res;
}

double FactoredMaxent::prob(const Formula& f) const {
  return MultilinearFn::build(f).eval(marginals);
}

FactoredMaxent factored_query_maxent(const GroundProgram& gp,
                                     const nlp::SolverConfig& config) {
  if (!factored_applicable(gp))
    throw Error::user("factored engine requires an edge-free dependency graph; "
                      "run the full joint mode instead");
  FactoredProblem p = build_factored(gp);
  p.obj_kind = FactoredProblem::Obj::Maxent;
  p.sign = 1.0;
  detail::CoreResult r = detail::solve_core(p, core_config(config));
  if (r.status == detail::CoreStatus::Infeasible)
    throw Error::infeasible("program has no feasible product distribution");
  FactoredMaxent out;
  out.marginals = std::move(r.point);
  return out;
}

// ---- credal-network vertex oracle ------------------------------------------------

LCNProgram CredalNetwork::to_lcn() const {
  LCNProgram p;
  for (int i = 0; i < n; ++i) {
    const std::string& name = names[i];
    if (parents[i].empty()) {
      Sentence s;
      s.label = "cpt_" + name;
      s.q = Formula::make_atom(name);
      s.lower = cpt[i][0][0];
      s.upper = cpt[i][0][1];
      p.sentences.push_back(std::move(s));
      continue;
    }
    const auto& pa = parents[i];
    for (std::size_t cfg = 0; cfg < cpt[i].size(); ++cfg) {
      Sentence s;
      s.label = "cpt_" + name + "_" + std::to_string(cfg);
      s.q = Formula::make_atom(name);
      std::vector<Formula> lits;
      for (std::size_t k = 0; k < pa.size(); ++k) {
        Formula a = Formula::make_atom(names[pa[k]]);
        if ((cfg >> k) & 1u)
          lits.push_back(std::move(a));
        else
          lits.push_back(Formula::make_not(std::move(a)));
      }
      s.r = lits.size() == 1 ? std::move(lits[0])
                             : Formula::make_nary(Connective::And, std::move(lits));
      s.conditional = true;
      s.lower = cpt[i][cfg][0];
      s.upper = cpt[i][cfg][1];
      p.sentences.push_back(std::move(s));
    }
  }
  return p;
}

namespace {

// literal conjunction -> (atom, value) pairs; empty optional when not of that shape
std::optional<std::vector<std::pair<int, bool>>> literal_conjunction(const Formula& f) {
  std::vector<std::pair<int, bool>> lits;
  if (!MultilinearFn::collect_literals(f, lits)) return std::nullopt;
  std::set<int> uniq;
  for (const auto& [a, _] : lits)
    if (!uniq.insert(a).second) return std::nullopt;
  return lits;
}

}  // namespace

CredalNetwork detect_credal_network(const GroundProgram& gp) {
  const int n = static_cast<int>(gp.atoms.size());
  if (n > 12)
    throw Error::capacity("credal vertex oracle supports at most 12 atoms");

  struct NodeSpec {
    bool has_prior = false;
    std::array<double, 2> prior{0, 1};
    std::vector<int> parent_set;
    std::map<std::uint32_t, std::array<double, 2>> configs;
  };
  std::vector<NodeSpec> spec(n);

  for (const GroundSentence& s : gp.sentences) {
    if (!s.q.is_atom())
      throw Error::user("not a credal network: sentence '" + s.label +
                        "' has a non-atomic conclusion");
    int x = s.q.atom_index;
    if (!s.conditional) {
      if (spec[x].has_prior || !spec[x].configs.empty())
        throw Error::user("not a credal network: repeated assessment for '" +
                          gp.atoms[x].text + "'");
      spec[x].has_prior = true;
      spec[x].prior = {s.lower, s.upper};
      continue;
    }
    auto lits = literal_conjunction(*s.r);
    if (!lits)
      throw Error::user("not a credal network: condition of '" + s.label +
                        "' is not a literal conjunction");
    std::vector<int> pa;
    std::uint32_t cfg_bits = 0;
    std::vector<std::pair<int, bool>> sorted = *lits;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t k = 0; k < sorted.size(); ++k) {
      pa.push_back(sorted[k].first);
      if (sorted[k].second) cfg_bits |= 1u << k;
    }
    if (spec[x].has_prior)
      throw Error::user("not a credal network: '" + gp.atoms[x].text +
                        "' has both a prior and conditionals");
    if (spec[x].configs.empty())
      spec[x].parent_set = pa;
    else if (spec[x].parent_set != pa)
      throw Error::user("not a credal network: '" + gp.atoms[x].text +
                        "' conditioned on different parent sets");
    if (!spec[x].configs.emplace(cfg_bits, std::array<double, 2>{s.lower, s.upper}).second)
      throw Error::user("not a credal network: duplicate parent configuration for '" +
                        gp.atoms[x].text + "'");
  }

  CredalNetwork net;
  net.n = n;
  net.parents.resize(n);
  net.cpt.resize(n);
  for (const Atom& a : gp.atoms) net.names.push_back(a.text);
  for (int i = 0; i < n; ++i) {
    if (spec[i].has_prior) {
      net.cpt[i] = {spec[i].prior};
      continue;
    }
    const std::size_t k = spec[i].parent_set.size();
    if (spec[i].configs.size() != (std::size_t(1) << k))
      throw Error::user("not a credal network: incomplete CPT for '" + gp.atoms[i].text + "'");
    net.parents[i] = spec[i].parent_set;
    net.cpt[i].resize(std::size_t(1) << k);
    for (const auto& [cfg, bounds] : spec[i].configs) net.cpt[i][cfg] = bounds;
  }

  // acyclicity over the parent relation
  std::vector<int> state(n, 0);
  std::vector<int> order;
  std::function<void(int)> visit = [&](int u) {
    state[u] = 1;
    for (int p : net.parents[u]) {
      if (state[p] == 1)
        throw Error::user("not a credal network: cyclic parent structure");
      if (state[p] == 0) visit(p);
    }
    state[u] = 2;
    order.push_back(u);
  };
  for (int i = 0; i < n; ++i)
    if (state[i] == 0) visit(i);
  return net;
}

IntervalResult credal_vertex_oracle(const CredalNetwork& net, const Query& query) {
  const int n = net.n;
  check_cap(n);
  // Free entries: CPT cells with a genuine interval.
  struct FreeEntry {
    int node;
    std::size_t cfg;
  };
  std::vector<FreeEntry> free_entries;
  for (int i = 0; i < n; ++i)
    for (std::size_t c = 0; c < net.cpt[i].size(); ++c)
      if (net.cpt[i][c][1] - net.cpt[i][c][0] > 1e-15) free_entries.push_back({i, c});
  if (free_entries.size() > 22)
    throw Error::capacity("credal vertex oracle: too many interval entries (" +
                          std::to_string(free_entries.size()) + ")");

  const World limit = World(1) << n;
  // parent config index of each node in each world
  std::vector<std::vector<std::uint32_t>> cfg_of(n, std::vector<std::uint32_t>(limit, 0));
  for (int i = 0; i < n; ++i)
    for (World w = 0; w < limit; ++w) {
      std::uint32_t c = 0;
      for (std::size_t k = 0; k < net.parents[i].size(); ++k)
        if ((w >> net.parents[i][k]) & 1u) c |= 1u << k;
      cfg_of[i][w] = c;
    }

  std::vector<World> qw = satisfying_worlds(query.q, n);
  std::vector<World> ew, qew;
  if (query.conditional) {
    ew = satisfying_worlds(*query.e, n);
    Formula qe = Formula::make_binary(Connective::And, query.q, *query.e);
    qew = satisfying_worlds(qe, n);
  }
  std::vector<char> in_q(limit, 0), in_e(limit, 0), in_qe(limit, 0);
  for (World w : qw) in_q[w] = 1;
  for (World w : ew) in_e[w] = 1;
  for (World w : qew) in_qe[w] = 1;

  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  bool any_defined = false;

  std::vector<std::vector<double>> theta(n);
  for (int i = 0; i < n; ++i) theta[i].resize(net.cpt[i].size());

  const std::uint64_t combos = std::uint64_t(1) << free_entries.size();
  for (std::uint64_t v = 0; v < combos; ++v) {
    for (int i = 0; i < n; ++i)
      for (std::size_t c = 0; c < net.cpt[i].size(); ++c) theta[i][c] = net.cpt[i][c][0];
    for (std::size_t k = 0; k < free_entries.size(); ++k)
      if ((v >> k) & 1u)
        theta[free_entries[k].node][free_entries[k].cfg] =
            net.cpt[free_entries[k].node][free_entries[k].cfg][1];

    double num = 0.0, den = 0.0, marg = 0.0;
    for (World w = 0; w < limit; ++w) {
      double p = 1.0;
      for (int i = 0; i < n; ++i) {
        double t = theta[i][cfg_of[i][w]];
        p *= ((w >> i) & 1u) ? t : 1.0 - t;
      }
      if (query.conditional) {
        if (in_qe[w]) num += p;
        if (in_e[w]) den += p;
      } else if (in_q[w]) {
        marg += p;
      }
    }
    double value;
    if (query.conditional) {
      if (den <= kDenomFloor) continue;
      value = num / den;
    } else {
      value = marg;
    }
    any_defined = true;
    lo = std::min(lo, value);
    hi = std::max(hi, value);
  }
  if (!any_defined)
    throw Error::user("conditional query undefined at every credal vertex");

  IntervalResult res;
  res.lower = lo;
  res.upper = hi;
  res.lo = {nlp::SolveStatus::Converged, 0.0};
  res.hi = {nlp::SolveStatus::Converged, 0.0};
  res.lo_report.status = nlp::SolveStatus::Converged;
  res.hi_report.status = nlp::SolveStatus::Converged;
  res.lo_report.value = lo;
  res.hi_report.value = hi;
  return res;
}

IntervalResult credal_vertex_oracle(const GroundProgram& gp, const Query& query) {
  return credal_vertex_oracle(detect_credal_network(gp), query);
}

}  // namespace lcn::exact
