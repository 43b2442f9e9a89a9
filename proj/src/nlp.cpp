#include "lcn/nlp.hpp"

#include <algorithm>
#include <cmath>

#include "lcn/solver_core.hpp"

namespace lcn::nlp {

void QuadraticConstraint::for_each_triplet(
    const std::function<void(int, int, double)>& fn) const {
  for (const BilinearTerm& t : products)
    for (int i : t.a)
      for (int j : t.b) fn(i, j, t.coeff);
}

void project_to_simplex(std::vector<double>& v) {
  const int n = static_cast<int>(v.size());
  std::vector<double> u(v);
  std::sort(u.begin(), u.end(), std::greater<double>());
  double cum = 0.0, theta = 0.0;
  int support = 0;
  for (int i = 0; i < n; ++i) {
    cum += u[i];
    double t = (cum - 1.0) / (i + 1);
    if (u[i] - t > 0.0) {
      theta = t;
      support = i + 1;
    }
  }
  if (support == 0) theta = (cum - 1.0) / n;
  for (double& x : v) x = std::max(0.0, x - theta);
}

namespace {

double sparse_dot(const std::vector<std::pair<int, double>>& terms,
                  const std::vector<double>& x) {
  double s = 0.0;
  for (const auto& [i, c] : terms) s += c * x[i];
  return s;
}

double index_sum(const std::vector<int>& idx, const std::vector<double>& x) {
  double s = 0.0;
  for (int i : idx) s += x[i];
  return s;
}

double eval_quadratic(const QuadraticConstraint& q, const std::vector<double>& x) {
  double v = q.constant + sparse_dot(q.linear, x);
  for (const BilinearTerm& t : q.products)
    v += t.coeff * index_sum(t.a, x) * index_sum(t.b, x);
  return v;
}

constexpr double kEntropyClamp = 1e-12;

double objective_value(const Objective& obj, const std::vector<double>& x,
                       std::vector<double>* grad, double sign) {
  switch (obj.kind) {
    case Objective::Kind::Linear: {
      double v = sparse_dot(obj.linear, x);
      if (grad) {
        grad->assign(x.size(), 0.0);
        for (const auto& [i, c] : obj.linear) (*grad)[i] += sign * c;
      }
      return sign * v;
    }
    case Objective::Kind::Ratio: {
      double num = sparse_dot(obj.linear, x);
      double den = sparse_dot(obj.denominator, x);
      bool floored = den <= obj.denom_floor;
      double d = floored ? obj.denom_floor : den;
      double v = num / d;
      if (grad) {
        grad->assign(x.size(), 0.0);
        if (floored) {
          for (const auto& [i, c] : obj.linear) (*grad)[i] += sign * c / d;
        } else {
          double inv = 1.0 / d, ratio = num / (d * d);
          for (const auto& [i, c] : obj.linear) (*grad)[i] += sign * c * inv;
          for (const auto& [i, c] : obj.denominator) (*grad)[i] -= sign * c * ratio;
        }
      }
      return sign * v;
    }
    case Objective::Kind::Entropy: {
      // sum p log p with the continuous extension 0 log 0 = 0
      double v = 0.0;
      for (double p : x)
        if (p > 0.0) v += p * std::log(p);
      if (grad) {
        grad->assign(x.size(), 0.0);
        for (std::size_t i = 0; i < x.size(); ++i)
          (*grad)[i] = sign * (1.0 + std::log(std::max(x[i], kEntropyClamp)));
      }
      return sign * v;
    }
  }
  return 0.0;
}

// Adapter binding the NLP description to the shared engine. sign = +1 for
// minimize, -1 for maximize (engine always minimizes).
struct WorldProblem {
  const NLP& nlp;
  double sign;

  int dim() const { return nlp.dimension; }

  double objective(const std::vector<double>& x, std::vector<double>* grad) const {
    return objective_value(nlp.objective, x, grad, sign);
  }

  int num_constraints() const {
    return static_cast<int>(nlp.linear_constraints.size() + nlp.quadratic_constraints.size());
  }

  bool is_equality(int j) const {
    const int nl = static_cast<int>(nlp.linear_constraints.size());
    if (j < nl) return nlp.linear_constraints[j].rel == Relation::Equal;
    return true;
  }

  void constraints_eval(const std::vector<double>& x, std::vector<double>& values) const {
    const int nl = static_cast<int>(nlp.linear_constraints.size());
    for (int j = 0; j < nl; ++j) {
      const LinearConstraint& c = nlp.linear_constraints[j];
      double v = sparse_dot(c.terms, x) - c.rhs;
      values[j] = (c.rel == Relation::GreaterEq) ? -v : v;
    }
    for (std::size_t k = 0; k < nlp.quadratic_constraints.size(); ++k)
      values[nl + k] = eval_quadratic(nlp.quadratic_constraints[k], x);
  }

  void constraints_grad_axpy(const std::vector<double>& x, const std::vector<double>& w,
                             std::vector<double>& grad) const {
    const int nl = static_cast<int>(nlp.linear_constraints.size());
    for (int j = 0; j < nl; ++j) {
      if (w[j] == 0.0) continue;
      const LinearConstraint& c = nlp.linear_constraints[j];
      double s = (c.rel == Relation::GreaterEq) ? -w[j] : w[j];
      for (const auto& [i, coeff] : c.terms) grad[i] += s * coeff;
    }
    for (std::size_t k = 0; k < nlp.quadratic_constraints.size(); ++k) {
      double wq = w[nl + k];
      if (wq == 0.0) continue;
      const QuadraticConstraint& q = nlp.quadratic_constraints[k];
      for (const auto& [i, coeff] : q.linear) grad[i] += wq * coeff;
      for (const BilinearTerm& t : q.products) {
        double sa = index_sum(t.a, x), sb = index_sum(t.b, x);
        double ca = wq * t.coeff * sb, cb = wq * t.coeff * sa;
        for (int i : t.a) grad[i] += ca;
        for (int i : t.b) grad[i] += cb;
      }
    }
  }

  void project(std::vector<double>& x) const {
    if (nlp.simplex) {
      project_to_simplex(x);
    } else {
      for (double& v : x) v = std::min(1.0, std::max(0.0, v));
    }
  }

  std::vector<double> start_point(int index, Rng& rng) const {
    const int n = nlp.dimension;
    if (index == 0) return std::vector<double>(n, nlp.simplex ? 1.0 / n : 0.5);
    const int k = nlp.structure_atoms;
    if (nlp.simplex && k > 0 && n == (1 << k) && index % 2 == 1) {
      // random product distribution over the k atoms
      std::vector<double> marg(k);
      for (double& m : marg) m = rng.uniform(0.02, 0.98);
      std::vector<double> x(n);
      for (int w = 0; w < n; ++w) {
        double p = 1.0;
        for (int i = 0; i < k; ++i) p *= ((w >> i) & 1) ? marg[i] : 1.0 - marg[i];
        x[w] = p;
      }
      return x;
    }
    if (nlp.simplex && n <= 8 && index <= n) {
      std::vector<double> x(n, 0.0);
      x[index - 1] = 1.0;
      return x;
    }
    if (nlp.simplex) return rng.simplex_point(n);
    std::vector<double> x(n);
    for (double& v : x) v = rng.next_double();
    return x;
  }
};

}  // namespace

double eval_objective(const Objective& obj, const std::vector<double>& x) {
  return objective_value(obj, x, nullptr, 1.0);
}

SolveReport solve(const NLP& nlp, Direction direction, const SolverConfig& config) {
  if (nlp.dimension <= 0) throw Error::user("solver: empty decision vector");
  if (nlp.dimension > (1 << 20))
    throw Error::capacity("solver: dimension " + std::to_string(nlp.dimension) +
                          " exceeds the supported maximum");

  WorldProblem prob{nlp, direction == Direction::Minimize ? 1.0 : -1.0};
  detail::CoreConfig cc;
  cc.starts = config.starts;
  cc.tol_feas = config.tol_feas;
  cc.tol_step = config.tol_step;
  cc.max_outer = config.max_outer;
  cc.max_inner = config.max_inner;
  cc.seed = config.seed;
  detail::CoreResult r = detail::solve_core(prob, cc);

  SolveReport report;
  report.point = std::move(r.point);
  report.max_residual = r.residual;
  report.starts_used = r.starts_used;
  switch (r.status) {
    case detail::CoreStatus::Converged: report.status = SolveStatus::Converged; break;
    case detail::CoreStatus::MaxIterations: report.status = SolveStatus::MaxIterations; break;
    case detail::CoreStatus::Infeasible: report.status = SolveStatus::Infeasible; break;
  }
  report.value = report.point.empty() ? 0.0 : eval_objective(nlp.objective, report.point);
  return report;
}

double check_gradients(const NLP& nlp, const std::vector<double>& point) {
  WorldProblem prob{nlp, 1.0};
  const int n = nlp.dimension;
  const int m = prob.num_constraints();
  const double h = 1e-6;
  std::vector<double> x = point;
  double worst = 0.0;

  // objective
  {
    std::vector<double> grad(n);
    prob.objective(x, &grad);
    for (int i = 0; i < n; ++i) {
      double saved = x[i];
      x[i] = saved + h;
      double fp = prob.objective(x, nullptr);
      x[i] = saved - h;
      double fm = prob.objective(x, nullptr);
      x[i] = saved;
      worst = std::max(worst, std::fabs(grad[i] - (fp - fm) / (2 * h)));
    }
  }

  // constraint residuals
  std::vector<double> vals(std::max(m, 1));
  for (int j = 0; j < m; ++j) {
    std::vector<double> grad(n, 0.0), w(m, 0.0);
    w[j] = 1.0;
    prob.constraints_grad_axpy(x, w, grad);
    for (int i = 0; i < n; ++i) {
      double saved = x[i];
      x[i] = saved + h;
      prob.constraints_eval(x, vals);
      double fp = vals[j];
      x[i] = saved - h;
      prob.constraints_eval(x, vals);
      double fm = vals[j];
      x[i] = saved;
      worst = std::max(worst, std::fabs(grad[i] - (fp - fm) / (2 * h)));
    }
  }
  return worst;
}

}  // namespace lcn::nlp
