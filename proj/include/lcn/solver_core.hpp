#pragma once

// Shared constrained-minimization engine: augmented Lagrangian outer loop with
// spectral projected gradient (Barzilai-Borwein + Armijo) inner iterations and
// a least-squares feasibility polish. Used by the world-simplex NLP solver and
// by the factored (marginal-box) engine.
//
// Problem interface:
//   int dim() const;
//   double objective(const std::vector<double>& x, std::vector<double>* grad) const;
//       // grad, when non-null, is overwritten
//   int num_constraints() const;
//   bool is_equality(int j) const;
//   void constraints_eval(const std::vector<double>& x, std::vector<double>& values) const;
//       // residuals: equality h(x) (feasible == 0), inequality g(x) (feasible <= 0)
//   void constraints_grad_axpy(const std::vector<double>& x, const std::vector<double>& w,
//                              std::vector<double>& grad) const;
//       // grad += sum_j w_j * grad c_j(x); w_j == 0 rows may be skipped
//   void project(std::vector<double>& x) const;
//   std::vector<double> start_point(int index, Rng& rng) const;

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "lcn/rng.hpp"

namespace lcn::detail {

struct CoreConfig {
  int starts = 16;
  double tol_feas = 1e-7;
  double tol_step = 1e-9;
  int max_outer = 200;
  int max_inner = 400;
  std::uint64_t seed = 0;
  double mu_init = 10.0;
  double mu_max = 1e8;
};

enum class CoreStatus { Converged, MaxIterations, Infeasible };

struct CoreResult {
  double value = std::numeric_limits<double>::infinity();  // minimized objective
  std::vector<double> point;
  double residual = std::numeric_limits<double>::infinity();
  CoreStatus status = CoreStatus::Infeasible;
  int starts_used = 0;
};

template <class Problem>
class CoreSolver {
 public:
  CoreSolver(const Problem& p, const CoreConfig& cfg) : p_(p), cfg_(cfg) {}

  CoreResult solve() {
    CoreResult best;
    const int starts = cfg_.starts < 1 ? 1 : cfg_.starts;
    double best_infeas_resid = std::numeric_limits<double>::infinity();
    std::vector<double> best_infeas_point;
    double best_infeas_value = std::numeric_limits<double>::infinity();
    for (int s = 0; s < starts; ++s) {
      Rng rng(Rng::derive(cfg_.seed, static_cast<std::uint64_t>(s) + 101));
      std::vector<double> x = p_.start_point(s, rng);
      p_.project(x);
      run_single(x);
      polish(x);
      double resid = max_violation(x);
      double value = p_.objective(x, nullptr);
      // Anneal: restart from the converged point with soft penalties. The
      // outer loop freezes progress along curved constraint manifolds once
      // the penalty is stiff; a fresh soft phase resumes the descent.
      for (int round = 0; round < 4; ++round) {
        std::vector<double> y = x;
        run_single(y);
        polish(y);
        double r2 = max_violation(y);
        double v2 = p_.objective(y, nullptr);
        bool better = (r2 <= cfg_.tol_feas && resid > cfg_.tol_feas) ||
                      (r2 <= cfg_.tol_feas && resid <= cfg_.tol_feas &&
                       v2 < value - 1e-10) ||
                      (r2 < resid && resid > cfg_.tol_feas);
        if (!better) break;
        x.swap(y);
        resid = r2;
        value = v2;
      }
      if (resid <= cfg_.tol_feas) {
        if (best.status != CoreStatus::Converged || value < best.value) {
          best.status = CoreStatus::Converged;
          best.value = value;
          best.point = x;
          best.residual = resid;
        }
      } else if (resid < best_infeas_resid) {
        best_infeas_resid = resid;
        best_infeas_point = x;
        best_infeas_value = value;
      }
    }
    best.starts_used = starts;
    if (best.status != CoreStatus::Converged) {
      best.value = best_infeas_value;
      best.point = best_infeas_point;
      best.residual = best_infeas_resid;
      best.status = best_infeas_resid > 1e-4 ? CoreStatus::Infeasible : CoreStatus::MaxIterations;
    }
    return best;
  }

  double max_violation(const std::vector<double>& x) const {
    const int m = p_.num_constraints();
    if (m == 0) return 0.0;
    std::vector<double> vals(m);
    p_.constraints_eval(x, vals);
    double v = 0.0;
    for (int j = 0; j < m; ++j) {
      double r = p_.is_equality(j) ? std::fabs(vals[j]) : std::max(0.0, vals[j]);
      if (r > v) v = r;
    }
    return v;
  }

 private:
  const Problem& p_;
  CoreConfig cfg_;

  struct AlState {
    std::vector<double> mult;  // lambda (>=0) for inequalities, kappa for equalities
    double mu = 10.0;
  };

  double al_value(const std::vector<double>& x, const AlState& st,
                  std::vector<double>* grad) const {
    const int m = p_.num_constraints();
    double val = p_.objective(x, grad);
    if (m == 0) return val;
    std::vector<double> vals(m);
    p_.constraints_eval(x, vals);
    std::vector<double> w(m, 0.0);
    for (int j = 0; j < m; ++j) {
      if (p_.is_equality(j)) {
        val += st.mult[j] * vals[j] + 0.5 * st.mu * vals[j] * vals[j];
        w[j] = st.mult[j] + st.mu * vals[j];
      } else {
        double t = st.mult[j] + st.mu * vals[j];
        if (t > 0.0) {
          val += (t * t - st.mult[j] * st.mult[j]) / (2.0 * st.mu);
          w[j] = t;
        } else {
          val -= st.mult[j] * st.mult[j] / (2.0 * st.mu);
        }
      }
    }
    if (grad) p_.constraints_grad_axpy(x, w, *grad);
    return val;
  }

  // Non-monotone spectral projected gradient on the augmented Lagrangian
  // (Barzilai-Borwein step, Armijo against the recent-maximum value).
  void spg(std::vector<double>& x, const AlState& st, int max_iter, double tol) const {
    const int n = p_.dim();
    constexpr int kMemory = 8;
    std::vector<double> grad(n), x_new(n), grad_new(n), d(n);
    double f = al_value(x, st, &grad);
    double recent[kMemory];
    for (double& r : recent) r = f;
    int slot = 0;
    double alpha = 1.0;
    int flat = 0;
    for (int it = 0; it < max_iter; ++it) {
      for (int i = 0; i < n; ++i) x_new[i] = x[i] - alpha * grad[i];
      p_.project(x_new);
      double dinf = 0.0, gtd = 0.0;
      for (int i = 0; i < n; ++i) {
        d[i] = x_new[i] - x[i];
        dinf = std::max(dinf, std::fabs(d[i]));
        gtd += grad[i] * d[i];
      }
      if (dinf <= tol) break;
      double fmax = recent[0];
      for (double r : recent) fmax = std::max(fmax, r);
      double t = 1.0;
      double f_new;
      for (;;) {
        for (int i = 0; i < n; ++i) x_new[i] = x[i] + t * d[i];
        f_new = al_value(x_new, st, nullptr);
        if (f_new <= fmax + 1e-4 * t * gtd || t < 1e-13) break;
        t *= 0.5;
      }
      if (f_new > fmax && t < 1e-13) break;  // no descent available
      al_value(x_new, st, &grad_new);
      double sy = 0.0, ss = 0.0;
      for (int i = 0; i < n; ++i) {
        double si = x_new[i] - x[i];
        ss += si * si;
        sy += si * (grad_new[i] - grad[i]);
      }
      x.swap(x_new);
      grad.swap(grad_new);
      double fprev = f;
      f = f_new;
      recent[slot] = f;
      slot = (slot + 1) % kMemory;
      alpha = (sy > 1e-14 * ss) ? std::min(1e10, std::max(1e-10, ss / sy)) : alpha * 2.0;
      if (std::fabs(fprev - f) <= 1e-15 * (1.0 + std::fabs(f))) {
        if (++flat >= 5) break;
      } else {
        flat = 0;
      }
    }
  }

  void run_single(std::vector<double>& x) const {
    const int m = p_.num_constraints();
    AlState st;
    st.mult.assign(m, 0.0);
    st.mu = cfg_.mu_init;
    if (m == 0) {
      spg(x, st, cfg_.max_inner * 4, cfg_.tol_step);
      return;
    }
    std::vector<double> vals(m), x_prev;
    double prev_v = std::numeric_limits<double>::infinity();
    int stalled = 0;
    // Stiff-valley progress needs inner budgets that grow with the dimension.
    const int inner_budget = std::max(cfg_.max_inner, 40 * p_.dim());
    for (int outer = 0; outer < cfg_.max_outer; ++outer) {
      double inner_tol = std::max(cfg_.tol_step, 1e-4 * std::pow(0.25, outer));
      spg(x, st, inner_budget, inner_tol);
      p_.constraints_eval(x, vals);
      double v = 0.0;
      for (int j = 0; j < m; ++j)
        v = std::max(v, p_.is_equality(j) ? std::fabs(vals[j]) : std::max(0.0, vals[j]));

      if (v <= std::max(cfg_.tol_feas, 0.25 * prev_v)) {
        for (int j = 0; j < m; ++j) {
          if (p_.is_equality(j))
            st.mult[j] += st.mu * vals[j];
          else
            st.mult[j] = std::max(0.0, st.mult[j] + st.mu * vals[j]);
        }
        prev_v = std::min(prev_v, v);
        stalled = 0;
      } else {
        st.mu = std::min(st.mu * 10.0, cfg_.mu_max);
        for (int j = 0; j < m; ++j) {
          if (p_.is_equality(j))
            st.mult[j] += st.mu * vals[j];
          else
            st.mult[j] = std::max(0.0, st.mult[j] + st.mu * vals[j]);
        }
        if (st.mu >= cfg_.mu_max) ++stalled;
      }

      if (v <= cfg_.tol_feas) {
        double step = std::numeric_limits<double>::infinity();
        if (!x_prev.empty()) {
          step = 0.0;
          for (std::size_t i = 0; i < x.size(); ++i)
            step = std::max(step, std::fabs(x[i] - x_prev[i]));
        }
        if (step <= cfg_.tol_step * 1e3) break;
      }
      if (stalled >= 3) break;
      x_prev = x;
    }
  }

  // SPG on the squared residual; drives near-feasible AL output the rest of
  // the way so reported points satisfy the certificate tolerance.
  void polish(std::vector<double>& x) const {
    const int m = p_.num_constraints();
    if (m == 0) return;
    const int n = p_.dim();
    std::vector<double> vals(m), w(m), grad(n), x_new(n), grad_new(n), d(n);

    auto phi = [&](const std::vector<double>& pt, std::vector<double>* g) {
      p_.constraints_eval(pt, vals);
      double val = 0.0;
      for (int j = 0; j < m; ++j) {
        double r = p_.is_equality(j) ? vals[j] : std::max(0.0, vals[j]);
        val += 0.5 * r * r;
        w[j] = r;
      }
      if (g) {
        g->assign(n, 0.0);
        p_.constraints_grad_axpy(pt, w, *g);
      }
      return val;
    };

    const double target = 0.5 * (cfg_.tol_feas * 1e-2) * (cfg_.tol_feas * 1e-2);
    double f = phi(x, &grad);
    if (f <= target) return;
    double alpha = 1.0;
    for (int it = 0; it < 400 && f > target; ++it) {
      for (int i = 0; i < n; ++i) x_new[i] = x[i] - alpha * grad[i];
      p_.project(x_new);
      double gtd = 0.0, dinf = 0.0;
      for (int i = 0; i < n; ++i) {
        d[i] = x_new[i] - x[i];
        gtd += grad[i] * d[i];
        dinf = std::max(dinf, std::fabs(d[i]));
      }
      if (dinf <= 1e-16) break;
      double t = 1.0, f_new;
      for (;;) {
        for (int i = 0; i < n; ++i) x_new[i] = x[i] + t * d[i];
        f_new = phi(x_new, nullptr);
        if (f_new <= f + 1e-4 * t * gtd || t < 1e-13) break;
        t *= 0.5;
      }
      if (f_new >= f) break;
      phi(x_new, &grad_new);
      double sy = 0.0, ss = 0.0;
      for (int i = 0; i < n; ++i) {
        double si = x_new[i] - x[i];
        ss += si * si;
        sy += si * (grad_new[i] - grad[i]);
      }
      x.swap(x_new);
      grad.swap(grad_new);
      f = f_new;
      alpha = (sy > 1e-14 * ss) ? std::min(1e10, std::max(1e-10, ss / sy)) : alpha * 2.0;
    }
  }
};

template <class Problem>
CoreResult solve_core(const Problem& p, const CoreConfig& cfg) {
  return CoreSolver<Problem>(p, cfg).solve();
}

}  // namespace lcn::detail
