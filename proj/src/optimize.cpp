#include "qoc/optimize.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>

namespace qoc {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

// Best-so-far bookkeeping shared by all drivers.
class Tracer {
 public:
  Tracer(RunTrace& trace, OptimizationObjective& obj)
      : trace_(trace), obj_(obj), t0_(Clock::now()) {}

  void observe(std::span<const double> x, const CostBreakdown& cb) {
    if (cb.total < best_.total || trace_.records.empty()) {
      best_ = cb;
      best_x_.assign(x.begin(), x.end());
    }
    trace_.records.push_back({obj_.evals().count(), best_.total, 1.0 - best_.fidelity,
                              best_.fidelity, ms_since(t0_)});
  }

  void finish(const std::string& status) {
    trace_.status = status;
    trace_.final_x = best_x_;
    trace_.final_cost = best_.total;
    trace_.final_fidelity = best_.fidelity;
    trace_.final_infidelity = 1.0 - best_.fidelity;
    trace_.final_control = obj_.control_of(best_x_);
    trace_.wall_ms = ms_since(t0_);
  }

  const CostBreakdown& best() const { return best_; }
  const std::vector<double>& best_x() const { return best_x_; }

 private:
  RunTrace& trace_;
  OptimizationObjective& obj_;
  CostBreakdown best_{0.0, 0.0, std::numeric_limits<double>::infinity(), 0.0, 0.0};
  std::vector<double> best_x_;
  Clock::time_point t0_;
};

struct LineSearchResult {
  bool ok = false;
  double alpha = 0.0;
  CostBreakdown cb;
  bool have_gradient = false;   // grad below holds the accepted point's gradient
  std::vector<double> grad;
};

std::vector<double> axpy(std::span<const double> x, double a, std::span<const double> d) {
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] + a * d[i];
  return out;
}

// Armijo backtracking on cost-only trials.
LineSearchResult armijo_search(OptimizationObjective& obj, Tracer& tracer,
                               std::span<const double> x, std::span<const double> d, double f0,
                               double slope, double alpha0, const LineSearchSpec& ls,
                               long max_evals) {
  LineSearchResult res;
  double alpha = alpha0;
  for (int t = 0; t < ls.max_trials && obj.evals().count() < max_evals; ++t) {
    const std::vector<double> xt = axpy(x, alpha, d);
    const CostBreakdown cb = obj.evaluate(xt);
    tracer.observe(xt, cb);
    if (cb.total <= f0 + ls.c1 * alpha * slope) {
      res.ok = true;
      res.alpha = alpha;
      res.cb = cb;
      return res;
    }
    alpha *= 0.5;
  }
  return res;
}

// Strong Wolfe line search (bracket + zoom). Derivatives are evaluated only
// at points that already passed the sufficient-decrease test, reusing the
// trial's forward solve for the adjoint.
LineSearchResult wolfe_search(OptimizationObjective& obj, Tracer& tracer,
                              std::span<const double> x, std::span<const double> d, double f0,
                              double slope0, double alpha0, const LineSearchSpec& ls,
                              long max_evals) {
  LineSearchResult res;
  std::vector<double> grad(obj.dim());

  auto phi = [&](double a, CostBreakdown& cb) {
    const std::vector<double> xt = axpy(x, a, d);
    cb = obj.evaluate(xt);
    tracer.observe(xt, cb);
    return cb.total;
  };
  auto dphi = [&]() {  // derivative at the point of the last evaluate
    obj.gradient_of_last(grad);
    return obj.inner(grad, d);
  };

  int trials = 0;
  auto budget_left = [&]() {
    return trials < ls.max_trials && obj.evals().count() < max_evals;
  };

  double alo = 0.0, flo = f0, dlo = slope0;
  double ahi = 0.0, fhi = 0.0;
  bool bracketed = false;

  double aprev = 0.0, fprev = f0;
  double a = alpha0;
  CostBreakdown cb;
  while (budget_left()) {
    ++trials;
    const double fa = phi(a, cb);
    if (fa > f0 + ls.c1 * a * slope0 || (trials > 1 && fa >= fprev)) {
      alo = aprev;
      flo = fprev;
      dlo = std::numeric_limits<double>::quiet_NaN();
      ahi = a;
      fhi = fa;
      bracketed = true;
      break;
    }
    const double da = dphi();
    if (std::abs(da) <= -ls.c2 * slope0) {
      res.ok = true;
      res.alpha = a;
      res.cb = cb;
      res.have_gradient = true;
      res.grad = grad;
      return res;
    }
    if (da >= 0.0) {
      alo = a;
      flo = fa;
      dlo = da;
      ahi = aprev;
      fhi = fprev;
      bracketed = true;
      break;
    }
    aprev = a;
    fprev = fa;
    a *= 2.0;
  }

  if (!bracketed) {
    // Budget ran out while still descending; keep the last acceptable point.
    if (fprev < f0 && aprev > 0.0) {
      const std::vector<double> xt = axpy(x, aprev, d);
      res.ok = true;
      res.alpha = aprev;
      res.cb = obj.evaluate(xt);
      tracer.observe(xt, res.cb);
    }
    return res;
  }

  while (budget_left()) {
    ++trials;
    const double am = 0.5 * (alo + ahi);
    const double fm = phi(am, cb);
    if (fm > f0 + ls.c1 * am * slope0 || fm >= flo) {
      ahi = am;
      fhi = fm;
    } else {
      const double dm = dphi();
      if (std::abs(dm) <= -ls.c2 * slope0) {
        res.ok = true;
        res.alpha = am;
        res.cb = cb;
        res.have_gradient = true;
        res.grad = grad;
        return res;
      }
      if (dm * (ahi - alo) >= 0.0) {
        ahi = alo;
        fhi = flo;
      }
      alo = am;
      flo = fm;
      dlo = dm;
    }
    if (std::abs(ahi - alo) < 1e-14 * std::max(1.0, std::abs(alo))) break;
  }

  // Fall back to the Armijo point of the bracket if curvature never held.
  if (flo < f0 && alo > 0.0) {
    const std::vector<double> xt = axpy(x, alo, d);
    res.ok = true;
    res.alpha = alo;
    res.cb = obj.evaluate(xt);
    tracer.observe(xt, res.cb);
  }
  (void)fhi;
  (void)dlo;
  return res;
}

LineSearchResult line_search(OptimizationObjective& obj, Tracer& tracer,
                             std::span<const double> x, std::span<const double> d, double f0,
                             double slope, double alpha0, const LineSearchSpec& ls,
                             long max_evals) {
  if (ls.kind == LineSearchSpec::Kind::Armijo)
    return armijo_search(obj, tracer, x, d, f0, slope, alpha0, ls, max_evals);
  return wolfe_search(obj, tracer, x, d, f0, slope, alpha0, ls, max_evals);
}

}  // namespace

RunTrace steepest_descent(OptimizationObjective& obj, std::span<const double> x0,
                          const LineSearchSpec& ls, const StoppingRule& stop) {
  RunTrace trace;
  trace.algorithm = "steepest_descent";
  Tracer tracer(trace, obj);

  std::vector<double> x(x0.begin(), x0.end());
  CostBreakdown cb = obj.evaluate(x);
  tracer.observe(x, cb);
  std::vector<double> g(obj.dim());
  obj.gradient_of_last(g);

  double alpha_prev = 1.0;
  std::string status = "max_evals";
  while (obj.evals().count() < stop.max_evals) {
    const double gnorm = std::sqrt(obj.inner(g, g));
    if (gnorm <= stop.grad_tol || gnorm == 0.0) {
      status = "gradient_converged";
      break;
    }
    std::vector<double> d(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) d[i] = -g[i];
    const double slope = -gnorm * gnorm;

    LineSearchResult lsr =
        line_search(obj, tracer, x, d, cb.total, slope, alpha_prev, ls, stop.max_evals);
    if (!lsr.ok) {
      status = "linesearch_failed";
      break;
    }
    if (stop.cost_tol > 0.0 && cb.total - lsr.cb.total < stop.cost_tol) {
      x = axpy(x, lsr.alpha, d);
      cb = lsr.cb;
      status = "cost_converged";
      break;
    }
    x = axpy(x, lsr.alpha, d);
    cb = lsr.cb;
    alpha_prev = std::min(4.0 * lsr.alpha, 1e6);
    if (lsr.have_gradient) {
      g = std::move(lsr.grad);
    } else {
      if (obj.evals().count() >= stop.max_evals) break;
      obj.gradient_of_last(g);  // adjoint over the accepted trial's forward solve
    }
  }
  tracer.finish(status);
  return trace;
}

RunTrace lbfgs(OptimizationObjective& obj, std::span<const double> x0, int memory,
               const LineSearchSpec& ls, const StoppingRule& stop) {
  RunTrace trace;
  trace.algorithm = "lbfgs";
  Tracer tracer(trace, obj);

  std::vector<double> x(x0.begin(), x0.end());
  CostBreakdown cb = obj.evaluate(x);
  tracer.observe(x, cb);
  std::vector<double> g(obj.dim());
  obj.gradient_of_last(g);

  struct Pair {
    std::vector<double> s, y;
    double rho;
  };
  std::deque<Pair> pairs;

  std::string status = "max_evals";
  bool first = true;
  while (obj.evals().count() < stop.max_evals) {
    const double gnorm = std::sqrt(obj.inner(g, g));
    if (gnorm <= stop.grad_tol || gnorm == 0.0) {
      status = "gradient_converged";
      break;
    }

    // Two-loop recursion in the objective's inner product.
    std::vector<double> q = g;
    std::vector<double> alpha_i(pairs.size());
    for (int i = static_cast<int>(pairs.size()) - 1; i >= 0; --i) {
      alpha_i[i] = pairs[i].rho * obj.inner(pairs[i].s, q);
      for (std::size_t j = 0; j < q.size(); ++j) q[j] -= alpha_i[i] * pairs[i].y[j];
    }
    if (!pairs.empty()) {
      const auto& last = pairs.back();
      const double yy = obj.inner(last.y, last.y);
      const double scale = yy > 0.0 ? 1.0 / (last.rho * yy) : 1.0;
      for (double& v : q) v *= scale;
    }
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      const double beta = pairs[i].rho * obj.inner(pairs[i].y, q);
      for (std::size_t j = 0; j < q.size(); ++j) q[j] += (alpha_i[i] - beta) * pairs[i].s[j];
    }
    std::vector<double> d(q.size());
    for (std::size_t j = 0; j < q.size(); ++j) d[j] = -q[j];

    double slope = obj.inner(g, d);
    if (slope >= 0.0) {  // lost descent, restart from steepest
      pairs.clear();
      for (std::size_t j = 0; j < d.size(); ++j) d[j] = -g[j];
      slope = -gnorm * gnorm;
    }

    const double alpha0 = first ? std::min(1.0, 1.0 / gnorm) : 1.0;
    LineSearchResult lsr =
        line_search(obj, tracer, x, d, cb.total, slope, alpha0, ls, stop.max_evals);
    if (!lsr.ok) {
      if (pairs.empty()) {
        status = "linesearch_failed";
        break;
      }
      pairs.clear();  // retry once with a fresh metric
      continue;
    }
    first = false;

    std::vector<double> x_new = axpy(x, lsr.alpha, d);
    std::vector<double> g_new;
    if (lsr.have_gradient) {
      g_new = std::move(lsr.grad);
    } else {
      if (obj.evals().count() >= stop.max_evals) {
        x = std::move(x_new);
        cb = lsr.cb;
        break;
      }
      g_new.resize(obj.dim());
      obj.gradient_of_last(g_new);
    }

    Pair p;
    p.s.resize(x.size());
    p.y.resize(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) {
      p.s[j] = x_new[j] - x[j];
      p.y[j] = g_new[j] - g[j];
    }
    const double sy = obj.inner(p.s, p.y);
    if (sy > 1e-12) {
      p.rho = 1.0 / sy;
      pairs.push_back(std::move(p));
      if (static_cast<int>(pairs.size()) > memory) pairs.pop_front();
    }

    const double drop = cb.total - lsr.cb.total;
    x = std::move(x_new);
    cb = lsr.cb;
    g = std::move(g_new);
    if (stop.cost_tol > 0.0 && drop < stop.cost_tol) {
      status = "cost_converged";
      break;
    }
  }
  tracer.finish(status);
  return trace;
}

RunTrace nelder_mead(OptimizationObjective& obj, std::span<const double> x0, double simplex_scale,
                     const StoppingRule& stop) {
  RunTrace trace;
  trace.algorithm = "nelder_mead";
  Tracer tracer(trace, obj);

  const int m = obj.dim();
  struct Vertex {
    std::vector<double> x;
    double f;
    long order;  // insertion index for stable tie-breaking
  };
  std::vector<Vertex> simplex;
  simplex.reserve(m + 1);
  long order = 0;

  auto eval_vertex = [&](std::vector<double> x) {
    const CostBreakdown cb = obj.evaluate(x);
    tracer.observe(x, cb);
    return Vertex{std::move(x), cb.total, order++};
  };

  simplex.push_back(eval_vertex(std::vector<double>(x0.begin(), x0.end())));
  for (int i = 0; i < m && obj.evals().count() < stop.max_evals; ++i) {
    std::vector<double> xi(x0.begin(), x0.end());
    xi[i] += simplex_scale;
    simplex.push_back(eval_vertex(std::move(xi)));
  }

  auto sort_simplex = [&]() {
    std::stable_sort(simplex.begin(), simplex.end(), [](const Vertex& a, const Vertex& b) {
      if (a.f != b.f) return a.f < b.f;
      return a.order < b.order;
    });
  };

  std::string status = "max_evals";
  while (static_cast<int>(simplex.size()) == m + 1 && obj.evals().count() < stop.max_evals) {
    sort_simplex();
    if (stop.cost_tol > 0.0 && simplex.back().f - simplex.front().f < stop.cost_tol) {
      status = "cost_converged";
      break;
    }

    std::vector<double> centroid(m, 0.0);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) centroid[j] += simplex[i].x[j] / m;
    const Vertex& worst = simplex[m];

    auto along = [&](double t) {
      std::vector<double> x(m);
      for (int j = 0; j < m; ++j) x[j] = centroid[j] + t * (centroid[j] - worst.x[j]);
      return x;
    };

    Vertex refl = eval_vertex(along(1.0));
    if (refl.f < simplex[0].f) {
      if (obj.evals().count() >= stop.max_evals) {
        simplex[m] = std::move(refl);
        break;
      }
      Vertex expd = eval_vertex(along(2.0));
      simplex[m] = expd.f < refl.f ? std::move(expd) : std::move(refl);
      continue;
    }
    if (refl.f < simplex[m - 1].f) {
      simplex[m] = std::move(refl);
      continue;
    }
    if (obj.evals().count() >= stop.max_evals) break;
    Vertex contr = refl.f < worst.f ? eval_vertex(along(0.5)) : eval_vertex(along(-0.5));
    if (contr.f < std::min(refl.f, worst.f)) {
      simplex[m] = std::move(contr);
      continue;
    }
    // Shrink toward the best vertex.
    for (int i = 1; i <= m && obj.evals().count() < stop.max_evals; ++i) {
      std::vector<double> x(m);
      for (int j = 0; j < m; ++j) x[j] = simplex[0].x[j] + 0.5 * (simplex[i].x[j] - simplex[0].x[j]);
      simplex[i] = eval_vertex(std::move(x));
    }
  }
  tracer.finish(status);
  return trace;
}

ControlVector krotov_sweep(const TransferProblem& prob, const ControlVector& control,
                           const Trajectory& traj, const KrotovConfig& config, EvalCounter& evals,
                           Trajectory* new_traj, double* new_fidelity) {
  if (prob.filter)
    throw std::invalid_argument("krotov_sweep: filters are not supported by this update");

  SplitStepPropagator prop(prob.grid, prob.pot, prob.params, prob.mass);
  const int n_samples = prob.params.n_samples;
  const int n = prob.grid->n();
  const auto& x = prob.grid->x();
  const double dx = prob.grid->dx();

  // Backward chi solve along the previous iterate, keeping node values.
  Wavefunction psi_T{traj.psi.back(), prob.grid};
  const Wavefunction chi_T = adjoint_terminal(psi_T, prob.target);
  std::vector<double> bracket_unused;
  std::vector<std::vector<cplx>> chi_nodes;
  prop.adjoint_solve(traj, control, chi_T.amp, bracket_unused, &chi_nodes);
  evals.add(1);

  // Forward sweep: the control on each slice is updated from chi of the
  // previous iterate and the state of the current one before stepping.
  ControlVector u_new = control;
  Wavefunction psi = prob.initial;
  if (new_traj) {
    new_traj->grid = prob.grid;
    new_traj->psi.clear();
    new_traj->psi.reserve(n_samples);
    new_traj->psi.push_back(psi.amp);
  }
  for (int k = 0; k + 1 < n_samples; ++k) {
    double me = 0.0;
    const auto& chi_k = chi_nodes[k];
    for (int j = 0; j < n; ++j)
      me += prob.pot.du(x[j], control.samples[k]) * (std::conj(chi_k[j]) * psi.amp[j]).real();
    me *= dx;
    u_new.samples[k] = control.samples[k] + config.alpha * config.shape.s[k] * me;
    prop.step_forward(psi.amp, u_new.samples[k]);
    if (new_traj) new_traj->psi.push_back(psi.amp);
  }
  evals.add(1);
  u_new.samples.front() = control.bc_start;
  u_new.samples.back() = control.bc_end;
  if (new_fidelity) *new_fidelity = fidelity(prob.target, psi);
  return u_new;
}

RunTrace krotov_run(const TransferProblem& prob, const ControlVector& u0,
                    const KrotovConfig& config, const StoppingRule& stop) {
  RunTrace trace;
  trace.algorithm = "krotov";
  const auto t0 = Clock::now();

  EvalCounter evals;
  SplitStepPropagator prop(prob.grid, prob.pot, prob.params, prob.mass);

  ControlVector u = u0;
  Trajectory traj;
  Wavefunction psi_T = prop.propagate(prob.initial, u, &traj);
  evals.add(1);

  double fid = fidelity(prob.target, psi_T);
  double cost_now = 0.5 * (1.0 - fid) + regularization_value(u.samples, u.dt, prob.gamma);

  double best = cost_now;
  ControlVector best_u = u;
  double best_fid = fid;
  auto record = [&]() {
    trace.records.push_back({evals.count(), best, 1.0 - best_fid, best_fid, ms_since(t0)});
  };
  record();

  std::string status = "max_evals";
  for (int sweep = 0; sweep < config.max_sweeps && evals.count() + 2 <= stop.max_evals; ++sweep) {
    Trajectory traj_new;
    double fid_new = 0.0;
    ControlVector u_new = krotov_sweep(prob, u, traj, config, evals, &traj_new, &fid_new);
    const double cost_new =
        0.5 * (1.0 - fid_new) + regularization_value(u_new.samples, u_new.dt, prob.gamma);
    u = std::move(u_new);
    traj = std::move(traj_new);
    fid = fid_new;
    if (cost_new < best) {
      best = cost_new;
      best_u = u;
      best_fid = fid_new;
    }
    record();
    if (stop.cost_tol > 0.0 && std::abs(cost_now - cost_new) < stop.cost_tol) {
      cost_now = cost_new;
      status = "cost_converged";
      break;
    }
    cost_now = cost_new;
  }

  trace.status = status;
  trace.final_control = best_u;
  trace.final_x = best_u.samples;
  trace.final_cost = best;
  trace.final_fidelity = best_fid;
  trace.final_infidelity = 1.0 - best_fid;
  trace.wall_ms = ms_since(t0);
  return trace;
}

// ---------------------------------------------------------------------------
// Objective adapters

namespace {

class TimeGridObjective final : public OptimizationObjective {
 public:
  TimeGridObjective(const TransferProblem& prob, EvalCounter& evals, const ObjectiveOptions& opts)
      : prob_(prob),
        evals_(&evals),
        opts_(opts),
        prop_(prob.grid, prob.pot, prob.params, prob.mass) {}

  int dim() const override { return prob_.params.n_samples; }

  CostBreakdown evaluate(std::span<const double> x) override {
    last_u_.samples.assign(x.begin(), x.end());
    last_u_.dt = prob_.params.dt;
    last_u_.bc_start = x.front();
    last_u_.bc_end = x.back();
    last_v_ = prob_.filter ? apply_filter(last_u_, *prob_.filter) : last_u_;

    Wavefunction psi_T =
        prop_.propagate(prob_.initial, last_v_, opts_.keep_trajectory ? &traj_ : nullptr);
    evals_->add(1);
    have_traj_ = opts_.keep_trajectory;
    psi_T_ = std::move(psi_T);

    CostBreakdown cb;
    cb.gamma = prob_.gamma;
    cb.fidelity = fidelity(prob_.target, psi_T_);
    cb.infidelity_term = 0.5 * (1.0 - cb.fidelity);
    cb.regularization_term = regularization_value(last_v_.samples, last_v_.dt, prob_.gamma);
    cb.total = cb.infidelity_term + cb.regularization_term;
    return cb;
  }

  void gradient_of_last(std::vector<double>& grad) override {
    if (!have_traj_) throw std::logic_error("gradient_of_last: no stored evaluation");
    std::vector<double> dJ_du =
        adjoint_gradient_from_trajectory(prob_, prop_, traj_, last_v_, psi_T_, *evals_);
    if (opts_.euclidean) {
      dJ_du.front() = 0.0;  // endpoints are pinned
      dJ_du.back() = 0.0;
      grad = std::move(dJ_du);
      return;
    }
    grad = h1_gradient_from_samples(dJ_du, last_v_.dt);
  }

  double inner(std::span<const double> a, std::span<const double> b) const override {
    if (opts_.euclidean) {
      double s = 0.0;
      for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
      return s;
    }
    const double dt = prob_.params.dt;
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < a.size(); ++i)
      s += (a[i + 1] - a[i]) * (b[i + 1] - b[i]);
    return s / dt;  // dt * sum((Da)(Db)) with D = diff/dt
  }

  EvalCounter& evals() override { return *evals_; }

  ControlVector control_of(std::span<const double> x) const override {
    ControlVector u;
    u.samples.assign(x.begin(), x.end());
    u.dt = prob_.params.dt;
    u.bc_start = x.empty() ? 0.0 : x.front();
    u.bc_end = x.empty() ? 0.0 : x.back();
    return u;
  }

 private:
  TransferProblem prob_;
  EvalCounter* evals_;
  ObjectiveOptions opts_;
  SplitStepPropagator prop_;
  ControlVector last_u_, last_v_;
  Trajectory traj_;
  Wavefunction psi_T_;
  bool have_traj_ = false;
};

class CoefficientObjective final : public OptimizationObjective {
 public:
  CoefficientObjective(const TransferProblem& prob, const BasisSpec& basis,
                       const ShapeFunction& s, const ControlVector& u0, EvalCounter& evals,
                       const ObjectiveOptions& opts)
      : prob_(prob),
        basis_(basis),
        shape_(s),
        u0_(u0),
        evals_(&evals),
        opts_(opts),
        prop_(prob.grid, prob.pot, prob.params, prob.mass),
        sampled_(SampledBasis::sample(basis, prob.params.n_samples)) {}

  int dim() const override { return basis_.size; }

  CostBreakdown evaluate(std::span<const double> x) override {
    last_c_.c.assign(x.begin(), x.end());
    last_u_ = synthesize(u0_, shape_, basis_, last_c_);
    last_v_ = prob_.filter ? apply_filter(last_u_, *prob_.filter) : last_u_;

    const bool keep = opts_.keep_trajectory && !opts_.use_goat;
    Wavefunction psi_T = prop_.propagate(prob_.initial, last_v_, keep ? &traj_ : nullptr);
    evals_->add(1);
    have_traj_ = keep;
    psi_T_ = std::move(psi_T);

    CostBreakdown cb;
    cb.gamma = prob_.gamma;
    cb.fidelity = fidelity(prob_.target, psi_T_);
    cb.infidelity_term = 0.5 * (1.0 - cb.fidelity);
    cb.regularization_term = regularization_value(last_v_.samples, last_v_.dt, prob_.gamma);
    cb.total = cb.infidelity_term + cb.regularization_term;
    return cb;
  }

  void gradient_of_last(std::vector<double>& grad) override {
    if (opts_.use_goat) {
      GradientVector g = goat_gradient(prob_, last_c_, basis_, shape_, u0_, *evals_);
      grad = std::move(g.values);
      return;
    }
    if (!have_traj_) throw std::logic_error("gradient_of_last: no stored evaluation");
    const std::vector<double> dJ_du =
        adjoint_gradient_from_trajectory(prob_, prop_, traj_, last_v_, psi_T_, *evals_);
    const int n = last_v_.n();
    grad.assign(basis_.size, 0.0);
    for (int m = 0; m < basis_.size; ++m) {
      const double* row = sampled_.row(m);
      double acc = 0.0;
      for (int k = 0; k < n; ++k) acc += dJ_du[k] * shape_.s[k] * row[k];
      grad[m] = acc;
    }
  }

  double inner(std::span<const double> a, std::span<const double> b) const override {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
  }

  EvalCounter& evals() override { return *evals_; }

  ControlVector control_of(std::span<const double> x) const override {
    Coefficients c;
    c.c.assign(x.begin(), x.end());
    return synthesize(u0_, shape_, basis_, c);
  }

 private:
  TransferProblem prob_;
  BasisSpec basis_;
  ShapeFunction shape_;
  ControlVector u0_;
  EvalCounter* evals_;
  ObjectiveOptions opts_;
  SplitStepPropagator prop_;
  SampledBasis sampled_;
  Coefficients last_c_;
  ControlVector last_u_, last_v_;
  Trajectory traj_;
  Wavefunction psi_T_;
  bool have_traj_ = false;
};

}  // namespace

std::unique_ptr<OptimizationObjective> make_time_grid_objective(const TransferProblem& prob,
                                                                EvalCounter& evals,
                                                                const ObjectiveOptions& opts) {
  return std::make_unique<TimeGridObjective>(prob, evals, opts);
}

std::unique_ptr<OptimizationObjective> make_coefficient_objective(
    const TransferProblem& prob, const BasisSpec& basis, const ShapeFunction& s,
    const ControlVector& u0, EvalCounter& evals, const ObjectiveOptions& opts) {
  return std::make_unique<CoefficientObjective>(prob, basis, s, u0, evals, opts);
}

RunTrace dgroup(const TransferProblem& prob, const BasisSpec& basis0, const Coefficients& c0,
                const ControlVector& u_base0, const DgroupOptions& opts,
                const StoppingRule& total_stop, std::uint64_t seed) {
  RunTrace trace;
  trace.algorithm = "dgroup";
  trace.seed = seed;
  const auto t0 = Clock::now();

  EvalCounter evals;
  const ShapeFunction shape = ShapeFunction::sine_squared(prob.params.n_samples);
  const int supers = std::max(1, opts.superiterations);
  const long budget = total_stop.max_evals;

  BasisSpec basis = basis0;
  Coefficients c = c0;
  ControlVector base = u_base0;

  double best = std::numeric_limits<double>::infinity();
  double best_fid = 0.0;
  ControlVector best_u;

  ObjectiveOptions oo;
  oo.use_goat = opts.use_goat;

  for (int j = 0; j < supers && evals.count() < budget; ++j) {
    StoppingRule inner = total_stop;
    inner.max_evals = std::min<long>(budget, evals.count() + (budget - evals.count()) /
                                                  std::max(1, supers - j));
    auto obj = make_coefficient_objective(prob, basis, shape, base, evals, oo);
    RunTrace inner_trace = lbfgs(*obj, c.c, opts.lbfgs_memory, opts.linesearch, inner);

    for (TraceRecord r : inner_trace.records) {
      // Cumulative best across superiterations.
      if (!trace.records.empty()) r.cost = std::min(r.cost, trace.records.back().cost);
      if (!trace.records.empty() && r.cost == trace.records.back().cost) {
        r.infidelity = trace.records.back().infidelity;
        r.fidelity = trace.records.back().fidelity;
      }
      r.wall_ms = ms_since(t0);
      trace.records.push_back(r);
    }
    if (inner_trace.final_cost < best) {
      best = inner_trace.final_cost;
      best_fid = inner_trace.final_fidelity;
      best_u = inner_trace.final_control;
    }

    if (j + 1 < supers) {
      const ControlVector incumbent = inner_trace.final_control;
      DressedControl dressed =
          dress(incumbent, basis.size, seed * 0x100000001b3ULL + static_cast<std::uint64_t>(j + 1));
      basis = dressed.basis;
      c = dressed.c;
      base = dressed.base;
    }
  }

  trace.status = "ok";
  trace.final_control = best_u;
  trace.final_x = best_u.samples;
  trace.final_cost = best;
  trace.final_fidelity = best_fid;
  trace.final_infidelity = 1.0 - best_fid;
  trace.wall_ms = ms_since(t0);
  return trace;
}

}  // namespace qoc
