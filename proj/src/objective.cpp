#include "qoc/objective.hpp"

#include <cmath>

namespace qoc {

namespace {

// Central-difference first derivative, second-order one-sided at the ends.
std::vector<double> derivative_samples(const std::vector<double>& u, double dt) {
  const int n = static_cast<int>(u.size());
  std::vector<double> d(n, 0.0);
  if (n < 4) return d;
  d[0] = (-3.0 * u[0] + 4.0 * u[1] - u[2]) / (2.0 * dt);
  for (int k = 1; k + 1 < n; ++k) d[k] = (u[k + 1] - u[k - 1]) / (2.0 * dt);
  d[n - 1] = (3.0 * u[n - 1] - 4.0 * u[n - 2] + u[n - 3]) / (2.0 * dt);
  return d;
}

}  // namespace

double regularization_value(const std::vector<double>& u, double dt, double gamma) {
  if (gamma == 0.0 || u.size() < 4) return 0.0;
  const std::vector<double> d = derivative_samples(u, dt);
  double s = 0.0;
  for (double v : d) s += v * v;
  return 0.5 * gamma * s * dt;
}

std::vector<double> regularization_gradient(const std::vector<double>& u, double dt,
                                            double gamma) {
  const int n = static_cast<int>(u.size());
  std::vector<double> g(n, 0.0);
  if (gamma == 0.0 || n < 4) return g;
  const std::vector<double> d = derivative_samples(u, dt);
  const double w = gamma * dt / (2.0 * dt);  // gamma * dt * (stencil / 2dt)
  // Transpose of the derivative stencil applied to d.
  g[0] += w * -3.0 * d[0];
  g[1] += w * 4.0 * d[0];
  g[2] += w * -1.0 * d[0];
  for (int k = 1; k + 1 < n; ++k) {
    g[k + 1] += w * d[k];
    g[k - 1] -= w * d[k];
  }
  g[n - 1] += w * 3.0 * d[n - 1];
  g[n - 2] += w * -4.0 * d[n - 1];
  g[n - 3] += w * d[n - 1];
  return g;
}

TransferProblem make_transfer_problem(GridPtr grid, const TrapPotential& pot,
                                      const GpeParams& params, double mass, double gamma,
                                      std::optional<FilterKernel> filter) {
  TransferProblem prob;
  prob.grid = grid;
  prob.pot = pot;
  prob.params = params;
  prob.mass = mass;
  prob.gamma = gamma;
  prob.filter = std::move(filter);
  prob.initial = ground_state(grid, pot, params.beta, mass).state;
  prob.target = first_excited_state(grid, pot, params.beta, mass).state;
  return prob;
}

CostBreakdown cost(const TransferProblem& prob, const ControlVector& u, EvalCounter& evals) {
  const ControlVector v = prob.filter ? apply_filter(u, *prob.filter) : u;
  SplitStepPropagator prop(prob.grid, prob.pot, prob.params, prob.mass);
  const Wavefunction psi_T = prop.propagate(prob.initial, v);
  evals.add(1);

  CostBreakdown out;
  out.gamma = prob.gamma;
  out.fidelity = fidelity(prob.target, psi_T);
  out.infidelity_term = 0.5 * (1.0 - out.fidelity);
  out.regularization_term = regularization_value(v.samples, v.dt, prob.gamma);
  out.total = out.infidelity_term + out.regularization_term;
  return out;
}

Wavefunction adjoint_terminal(const Wavefunction& psi_T, const Wavefunction& target) {
  const cplx z = overlap(target, psi_T);  // <psi_t|psi(T)>
  Wavefunction chi = target;
  const cplx iz = cplx(0.0, 1.0) * z;
  for (cplx& a : chi.amp) a *= iz;
  return chi;
}

std::vector<double> adjoint_gradient_from_trajectory(const TransferProblem& prob,
                                                     SplitStepPropagator& prop,
                                                     const Trajectory& traj,
                                                     const ControlVector& v,
                                                     const Wavefunction& psi_T,
                                                     EvalCounter& evals,
                                                     std::vector<double>* bracket_out,
                                                     std::vector<double>* dJ_dv_out) {
  const Wavefunction chi_T = adjoint_terminal(psi_T, prob.target);
  std::vector<double> bracket_dyn;
  prop.adjoint_solve(traj, v, chi_T.amp, bracket_dyn);
  evals.add(1);

  const int n = v.n();
  const double dt = v.dt;
  const std::vector<double> reg_grad = regularization_gradient(v.samples, dt, prob.gamma);

  std::vector<double> dJ_dv(n);
  for (int k = 0; k < n; ++k) dJ_dv[k] = -dt * bracket_dyn[k] + reg_grad[k];
  if (bracket_out) {
    bracket_out->resize(n);
    // Re<chi|dH/du|psi> + gamma*vddot, the paper-facing integrand.
    for (int k = 0; k < n; ++k) (*bracket_out)[k] = -dJ_dv[k] / dt;
  }
  std::vector<double> dJ_du = prob.filter ? adjoint_filter(dJ_dv, *prob.filter) : dJ_dv;
  if (dJ_dv_out) *dJ_dv_out = std::move(dJ_dv);
  return dJ_du;
}

GradientAssembly assemble_adjoint_gradient(const TransferProblem& prob, const ControlVector& u,
                                           EvalCounter& evals) {
  const ControlVector v = prob.filter ? apply_filter(u, *prob.filter) : u;
  SplitStepPropagator prop(prob.grid, prob.pot, prob.params, prob.mass);

  Trajectory traj;
  const Wavefunction psi_T = prop.propagate(prob.initial, v, &traj);
  evals.add(1);

  GradientAssembly out;
  out.cost.gamma = prob.gamma;
  out.cost.fidelity = fidelity(prob.target, psi_T);
  out.cost.infidelity_term = 0.5 * (1.0 - out.cost.fidelity);
  out.cost.regularization_term = regularization_value(v.samples, v.dt, prob.gamma);
  out.cost.total = out.cost.infidelity_term + out.cost.regularization_term;

  out.dJ_du = adjoint_gradient_from_trajectory(prob, prop, traj, v, psi_T, evals, &out.bracket,
                                               &out.dJ_dv);
  return out;
}

// Thomas algorithm on the standard second-difference operator.
std::vector<double> solve_time_poisson(const std::vector<double>& rhs, double dt) {
  const int n = static_cast<int>(rhs.size());
  std::vector<double> g(n, 0.0);
  const int m = n - 2;  // interior unknowns
  if (m < 1) return g;
  const double off = 1.0 / (dt * dt);
  const double diag = -2.0 / (dt * dt);
  std::vector<double> cp(m, 0.0), dp(m, 0.0);
  cp[0] = off / diag;
  dp[0] = rhs[1] / diag;
  for (int i = 1; i < m; ++i) {
    const double denom = diag - off * cp[i - 1];
    cp[i] = off / denom;
    dp[i] = (rhs[i + 1] - off * dp[i - 1]) / denom;
  }
  g[m] = dp[m - 1];
  for (int i = m - 2; i >= 0; --i) g[i + 1] = dp[i] - cp[i] * g[i + 2];
  return g;
}

std::vector<double> h1_gradient_from_samples(const std::vector<double>& dJ_du, double dt) {
  const int n = static_cast<int>(dJ_du.size());
  std::vector<double> rhs(n, 0.0);
  for (int k = 1; k + 1 < n; ++k) rhs[k] = -dJ_du[k] / dt;
  return solve_time_poisson(rhs, dt);
}

GradientVector grape_gradient_h1(const TransferProblem& prob, const ControlVector& u,
                                 EvalCounter& evals) {
  const GradientAssembly assembly = assemble_adjoint_gradient(prob, u, evals);
  GradientVector g;
  g.space = GradientVector::Space::H1TimeGrid;
  g.values = h1_gradient_from_samples(assembly.dJ_du, u.dt);
  return g;
}

GradientVector grape_gradient_h1_filtered(const TransferProblem& prob, const FilterKernel& kernel,
                                          const ControlVector& u, EvalCounter& evals) {
  TransferProblem filtered = prob;
  filtered.filter = kernel;
  return grape_gradient_h1(filtered, u, evals);
}

GradientVector group_gradient(const TransferProblem& prob, const Coefficients& c,
                              const BasisSpec& basis, const ShapeFunction& s,
                              const ControlVector& u0, EvalCounter& evals) {
  GradientVector g;
  g.space = GradientVector::Space::Coefficient;
  if (basis.size == 0) return g;

  const ControlVector u = synthesize(u0, s, basis, c);
  const GradientAssembly assembly = assemble_adjoint_gradient(prob, u, evals);
  const int n = u.n();
  const SampledBasis sb = SampledBasis::sample(basis, n);
  g.values.resize(basis.size);
  for (int m = 0; m < basis.size; ++m) {
    const double* row = sb.row(m);
    double acc = 0.0;
    for (int k = 0; k < n; ++k) acc += assembly.dJ_du[k] * s.s[k] * row[k];
    g.values[m] = acc;
  }
  return g;
}

GradientVector group_gradient_filtered(const TransferProblem& prob, const FilterKernel& kernel,
                                       const Coefficients& c, const BasisSpec& basis,
                                       const ShapeFunction& s, const ControlVector& u0,
                                       EvalCounter& evals) {
  TransferProblem filtered = prob;
  filtered.filter = kernel;
  return group_gradient(filtered, c, basis, s, u0, evals);
}

GradientVector goat_gradient(const TransferProblem& prob, const Coefficients& c,
                             const BasisSpec& basis, const ShapeFunction& s,
                             const ControlVector& u0, EvalCounter& evals) {
  GradientVector g;
  g.space = GradientVector::Space::Coefficient;
  const int m = basis.size;
  if (m == 0) return g;

  const ControlVector u = synthesize(u0, s, basis, c);
  const ControlVector v = prob.filter ? apply_filter(u, *prob.filter) : u;
  const int n_t = v.n();
  const double dt = v.dt;
  const SampledBasis sb = SampledBasis::sample(basis, n_t);

  // dv_n/dc_n on the time grid: S f_n, pushed through the filter if present.
  std::vector<std::vector<double>> dv(m);
  for (int i = 0; i < m; ++i) {
    std::vector<double> sf(n_t);
    const double* row = sb.row(i);
    for (int k = 0; k < n_t; ++k) sf[k] = s.s[k] * row[k];
    sf.front() = 0.0;
    sf.back() = 0.0;
    if (prob.filter) {
      ControlVector tmp{std::move(sf), dt, 0.0, 0.0};
      dv[i] = apply_filter(tmp, *prob.filter).samples;
    } else {
      dv[i] = std::move(sf);
    }
  }

  SplitStepPropagator prop(prob.grid, prob.pot, prob.params, prob.mass);
  const int n = prob.grid->n();
  const auto& x = prob.grid->x();
  const double beta = prob.params.beta;

  std::vector<cplx> psi = prob.initial.amp;
  std::vector<std::vector<cplx>> tang(m, std::vector<cplx>(n, cplx(0.0)));

  // Kinetic phases including the 1/n inverse normalization.
  Fft fft(n);
  std::vector<cplx> half(n);
  for (int j = 0; j < n; ++j) {
    const double k = prob.grid->k()[j];
    half[j] = std::polar(1.0 / n, -k * k / (2.0 * prob.mass) * dt / 2.0);
  }
  auto apply_half = [&](std::vector<cplx>& f) {
    fft.forward(f.data());
    for (int j = 0; j < n; ++j) f[j] *= half[j];
    fft.inverse(f.data());
  };

  for (int k = 0; k + 1 < n_t; ++k) {
    apply_half(psi);
    for (int i = 0; i < m; ++i) apply_half(tang[i]);
    const double u_k = v.samples[k];
    for (int i = 0; i < m; ++i) {
      const double dvk = dv[i][k];
      for (int j = 0; j < n; ++j) {
        const double lam = (prob.pot.value(x[j], u_k) + beta * std::norm(psi[j])) * dt;
        const cplx rot = std::polar(1.0, -lam);
        const cplx b = psi[j] * rot;
        const double dlam =
            (prob.pot.du(x[j], u_k) * dvk + 2.0 * beta * (std::conj(psi[j]) * tang[i][j]).real()) *
            dt;
        tang[i][j] = rot * tang[i][j] + b * cplx(0.0, -dlam);
      }
    }
    for (int j = 0; j < n; ++j) {
      const double lam = (prob.pot.value(x[j], u_k) + beta * std::norm(psi[j])) * dt;
      psi[j] *= std::polar(1.0, -lam);
    }
    apply_half(psi);
    for (int i = 0; i < m; ++i) apply_half(tang[i]);
  }
  evals.add(1 + m);

  Wavefunction psi_T{psi, prob.grid};
  const cplx zbar = overlap(psi_T, prob.target);  // <psi(T)|psi_t>
  const std::vector<double> reg_grad = regularization_gradient(v.samples, dt, prob.gamma);

  g.values.resize(m);
  for (int i = 0; i < m; ++i) {
    Wavefunction dpsi{tang[i], prob.grid};
    const cplx dz = overlap(prob.target, dpsi);  // <psi_t|dpsi(T)>
    double val = -(dz * zbar).real();
    for (int k = 0; k < n_t; ++k) val += reg_grad[k] * dv[i][k];
    g.values[i] = val;
  }
  return g;
}

}  // namespace qoc
