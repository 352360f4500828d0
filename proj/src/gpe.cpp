#include "qoc/gpe.hpp"

#include <cmath>

namespace qoc {

GpeParams GpeParams::from_steps(double beta, double total_time, int n_slices) {
  if (n_slices < 1) throw std::invalid_argument("GpeParams: need at least one step");
  if (!(total_time > 0.0)) throw std::invalid_argument("GpeParams: total_time must be positive");
  GpeParams p;
  p.beta = beta;
  p.total_time = total_time;
  p.dt = total_time / n_slices;
  p.n_samples = n_slices + 1;
  return p;
}

GpeParams GpeParams::from_dt(double beta, double total_time, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("GpeParams: dt must be positive");
  if (!(total_time > 0.0)) throw std::invalid_argument("GpeParams: total_time must be positive");
  GpeParams p;
  p.beta = beta;
  p.total_time = total_time;
  p.dt = dt;
  // Tolerate representation error in T/dt so exact divisors land on the
  // intended sample count.
  p.n_samples = static_cast<int>(std::floor(total_time / dt * (1.0 + 1e-12))) + 1;
  return p;
}

SplitStepPropagator::SplitStepPropagator(GridPtr grid, const TrapPotential& pot,
                                         const GpeParams& params, double mass)
    : grid_(std::move(grid)), pot_(pot), params_(params), mass_(mass), fft_(grid_->n()) {
  if (!(mass > 0.0)) throw std::invalid_argument("SplitStepPropagator: mass must be positive");
  const int n = grid_->n();
  phase_half_.resize(n);
  phase_full_.resize(n);
  const double scale = 1.0 / n;  // inverse-FFT normalization folded into the phases
  for (int j = 0; j < n; ++j) {
    const double k = grid_->k()[j];
    const double w = k * k / (2.0 * mass_);
    phase_half_[j] = std::polar(scale, -w * params_.dt / 2.0);
    phase_full_[j] = std::polar(scale, -w * params_.dt);
  }
  scratch_a_.resize(n);
  scratch_b_.resize(n);
}

void SplitStepPropagator::kinetic_half(std::vector<cplx>& f) const {
  fft_.forward(f.data());
  const int n = grid_->n();
  for (int j = 0; j < n; ++j) f[j] *= phase_half_[j];
  fft_.inverse(f.data());
}

// conj(phase) keeps the folded 1/n, so these are the exact inverses.
void SplitStepPropagator::kinetic_half_conj(std::vector<cplx>& f) const {
  fft_.forward(f.data());
  const int n = grid_->n();
  for (int j = 0; j < n; ++j) f[j] *= std::conj(phase_half_[j]);
  fft_.inverse(f.data());
}

void SplitStepPropagator::kinetic_full(std::vector<cplx>& f) const {
  fft_.forward(f.data());
  const int n = grid_->n();
  for (int j = 0; j < n; ++j) f[j] *= phase_full_[j];
  fft_.inverse(f.data());
}

void SplitStepPropagator::check_finite(const std::vector<cplx>& f, int step) const {
  double s = 0.0;
  for (const cplx& a : f) s += std::norm(a);
  if (!std::isfinite(s))
    throw PropagationError("non-finite amplitudes at step " + std::to_string(step), step);
}

void SplitStepPropagator::step_forward(std::vector<cplx>& psi, double u_k) {
  kinetic_half(psi);
  const int n = grid_->n();
  const auto& x = grid_->x();
  const double dt = params_.dt;
  const double beta = params_.beta;
  for (int j = 0; j < n; ++j) {
    const double lam = (pot_.value(x[j], u_k) + beta * std::norm(psi[j])) * dt;
    psi[j] *= std::polar(1.0, -lam);
  }
  kinetic_half(psi);
}

Wavefunction SplitStepPropagator::propagate(const Wavefunction& psi0,
                                            const ControlVector& control, Trajectory* store) {
  if (!psi0.grid->same_as(*grid_))
    throw std::invalid_argument("propagate: wavefunction grid mismatch");
  if (control.n() != params_.n_samples)
    throw std::invalid_argument("propagate: control must have exactly N samples");

  Wavefunction psi = psi0;
  const int n_steps = params_.n_samples - 1;
  if (store) {
    store->grid = grid_;
    store->psi.clear();
    store->psi.reserve(params_.n_samples);
    store->psi.push_back(psi.amp);
    for (int k = 0; k < n_steps; ++k) {
      step_forward(psi.amp, control.samples[k]);
      check_finite(psi.amp, k);
      store->psi.push_back(psi.amp);
    }
    return psi;
  }

  // Cost-only path: adjacent kinetic half steps merge into full steps.
  if (n_steps == 0) return psi;
  const int n = grid_->n();
  const auto& x = grid_->x();
  const double dt = params_.dt;
  const double beta = params_.beta;
  kinetic_half(psi.amp);
  for (int k = 0; k < n_steps; ++k) {
    const double u_k = control.samples[k];
    for (int j = 0; j < n; ++j) {
      const double lam = (pot_.value(x[j], u_k) + beta * std::norm(psi.amp[j])) * dt;
      psi.amp[j] *= std::polar(1.0, -lam);
    }
    check_finite(psi.amp, k);
    if (k + 1 < n_steps)
      kinetic_full(psi.amp);
    else
      kinetic_half(psi.amp);
  }
  return psi;
}

// chi at node k+1 -> node k. The slice midpoint states a = K psi_k and
// b = e^{-i Lambda} a are reconstructed from the stored node snapshot; the
// bracket is Re<chi_b|dV/du|b> with chi_b the adjoint at the same stage.
void SplitStepPropagator::step_adjoint_backward(std::vector<cplx>& chi,
                                                const std::vector<cplx>& psi_node_k, double u_k,
                                                double* bracket_out) {
  scratch_a_ = psi_node_k;
  kinetic_half(scratch_a_);
  kinetic_half_conj(chi);

  const int n = grid_->n();
  const auto& x = grid_->x();
  const double dt = params_.dt;
  const double beta = params_.beta;
  double bracket = 0.0;
  for (int j = 0; j < n; ++j) {
    const double lam = (pot_.value(x[j], u_k) + beta * std::norm(scratch_a_[j])) * dt;
    const cplx rot = std::polar(1.0, -lam);
    const cplx b = scratch_a_[j] * rot;
    const double re_chib = (std::conj(chi[j]) * b).real();
    if (bracket_out) bracket += pot_.du(x[j], u_k) * re_chib;
    // chi_a = e^{i lam} chi_b + 2 i beta dt Re(chi_b* b) a
    chi[j] = chi[j] * std::conj(rot) + cplx(0.0, 2.0 * beta * dt * re_chib) * scratch_a_[j];
  }
  if (bracket_out) *bracket_out = bracket * grid_->dx();

  kinetic_half_conj(chi);
}

std::vector<cplx> SplitStepPropagator::adjoint_solve(const Trajectory& traj,
                                                     const ControlVector& control,
                                                     const std::vector<cplx>& chi_T,
                                                     std::vector<double>& bracket,
                                                     std::vector<std::vector<cplx>>* chi_nodes) {
  const int n_samples = params_.n_samples;
  if (traj.n_samples() != n_samples)
    throw std::invalid_argument("adjoint_solve: trajectory sample count mismatch");
  if (control.n() != n_samples)
    throw std::invalid_argument("adjoint_solve: control sample count mismatch");

  bracket.assign(n_samples, 0.0);
  std::vector<cplx> chi = chi_T;

  if (chi_nodes) {
    chi_nodes->assign(n_samples, {});
    (*chi_nodes)[n_samples - 1] = chi;
    for (int k = n_samples - 2; k >= 0; --k) {
      step_adjoint_backward(chi, traj.psi[k], control.samples[k], &bracket[k]);
      check_finite(chi, k);
      (*chi_nodes)[k] = chi;
    }
    return chi;
  }

  // Merged path: chi stays at slice b stages, moved with full kinetic steps.
  const int n = grid_->n();
  const auto& x = grid_->x();
  const double dt = params_.dt;
  const double beta = params_.beta;

  auto full_conj = [&](std::vector<cplx>& f) {
    fft_.forward(f.data());
    for (int j = 0; j < n; ++j) f[j] *= std::conj(phase_full_[j]);
    fft_.inverse(f.data());
  };

  kinetic_half_conj(chi);
  for (int k = n_samples - 2; k >= 0; --k) {
    scratch_a_ = traj.psi[k];
    kinetic_half(scratch_a_);
    double br = 0.0;
    for (int j = 0; j < n; ++j) {
      const double lam = (pot_.value(x[j], control.samples[k]) + beta * std::norm(scratch_a_[j])) * dt;
      const cplx rot = std::polar(1.0, -lam);
      const cplx b = scratch_a_[j] * rot;
      const double re_chib = (std::conj(chi[j]) * b).real();
      br += pot_.du(x[j], control.samples[k]) * re_chib;
      chi[j] = chi[j] * std::conj(rot) + cplx(0.0, 2.0 * beta * dt * re_chib) * scratch_a_[j];
    }
    bracket[k] = br * grid_->dx();
    check_finite(chi, k);
    if (k > 0)
      full_conj(chi);
    else
      kinetic_half_conj(chi);
  }
  return chi;
}

std::vector<cplx> SplitStepPropagator::apply_hamiltonian(const std::vector<cplx>& psi,
                                                         double u) const {
  const int n = grid_->n();
  std::vector<cplx> kin = psi;
  fft_.forward(kin.data());
  for (int j = 0; j < n; ++j) {
    const double k = grid_->k()[j];
    kin[j] *= k * k / (2.0 * mass_) / n;
  }
  fft_.inverse(kin.data());
  const auto& x = grid_->x();
  for (int j = 0; j < n; ++j)
    kin[j] += (pot_.value(x[j], u) + params_.beta * std::norm(psi[j])) * psi[j];
  return kin;
}

}  // namespace qoc
