#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "qoc/control.hpp"
#include "qoc/fft.hpp"
#include "qoc/grid.hpp"
#include "qoc/potential.hpp"
#include "qoc/wavefunction.hpp"

namespace qoc {

struct GpeParams {
  double beta = 0.0;    // rad/ms * um (nonlinear self-interaction)
  double dt = 0.0;      // ms
  int n_samples = 0;    // N = floor(T/dt) + 1 time points
  double total_time = 0.0;  // ms

  // dt = T / n_slices, N = n_slices + 1.
  static GpeParams from_steps(double beta, double total_time, int n_slices);
  static GpeParams from_dt(double beta, double total_time, double dt);
};

struct PropagationError : std::runtime_error {
  int step;
  PropagationError(const std::string& what, int step_index)
      : std::runtime_error(what), step(step_index) {}
};

// Stored node snapshots psi(t_0) .. psi(t_{N-1}) of one forward solve.
struct Trajectory {
  std::vector<std::vector<cplx>> psi;
  GridPtr grid;

  int n_samples() const { return static_cast<int>(psi.size()); }
};

// Strang split-step solver (kinetic half, potential, kinetic half) for the
// 1D GPE with a displaced trap and piecewise-constant control. The potential
// stage absorbs the nonlinearity using the instantaneous density, which it
// conserves pointwise, so the stage is solved exactly and every step is
// unitary.
//
// The backward adjoint step is the exact discrete adjoint of the forward
// step: the conjugate coupling beta*psi^2*chi* enters as a real rank-one
// correction inside the potential stage, and the scheme reduces to the
// reversed Schroedinger split step at beta = 0. Instances hold scratch
// buffers; use one instance per thread.
class SplitStepPropagator {
 public:
  SplitStepPropagator(GridPtr grid, const TrapPotential& pot, const GpeParams& params,
                      double mass);

  const GpeParams& params() const { return params_; }
  const TrapPotential& potential() const { return pot_; }
  const GridPtr& grid() const { return grid_; }
  double mass() const { return mass_; }

  // One node-to-node step with control value u_k on the slice.
  void step_forward(std::vector<cplx>& psi, double u_k);

  // One node-to-node backward adjoint step: chi at t_{k+1} -> chi at t_k,
  // along the stored forward node state psi(t_k). If bracket_out is non-null
  // it receives Re<chi|dV/du|psi> evaluated at the slice midpoint states.
  void step_adjoint_backward(std::vector<cplx>& chi, const std::vector<cplx>& psi_node_k,
                             double u_k, double* bracket_out = nullptr);

  // N-1 steps; control must have exactly N samples. Snapshots stored when
  // store != nullptr. Throws PropagationError on non-finite amplitudes.
  Wavefunction propagate(const Wavefunction& psi0, const ControlVector& control,
                         Trajectory* store = nullptr);

  // Full backward adjoint solve along a stored trajectory. Fills
  // bracket[k] = Re<chi|dV/du|psi> per slice k (last entry 0) and returns
  // chi(0). If chi_nodes is non-null it receives chi at every node.
  std::vector<cplx> adjoint_solve(const Trajectory& traj, const ControlVector& control,
                                  const std::vector<cplx>& chi_T,
                                  std::vector<double>& bracket,
                                  std::vector<std::vector<cplx>>* chi_nodes = nullptr);

  // Energy functional pieces used by the eigensolvers and diagnostics:
  // applies H[psi] = -(1/2m) d2/dx2 + V(x,u) + beta |psi|^2 to psi.
  std::vector<cplx> apply_hamiltonian(const std::vector<cplx>& psi, double u) const;

 private:
  void kinetic_half(std::vector<cplx>& f) const;
  void kinetic_half_conj(std::vector<cplx>& f) const;
  void kinetic_full(std::vector<cplx>& f) const;
  void check_finite(const std::vector<cplx>& f, int step) const;

  GridPtr grid_;
  TrapPotential pot_;
  GpeParams params_;
  double mass_;
  Fft fft_;
  std::vector<cplx> phase_half_;  // exp(-i k^2 dt / 4m) / n  (inverse-FFT scale folded in)
  std::vector<cplx> phase_full_;  // exp(-i k^2 dt / 2m) / n
  std::vector<cplx> scratch_a_, scratch_b_;
};

}  // namespace qoc
