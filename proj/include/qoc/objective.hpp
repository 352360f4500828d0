#pragma once

#include <optional>

#include "qoc/eigenstates.hpp"
#include "qoc/filter.hpp"
#include "qoc/gpe.hpp"

namespace qoc {

// One count per equation-of-motion solve: one forward GPE solve or one
// adjoint solve (the paper's unit of optimization cost).
class EvalCounter {
 public:
  void add(long k = 1) { count_ += k; }
  long count() const { return count_; }

 private:
  long count_ = 0;
};

struct CostBreakdown {
  double infidelity_term = 0.0;     // (1-F)/2
  double regularization_term = 0.0; // (gamma/2) int udot^2 dt
  double total = 0.0;
  double gamma = 0.0;
  double fidelity = 0.0;
};

struct GradientVector {
  enum class Space { H1TimeGrid, Coefficient };

  std::vector<double> values;
  Space space = Space::H1TimeGrid;
};

// The condensate driving problem: fixed grid, trap, GPE parameters, cost
// weight and endpoint states, plus an optional control-line filter. When the
// filter is present cost and gradients are evaluated along v = h*u with the
// regularization on v.
struct TransferProblem {
  GridPtr grid;
  TrapPotential pot;
  GpeParams params;
  double mass = rb87_mass();
  double gamma = 1e-6;  // ms/um^2
  Wavefunction initial;
  Wavefunction target;
  std::optional<FilterKernel> filter;
};

// Builds the problem with eigensolver-prepared endpoint states (ground ->
// first excited at u = 0).
TransferProblem make_transfer_problem(GridPtr grid, const TrapPotential& pot,
                                      const GpeParams& params, double mass, double gamma,
                                      std::optional<FilterKernel> filter = std::nullopt);

// J = (1 - F)/2 + (gamma/2) sum vdot_k^2 dt, central differences inside,
// second-order one-sided at the ends. Counts one solve.
CostBreakdown cost(const TransferProblem& prob, const ControlVector& u, EvalCounter& evals);

// chi(T) = i <psi_t|psi(T)> psi_t.
Wavefunction adjoint_terminal(const Wavefunction& psi_T, const Wavefunction& target);

// Everything one forward + one adjoint solve yields: the cost pieces, the
// bracket integrand B_k = Re<chi|dH/du|psi> + gamma*vddot in the (possibly
// filtered) control's time grid, and the exact per-sample derivatives
// dJ/dv_k = -dt*B_k and dJ/du_k (pulled back through the filter transpose
// when one is configured). Counts two solves.
struct GradientAssembly {
  CostBreakdown cost;
  std::vector<double> bracket;  // in v-space, per unit time
  std::vector<double> dJ_dv;
  std::vector<double> dJ_du;
};

GradientAssembly assemble_adjoint_gradient(const TransferProblem& prob, const ControlVector& u,
                                           EvalCounter& evals);

// H1 gradient: solve the time Poisson problem G'' = B with Dirichlet ends on
// the standard second-difference tridiagonal operator.
GradientVector grape_gradient_h1(const TransferProblem& prob, const ControlVector& u,
                                 EvalCounter& evals);
GradientVector grape_gradient_h1_filtered(const TransferProblem& prob, const FilterKernel& kernel,
                                          const ControlVector& u, EvalCounter& evals);

// Coefficient-space gradient dJ/dc_n = sum_k dJ/du_k S_k f_n(t_k); the
// shared integrand is computed once, so the cost is independent of M beyond
// the projections. M = 0 returns an empty gradient without solving.
GradientVector group_gradient(const TransferProblem& prob, const Coefficients& c,
                              const BasisSpec& basis, const ShapeFunction& s,
                              const ControlVector& u0, EvalCounter& evals);
GradientVector group_gradient_filtered(const TransferProblem& prob, const FilterKernel& kernel,
                                       const Coefficients& c, const BasisSpec& basis,
                                       const ShapeFunction& s, const ControlVector& u0,
                                       EvalCounter& evals);

// Forward-mode gradient: co-propagates each d(psi)/dc_n with psi through the
// tangent of the discrete step. Costs 1 + M solves.
GradientVector goat_gradient(const TransferProblem& prob, const Coefficients& c,
                             const BasisSpec& basis, const ShapeFunction& s,
                             const ControlVector& u0, EvalCounter& evals);

// Exact gradient of the discrete regularization (gamma*dt*C^T C u with C the
// central/one-sided derivative matrix); exposed for reuse and tests.
std::vector<double> regularization_gradient(const std::vector<double>& u, double dt,
                                            double gamma);
double regularization_value(const std::vector<double>& u, double dt, double gamma);

// Tridiagonal Dirichlet solve of G'' = rhs on the dt grid (G_0 = G_{N-1} = 0).
std::vector<double> solve_time_poisson(const std::vector<double>& rhs, double dt);

// Adjoint pass over an existing forward solve: chi terminal condition,
// backward sweep, exact per-sample dJ/dv assembly and filter pullback.
// Counts one solve. `v` is the control the propagation actually followed.
std::vector<double> adjoint_gradient_from_trajectory(const TransferProblem& prob,
                                                     SplitStepPropagator& prop,
                                                     const Trajectory& traj,
                                                     const ControlVector& v,
                                                     const Wavefunction& psi_T,
                                                     EvalCounter& evals,
                                                     std::vector<double>* bracket_out = nullptr,
                                                     std::vector<double>* dJ_dv_out = nullptr);

// H1 Riesz representative of the per-sample derivative vector.
std::vector<double> h1_gradient_from_samples(const std::vector<double>& dJ_du, double dt);

}  // namespace qoc
