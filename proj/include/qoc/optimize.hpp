#pragma once

#include <functional>
#include <memory>
#include <span>
#include <string>

#include "qoc/objective.hpp"

namespace qoc {

struct LineSearchSpec {
  enum class Kind { Armijo, StrongWolfe };

  Kind kind = Kind::StrongWolfe;
  double c1 = 1e-4;
  double c2 = 0.9;
  int max_trials = 25;
};

struct StoppingRule {
  long max_evals = 500;   // absolute bound on the shared counter
  double grad_tol = 0.0;  // <= 0 disables
  double cost_tol = 0.0;  // <= 0 disables
};

struct TraceRecord {
  long eval_count = 0;
  double cost = 0.0;        // best-so-far
  double infidelity = 0.0;  // of the best-so-far point
  double fidelity = 0.0;
  double wall_ms = 0.0;
};

struct RunTrace {
  std::vector<TraceRecord> records;
  std::string algorithm;
  std::uint64_t seed = 0;
  std::vector<double> final_x;   // best point in the driver's space
  ControlVector final_control;   // synthesized time-grid control of the best point
  double final_cost = 0.0;
  double final_infidelity = 0.0;
  double final_fidelity = 0.0;
  double wall_ms = 0.0;
  std::string status = "ok";
};

// Search-space interface the drivers run against. evaluate() costs one solve
// for GPE-backed objectives; gradient_of_last() reuses the stashed forward
// trajectory and costs one adjoint solve (1 + M tangent solves for the GOAT
// backend). Surrogates used in tests count one per evaluate, zero for the
// gradient.
class OptimizationObjective {
 public:
  virtual ~OptimizationObjective() = default;

  virtual int dim() const = 0;
  virtual CostBreakdown evaluate(std::span<const double> x) = 0;
  virtual void gradient_of_last(std::vector<double>& grad) = 0;
  virtual double inner(std::span<const double> a, std::span<const double> b) const = 0;
  virtual EvalCounter& evals() = 0;
  // Time-grid control for result reporting; empty for surrogates.
  virtual ControlVector control_of(std::span<const double> x) const = 0;
};

RunTrace steepest_descent(OptimizationObjective& obj, std::span<const double> x0,
                          const LineSearchSpec& ls, const StoppingRule& stop);

// Two-loop recursion with the objective's inner product in every dot product;
// curvature pairs are rejected when (s,y) <= 1e-12.
RunTrace lbfgs(OptimizationObjective& obj, std::span<const double> x0, int memory,
               const LineSearchSpec& ls, const StoppingRule& stop);

// Standard simplex method, coefficients (1, 2, 0.5, 0.5), per-axis initial
// displacements, stable ordering on exact cost ties.
RunTrace nelder_mead(OptimizationObjective& obj, std::span<const double> x0,
                     double simplex_scale, const StoppingRule& stop);

struct ObjectiveOptions {
  bool use_goat = false;        // coefficient space: forward-mode gradients
  bool euclidean = false;       // time grid: plain dot products + raw L2 gradient
  bool keep_trajectory = true;  // store forward snapshots for gradient reuse
};

// Adapters over the condensate problem. The counter is shared with the
// caller so multi-stage drivers keep one cumulative budget.
std::unique_ptr<OptimizationObjective> make_time_grid_objective(const TransferProblem& prob,
                                                                EvalCounter& evals,
                                                                const ObjectiveOptions& opts = {});
std::unique_ptr<OptimizationObjective> make_coefficient_objective(
    const TransferProblem& prob, const BasisSpec& basis, const ShapeFunction& s,
    const ControlVector& u0, EvalCounter& evals, const ObjectiveOptions& opts = {});

struct KrotovConfig {
  double alpha = 0.1;   // step size
  ShapeFunction shape;  // S(0) = S(T) = 0
  int max_sweeps = 250;
};

// One sequential sweep of the sigma = 0 first-order update: backward chi
// along (control, traj), then a forward pass that updates each slice from the
// stored chi and the freshly propagated state before stepping. Two solves.
ControlVector krotov_sweep(const TransferProblem& prob, const ControlVector& control,
                           const Trajectory& traj, const KrotovConfig& config, EvalCounter& evals,
                           Trajectory* new_traj, double* new_fidelity);

// Refuses problems with a filter configured.
RunTrace krotov_run(const TransferProblem& prob, const ControlVector& u0,
                    const KrotovConfig& config, const StoppingRule& stop);

struct DgroupOptions {
  int superiterations = 3;
  int lbfgs_memory = 10;
  LineSearchSpec linesearch;
  bool use_goat = false;
};

// GROUP with dressed restarts: alternates coefficient-space L-BFGS with fresh
// CRAB bases (coefficients zeroed, base = incumbent control). Cumulative
// trace; superiterations = 1 is plain GROUP.
RunTrace dgroup(const TransferProblem& prob, const BasisSpec& basis0, const Coefficients& c0,
                const ControlVector& u_base0, const DgroupOptions& opts,
                const StoppingRule& total_stop, std::uint64_t seed);

}  // namespace qoc
