#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "qoc/optimize.hpp"

namespace qoc {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class AlgorithmKind { Grape, Group, Dgroup, NmCrab, NmDcrab, Krotov };

struct ProblemConfig {
  double mass = rb87_mass();        // hbar*ms/um^2
  double beta_hbar_hz_um = 1830.0;  // quoted without the 2pi
  double p2_2pi_hz = 310.0;
  double p4_2pi_hz = 13.6;
  double p6_2pi_hz = -0.0634;
  double r0_um = 0.172;
  double gamma_ms_per_um2 = 1e-6;
  double t_ms = 1.09;
  int n_time_slices = 3500;  // dt = T / slices, N = slices + 1
  double x_min_um = -3.0;
  double x_max_um = 3.0;
  int n_points = 256;
};

struct AlgorithmConfig {
  AlgorithmKind kind = AlgorithmKind::Group;
  BasisKind basis_kind = BasisKind::CRAB;
  int basis_size = 20;
  double krotov_alpha = 0.1;
  int superiterations = 3;
  int lbfgs_memory = 10;
  LineSearchSpec::Kind linesearch = LineSearchSpec::Kind::StrongWolfe;
  bool use_goat = false;
  double nm_simplex_scale = 0.01;  // um per axis
};

struct FilterConfig {
  enum class Kind { None, Identity, Exponential, File };

  Kind kind = Kind::None;
  double tau_c_ms = 0.05;
  std::string file;
};

struct RunConfig {
  std::vector<std::uint64_t> seeds;  // defaults to 1..10
  long max_evals = 500;
  BasisKind init_basis_kind = BasisKind::CRAB;
  int init_basis_size = 20;
  double init_amplitude_um = 0.05;
  std::string out_dir = "out";
  bool seeds_explicit = false;
  bool max_evals_explicit = false;
};

enum class SweepAxis { None, BetaScale, PotentialScale, BasisSize, KrotovStep };

struct SweepSpec {
  SweepAxis axis = SweepAxis::None;
  std::vector<double> values;
};

struct ExperimentConfig {
  ProblemConfig problem;
  AlgorithmConfig algorithm;
  FilterConfig filter;
  RunConfig run;
  SweepSpec sweep;
};

// Strict sectioned key = value parser: unknown sections/keys and malformed
// values are reported with their line number via ConfigError.
ExperimentConfig parse_config_text(const std::string& text, const std::string& origin);
ExperimentConfig parse_config_file(const std::string& path);
// 100 seeds / 2500 evaluations unless the config pinned them.
void apply_full_scale(ExperimentConfig& cfg);

TrapPotential potential_from(const ProblemConfig& pc);
GpeParams params_from(const ProblemConfig& pc);
// Builds the problem (eigenstates included), with the sweep axis applied to
// beta or the potential when relevant.
TransferProblem build_problem(const ProblemConfig& pc, const FilterConfig& fc,
                              SweepAxis axis = SweepAxis::None, double value = 1.0);

// ---------------------------------------------------------------------------
// Experiment execution

struct CellResult {
  int sweep_index = 0;
  double sweep_value = 1.0;
  std::uint64_t seed = 0;
  RunTrace trace;
  std::string error;  // empty on success

  bool ok() const { return error.empty(); }
};

struct ExperimentResult {
  std::vector<CellResult> cells;
  std::vector<std::string> written_files;
  int n_failed = 0;
};

// Runs every (sweep value x seed) cell, at most `workers` at a time, and
// writes one trace CSV and final-control file per cell plus per-value
// ensemble summaries and a cells.csv manifest. Output bytes are independent
// of the worker count (wall-time columns aside).
ExperimentResult run_experiment(const ExperimentConfig& cfg, const std::string& out_dir,
                                int workers);

// ---------------------------------------------------------------------------
// Summaries

struct EnsembleSummary {
  std::vector<double> x;  // eval counts (or sweep values for tables)
  std::vector<double> median, q25, q75;
  int n_traces = 0;
};

// Linear-interpolation (type-7) quantile of the values in v.
double quantile_type7(std::vector<double> v, double p);

// Pointwise quantiles of best-so-far infidelity on the union grid of eval
// counts, carrying each trace's best forward between records.
EnsembleSummary summarize(const std::vector<RunTrace>& traces);
EnsembleSummary summarize_trace_files(const std::vector<std::string>& paths);

// ---------------------------------------------------------------------------
// Robustness

struct RobustnessRow {
  double value = 1.0;
  double fidelity = 0.0;
  double infidelity = 1.0;
};

// Re-propagates a fixed control under each scaled problem; no re-optimization.
std::vector<RobustnessRow> robustness_scan(const ProblemConfig& pc, const FilterConfig& fc,
                                           const ControlVector& solution, SweepAxis axis,
                                           const std::vector<double>& values);

// ---------------------------------------------------------------------------
// File formats

void write_trace_csv(const std::string& path, const RunTrace& trace);
std::vector<TraceRecord> read_trace_csv(const std::string& path);
void write_control_txt(const std::string& path, const ControlVector& u);
ControlVector read_control_txt(const std::string& path);
void write_summary_csv(const std::string& path, const EnsembleSummary& s);
EnsembleSummary read_summary_csv(const std::string& path);
void write_band_svg(const std::string& path, const EnsembleSummary& s);
// CSV (the contract) plus a band chart SVG next to it.
void emit_plot_data(const EnsembleSummary& s, const std::string& csv_path,
                    const std::string& svg_path);

EnsembleSummary summary_from_rows(const std::vector<RobustnessRow>& rows);

std::string to_string(AlgorithmKind kind);
std::string to_string(SweepAxis axis);

}  // namespace qoc
