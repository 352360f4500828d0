#include "qoc/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

namespace qoc {

namespace fs = std::filesystem;

namespace {

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::optional<FilterKernel> make_filter(const FilterConfig& fc, double dt, int n_time) {
  switch (fc.kind) {
    case FilterConfig::Kind::None: return std::nullopt;
    case FilterConfig::Kind::Identity: return FilterKernel::identity(dt);
    case FilterConfig::Kind::Exponential: return FilterKernel::exponential(fc.tau_c_ms, dt, n_time);
    case FilterConfig::Kind::File: return FilterKernel::from_file(fc.file, dt, n_time);
  }
  return std::nullopt;
}

}  // namespace

TrapPotential potential_from(const ProblemConfig& pc) {
  const double r2 = pc.r0_um * pc.r0_um;
  const double r4 = r2 * r2;
  const double r6 = r4 * r2;
  return TrapPotential{two_pi_hz_to_rad_per_ms(pc.p2_2pi_hz) / r2,
                       two_pi_hz_to_rad_per_ms(pc.p4_2pi_hz) / r4,
                       two_pi_hz_to_rad_per_ms(pc.p6_2pi_hz) / r6, pc.r0_um};
}

GpeParams params_from(const ProblemConfig& pc) {
  return GpeParams::from_steps(hbar_hz_to_rad_per_ms(pc.beta_hbar_hz_um), pc.t_ms,
                               pc.n_time_slices);
}

TransferProblem build_problem(const ProblemConfig& pc, const FilterConfig& fc, SweepAxis axis,
                              double value) {
  TrapPotential pot = potential_from(pc);
  GpeParams params = params_from(pc);
  if (axis == SweepAxis::BetaScale) params.beta *= value;
  if (axis == SweepAxis::PotentialScale) pot = pot.scaled(value);
  GridPtr grid = SpatialGrid::make(pc.x_min_um, pc.x_max_um, pc.n_points);
  return make_transfer_problem(grid, pot, params, pc.mass, pc.gamma_ms_per_um2,
                               make_filter(fc, params.dt, params.n_samples));
}

// ---------------------------------------------------------------------------
// Per-cell execution

namespace {

Coefficients pad_coefficients(const Coefficients& c0, int m) {
  Coefficients c;
  c.c = c0.c;
  c.c.resize(m, 0.0);
  return c;
}

// Nelder-Mead with dressed restarts; same restart policy as dgroup.
RunTrace nm_dcrab_run(const TransferProblem& prob, const BasisSpec& basis0,
                      const Coefficients& c0, double simplex_scale, int superiterations,
                      const StoppingRule& total_stop, std::uint64_t seed) {
  RunTrace trace;
  trace.algorithm = "nm-dcrab";
  trace.seed = seed;

  EvalCounter evals;
  const ShapeFunction shape = ShapeFunction::sine_squared(prob.params.n_samples);
  const long budget = total_stop.max_evals;
  const int supers = std::max(1, superiterations);

  BasisSpec basis = basis0;
  Coefficients c = c0;
  ControlVector base = ControlVector::zeros(prob.params.n_samples, prob.params.dt);

  double best = std::numeric_limits<double>::infinity();
  double best_fid = 0.0;
  ControlVector best_u;

  ObjectiveOptions oo;
  oo.keep_trajectory = false;

  for (int j = 0; j < supers && evals.count() < budget; ++j) {
    StoppingRule inner = total_stop;
    inner.max_evals = std::min<long>(
        budget, evals.count() + (budget - evals.count()) / std::max(1, supers - j));
    auto obj = make_coefficient_objective(prob, basis, shape, base, evals, oo);
    RunTrace inner_trace = nelder_mead(*obj, c.c, simplex_scale, inner);

    for (TraceRecord r : inner_trace.records) {
      if (!trace.records.empty() && trace.records.back().cost <= r.cost) {
        r.cost = trace.records.back().cost;
        r.infidelity = trace.records.back().infidelity;
        r.fidelity = trace.records.back().fidelity;
      }
      trace.records.push_back(r);
    }
    if (inner_trace.final_cost < best) {
      best = inner_trace.final_cost;
      best_fid = inner_trace.final_fidelity;
      best_u = inner_trace.final_control;
    }
    if (j + 1 < supers) {
      DressedControl dressed = dress(best_u, basis.size,
                                     seed * 0x100000001b3ULL + static_cast<std::uint64_t>(j + 1));
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
  return trace;
}

RunTrace run_cell(const TransferProblem& prob, const AlgorithmConfig& ac, const RunConfig& rc,
                  std::uint64_t seed, long max_evals, SweepAxis axis, double sweep_value) {
  int algo_m = ac.basis_size;
  double krotov_alpha = ac.krotov_alpha;
  if (axis == SweepAxis::BasisSize) algo_m = static_cast<int>(sweep_value);
  if (axis == SweepAxis::KrotovStep) krotov_alpha = sweep_value;

  const GpeParams& params = prob.params;
  const ShapeFunction shape = ShapeFunction::sine_squared(params.n_samples);
  const BasisSpec init_basis = make_basis(rc.init_basis_kind, rc.init_basis_size, seed);
  auto [c0, u0] = random_initial_control(init_basis, seed, rc.init_amplitude_um,
                                         params.n_samples, params.dt);

  StoppingRule stop;
  stop.max_evals = max_evals;
  LineSearchSpec ls;
  ls.kind = ac.linesearch;

  RunTrace trace;
  switch (ac.kind) {
    case AlgorithmKind::Grape: {
      EvalCounter evals;
      auto obj = make_time_grid_objective(prob, evals);
      trace = lbfgs(*obj, u0.samples, ac.lbfgs_memory, ls, stop);
      trace.algorithm = "grape";
      break;
    }
    case AlgorithmKind::Group: {
      const BasisSpec basis = make_basis(ac.basis_kind, algo_m, seed);
      const Coefficients c = pad_coefficients(c0, algo_m);
      EvalCounter evals;
      ObjectiveOptions oo;
      oo.use_goat = ac.use_goat;
      auto obj = make_coefficient_objective(
          prob, basis, shape, ControlVector::zeros(params.n_samples, params.dt), evals, oo);
      trace = lbfgs(*obj, c.c, ac.lbfgs_memory, ls, stop);
      trace.algorithm = "group";
      break;
    }
    case AlgorithmKind::Dgroup: {
      const BasisSpec basis = make_basis(ac.basis_kind, algo_m, seed);
      const Coefficients c = pad_coefficients(c0, algo_m);
      DgroupOptions opts;
      opts.superiterations = ac.superiterations;
      opts.lbfgs_memory = ac.lbfgs_memory;
      opts.linesearch = ls;
      opts.use_goat = ac.use_goat;
      trace = dgroup(prob, basis, c, ControlVector::zeros(params.n_samples, params.dt), opts,
                     stop, seed);
      break;
    }
    case AlgorithmKind::NmCrab: {
      const BasisSpec basis = make_basis(ac.basis_kind, algo_m, seed);
      const Coefficients c = pad_coefficients(c0, algo_m);
      EvalCounter evals;
      ObjectiveOptions oo;
      oo.keep_trajectory = false;
      auto obj = make_coefficient_objective(
          prob, basis, shape, ControlVector::zeros(params.n_samples, params.dt), evals, oo);
      trace = nelder_mead(*obj, c.c, ac.nm_simplex_scale, stop);
      trace.algorithm = "nm-crab";
      break;
    }
    case AlgorithmKind::NmDcrab: {
      const BasisSpec basis = make_basis(ac.basis_kind, algo_m, seed);
      const Coefficients c = pad_coefficients(c0, algo_m);
      trace = nm_dcrab_run(prob, basis, c, ac.nm_simplex_scale, ac.superiterations, stop, seed);
      break;
    }
    case AlgorithmKind::Krotov: {
      KrotovConfig kc;
      kc.alpha = krotov_alpha;
      kc.shape = shape;
      kc.max_sweeps = 1 << 28;
      trace = krotov_run(prob, u0, kc, stop);
      break;
    }
  }
  trace.seed = seed;
  return trace;
}

}  // namespace

// ---------------------------------------------------------------------------
// Experiment runner

ExperimentResult run_experiment(const ExperimentConfig& cfg, const std::string& out_dir,
                                int workers) {
  ExperimentResult result;
  fs::create_directories(out_dir);

  std::vector<double> sweep_values =
      cfg.sweep.axis == SweepAxis::None ? std::vector<double>{1.0} : cfg.sweep.values;

  // Problems first (eigensolves are the slow part and are shared per value).
  std::vector<TransferProblem> problems;
  problems.reserve(sweep_values.size());
  const bool per_value_problem =
      cfg.sweep.axis == SweepAxis::BetaScale || cfg.sweep.axis == SweepAxis::PotentialScale;
  TransferProblem base_problem = build_problem(cfg.problem, cfg.filter);
  for (double v : sweep_values)
    problems.push_back(per_value_problem ? build_problem(cfg.problem, cfg.filter, cfg.sweep.axis, v)
                                         : base_problem);

  for (int vi = 0; vi < static_cast<int>(sweep_values.size()); ++vi)
    for (std::uint64_t seed : cfg.run.seeds) {
      CellResult cell;
      cell.sweep_index = vi;
      cell.sweep_value = sweep_values[vi];
      cell.seed = seed;
      result.cells.push_back(std::move(cell));
    }

  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= result.cells.size()) break;
      CellResult& cell = result.cells[i];
      try {
        cell.trace = run_cell(problems[cell.sweep_index], cfg.algorithm, cfg.run, cell.seed,
                              cfg.run.max_evals, cfg.sweep.axis, cell.sweep_value);
      } catch (const std::exception& e) {
        cell.error = e.what();
      }
    }
  };
  const int n_workers = std::max(1, workers);
  std::vector<std::thread> pool;
  pool.reserve(n_workers - 1);
  for (int t = 1; t < n_workers; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  // Deterministic writes after the parallel section.
  const std::string algo = to_string(cfg.algorithm.kind);
  auto cell_tag = [&](const CellResult& c) {
    std::string tag = algo;
    if (cfg.sweep.axis != SweepAxis::None) tag += "_v" + std::to_string(c.sweep_index);
    tag += "_seed" + std::to_string(c.seed);
    return tag;
  };

  std::ofstream manifest(fs::path(out_dir) / "cells.csv");
  manifest << "sweep_index,sweep_value,seed,algorithm,status,final_cost,final_infidelity,"
              "final_fidelity,evals,trace_file,control_file,error\n";

  for (CellResult& cell : result.cells) {
    std::string trace_file, control_file;
    if (cell.ok()) {
      trace_file = "trace_" + cell_tag(cell) + ".csv";
      control_file = "control_" + cell_tag(cell) + ".txt";
      write_trace_csv((fs::path(out_dir) / trace_file).string(), cell.trace);
      write_control_txt((fs::path(out_dir) / control_file).string(), cell.trace.final_control);
      result.written_files.push_back(trace_file);
      result.written_files.push_back(control_file);
    } else {
      ++result.n_failed;
    }
    std::string err = cell.error;
    std::replace(err.begin(), err.end(), ',', ';');
    std::replace(err.begin(), err.end(), '\n', ' ');
    manifest << cell.sweep_index << ',' << g17(cell.sweep_value) << ',' << cell.seed << ','
             << algo << ',' << (cell.ok() ? cell.trace.status : "failed") << ','
             << g17(cell.trace.final_cost) << ',' << g17(cell.trace.final_infidelity) << ','
             << g17(cell.trace.final_fidelity) << ','
             << (cell.trace.records.empty() ? 0 : cell.trace.records.back().eval_count) << ','
             << trace_file << ',' << control_file << ',' << err << '\n';
  }
  manifest.close();
  result.written_files.push_back("cells.csv");

  for (int vi = 0; vi < static_cast<int>(sweep_values.size()); ++vi) {
    std::vector<RunTrace> ok_traces;
    for (const CellResult& c : result.cells)
      if (c.sweep_index == vi && c.ok()) ok_traces.push_back(c.trace);
    if (ok_traces.empty()) continue;
    const EnsembleSummary s = summarize(ok_traces);
    std::string name = "summary_" + algo;
    if (cfg.sweep.axis != SweepAxis::None) name += "_v" + std::to_string(vi);
    name += ".csv";
    write_summary_csv((fs::path(out_dir) / name).string(), s);
    result.written_files.push_back(name);
  }
  return result;
}

// ---------------------------------------------------------------------------
// Summaries

double quantile_type7(std::vector<double> v, double p) {
  if (v.empty()) throw std::invalid_argument("quantile of empty set");
  std::sort(v.begin(), v.end());
  const double h = (static_cast<double>(v.size()) - 1.0) * p;
  const std::size_t lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= v.size()) return v.back();
  return v[lo] + (h - lo) * (v[lo + 1] - v[lo]);
}

EnsembleSummary summarize(const std::vector<RunTrace>& traces) {
  if (traces.empty()) throw std::invalid_argument("summarize: no traces");
  std::vector<double> grid;
  for (const RunTrace& t : traces)
    for (const TraceRecord& r : t.records) grid.push_back(static_cast<double>(r.eval_count));
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  EnsembleSummary s;
  s.x = grid;
  s.n_traces = static_cast<int>(traces.size());
  s.median.reserve(grid.size());
  s.q25.reserve(grid.size());
  s.q75.reserve(grid.size());

  std::vector<std::size_t> cursor(traces.size(), 0);
  for (double xg : grid) {
    std::vector<double> vals;
    vals.reserve(traces.size());
    for (std::size_t ti = 0; ti < traces.size(); ++ti) {
      const auto& recs = traces[ti].records;
      std::size_t& cur = cursor[ti];
      while (cur + 1 < recs.size() && static_cast<double>(recs[cur + 1].eval_count) <= xg) ++cur;
      // Best-so-far carried forward; before the first record, its value holds.
      vals.push_back(recs[cur].infidelity);
    }
    s.median.push_back(quantile_type7(vals, 0.5));
    s.q25.push_back(quantile_type7(vals, 0.25));
    s.q75.push_back(quantile_type7(vals, 0.75));
  }
  return s;
}

EnsembleSummary summarize_trace_files(const std::vector<std::string>& paths) {
  if (paths.empty()) throw std::invalid_argument("summarize: no input files");
  std::vector<RunTrace> traces;
  for (const std::string& p : paths) {
    RunTrace t;
    t.records = read_trace_csv(p);
    if (t.records.empty()) throw std::runtime_error(p + ": no records");
    traces.push_back(std::move(t));
  }
  return summarize(traces);
}

EnsembleSummary summary_from_rows(const std::vector<RobustnessRow>& rows) {
  EnsembleSummary s;
  s.n_traces = 1;
  for (const RobustnessRow& r : rows) {
    s.x.push_back(r.value);
    s.median.push_back(r.infidelity);
    s.q25.push_back(r.infidelity);
    s.q75.push_back(r.infidelity);
  }
  return s;
}

// ---------------------------------------------------------------------------
// Robustness

std::vector<RobustnessRow> robustness_scan(const ProblemConfig& pc, const FilterConfig& fc,
                                           const ControlVector& solution, SweepAxis axis,
                                           const std::vector<double>& values) {
  if (axis != SweepAxis::BetaScale && axis != SweepAxis::PotentialScale)
    throw std::invalid_argument("robustness_scan: axis must be beta-scale or potential-scale");
  std::vector<RobustnessRow> rows;
  rows.reserve(values.size());
  for (double v : values) {
    const TransferProblem prob = build_problem(pc, fc, axis, v);
    if (solution.n() != prob.params.n_samples)
      throw std::invalid_argument("robustness_scan: control length does not match the problem");
    EvalCounter evals;
    const CostBreakdown cb = cost(prob, solution, evals);
    rows.push_back({v, cb.fidelity, 1.0 - cb.fidelity});
  }
  return rows;
}

// ---------------------------------------------------------------------------
// File formats

void write_trace_csv(const std::string& path, const RunTrace& trace) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "eval_count,cost,infidelity,fidelity,wall_ms\n";
  char wall[32];
  for (const TraceRecord& r : trace.records) {
    std::snprintf(wall, sizeof(wall), "%.3f", r.wall_ms);
    out << r.eval_count << ',' << g17(r.cost) << ',' << g17(r.infidelity) << ','
        << g17(r.fidelity) << ',' << wall << '\n';
  }
}

std::vector<TraceRecord> read_trace_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<TraceRecord> records;
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path + ": empty file");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    TraceRecord r;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ss(line);
    if (!(ss >> r.eval_count >> r.cost >> r.infidelity >> r.fidelity >> r.wall_ms))
      throw std::runtime_error(path + ": malformed record '" + line + "'");
    records.push_back(r);
  }
  return records;
}

void write_control_txt(const std::string& path, const ControlVector& u) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "# t_ms u_um\n";
  for (int k = 0; k < u.n(); ++k) out << g17(k * u.dt) << ' ' << g17(u.samples[k]) << '\n';
}

ControlVector read_control_txt(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<double> t, u;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ss(line);
    double a, b;
    if (!(ss >> a)) continue;
    if (!(ss >> b)) throw std::runtime_error(path + ": expected two columns");
    t.push_back(a);
    u.push_back(b);
  }
  if (t.size() < 2) throw std::runtime_error(path + ": need >= 2 samples");
  const double dt = t[1] - t[0];
  for (std::size_t k = 1; k < t.size(); ++k)
    if (std::abs(t[k] - k * dt) > 1e-9 * std::max(1.0, std::abs(t.back())))
      throw std::runtime_error(path + ": time samples are not uniform");
  ControlVector c;
  c.samples = std::move(u);
  c.dt = dt;
  c.bc_start = c.samples.front();
  c.bc_end = c.samples.back();
  return c;
}

void write_summary_csv(const std::string& path, const EnsembleSummary& s) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "x,median,q25,q75\n";
  for (std::size_t i = 0; i < s.x.size(); ++i)
    out << g17(s.x[i]) << ',' << g17(s.median[i]) << ',' << g17(s.q25[i]) << ','
        << g17(s.q75[i]) << '\n';
}

EnsembleSummary read_summary_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  EnsembleSummary s;
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path + ": empty file");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ss(line);
    double x, m, a, b;
    if (!(ss >> x >> m >> a >> b))
      throw std::runtime_error(path + ": malformed row '" + line + "'");
    s.x.push_back(x);
    s.median.push_back(m);
    s.q25.push_back(a);
    s.q75.push_back(b);
  }
  return s;
}

void write_band_svg(const std::string& path, const EnsembleSummary& s) {
  if (s.x.empty()) throw std::invalid_argument("write_band_svg: empty summary");
  const double width = 720, height = 440;
  const double ml = 70, mr = 20, mt = 20, mb = 50;

  double xmin = s.x.front(), xmax = s.x.back();
  double ymin = s.q25.front(), ymax = s.q75.front();
  for (std::size_t i = 0; i < s.x.size(); ++i) {
    ymin = std::min({ymin, s.q25[i], s.median[i]});
    ymax = std::max({ymax, s.q75[i], s.median[i]});
  }
  if (xmax == xmin) xmax = xmin + 1.0;
  if (ymax == ymin) ymax = ymin + (ymin == 0.0 ? 1.0 : std::abs(ymin) * 0.1);
  const double pad = 0.05 * (ymax - ymin);
  ymin -= pad;
  ymax += pad;

  auto px = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * (width - ml - mr); };
  auto py = [&](double y) { return height - mb - (y - ymin) / (ymax - ymin) * (height - mt - mb); };

  bool band = false;
  for (std::size_t i = 0; i < s.x.size(); ++i)
    if (s.q25[i] != s.q75[i]) band = true;

  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  if (band) {
    out << "<polygon fill=\"#9ecae1\" fill-opacity=\"0.6\" stroke=\"none\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i) out << px(s.x[i]) << ',' << py(s.q75[i]) << ' ';
    for (std::size_t i = s.x.size(); i-- > 0;) out << px(s.x[i]) << ',' << py(s.q25[i]) << ' ';
    out << "\"/>\n";
  }

  out << "<polyline fill=\"none\" stroke=\"#08519c\" stroke-width=\"1.5\" points=\"";
  for (std::size_t i = 0; i < s.x.size(); ++i) out << px(s.x[i]) << ',' << py(s.median[i]) << ' ';
  out << "\"/>\n";

  // Axes with end labels.
  out << "<line x1=\"" << ml << "\" y1=\"" << height - mb << "\" x2=\"" << width - mr
      << "\" y2=\"" << height - mb << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << height - mb
      << "\" stroke=\"black\"/>\n";
  out << "<text x=\"" << ml << "\" y=\"" << height - mb + 18 << "\" font-size=\"11\">" << g17(xmin)
      << "</text>\n";
  out << "<text x=\"" << width - mr - 40 << "\" y=\"" << height - mb + 18
      << "\" font-size=\"11\">" << g17(xmax) << "</text>\n";
  out << "<text x=\"4\" y=\"" << py(ymin) << "\" font-size=\"11\">" << g17(ymin) << "</text>\n";
  out << "<text x=\"4\" y=\"" << py(ymax) + 4 << "\" font-size=\"11\">" << g17(ymax)
      << "</text>\n";
  out << "</svg>\n";
}

void emit_plot_data(const EnsembleSummary& s, const std::string& csv_path,
                    const std::string& svg_path) {
  write_summary_csv(csv_path, s);
  write_band_svg(svg_path, s);
}

}  // namespace qoc
