#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <thread>

#include "qoc/bench.hpp"

namespace fs = std::filesystem;

namespace {

// Minimal glob on the filename component ('*' and '?').
bool glob_match(const std::string& pattern, const std::string& name) {
  std::size_t p = 0, n = 0, star = std::string::npos, mark = 0;
  while (n < name.size()) {
    if (p < pattern.size() && (pattern[p] == '?' || pattern[p] == name[n])) {
      ++p;
      ++n;
    } else if (p < pattern.size() && pattern[p] == '*') {
      star = p++;
      mark = n;
    } else if (star != std::string::npos) {
      p = star + 1;
      n = ++mark;
    } else {
      return false;
    }
  }
  while (p < pattern.size() && pattern[p] == '*') ++p;
  return p == pattern.size();
}

std::vector<std::string> expand_globs(const std::vector<std::string>& patterns) {
  std::vector<std::string> files;
  for (const std::string& pat : patterns) {
    if (pat.find('*') == std::string::npos && pat.find('?') == std::string::npos) {
      files.push_back(pat);
      continue;
    }
    const fs::path p(pat);
    const fs::path dir = p.parent_path().empty() ? fs::path(".") : p.parent_path();
    const std::string leaf = p.filename().string();
    std::vector<std::string> matched;
    if (fs::is_directory(dir))
      for (const auto& e : fs::directory_iterator(dir))
        if (e.is_regular_file() && glob_match(leaf, e.path().filename().string()))
          matched.push_back(e.path().string());
    std::sort(matched.begin(), matched.end());
    files.insert(files.end(), matched.begin(), matched.end());
  }
  return files;
}

std::vector<double> parse_values_arg(const std::string& arg) {
  // "0.5:1.5:0.05" range or "0.5,0.6,..." list.
  std::vector<double> vals;
  if (arg.find(':') != std::string::npos) {
    double a, b, step;
    char c1, c2;
    std::istringstream ss(arg);
    if (!(ss >> a >> c1 >> b >> c2 >> step) || c1 != ':' || c2 != ':' || step <= 0.0)
      throw qoc::ConfigError("values: expected start:stop:step, got '" + arg + "'");
    for (double v = a; v <= b + 0.5 * step; v += step) vals.push_back(v);
    return vals;
  }
  std::istringstream ss(arg);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) vals.push_back(std::stod(item));
  if (vals.empty()) throw qoc::ConfigError("values: empty list");
  return vals;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantum optimal control benchmarks for condensate driving"};
  app.require_subcommand(1);

  int workers = static_cast<int>(std::thread::hardware_concurrency());
  if (workers < 1) workers = 1;
  std::string out_override;
  bool full_scale = false;
  app.add_option("--workers", workers, "concurrent cells");
  app.add_option("--out", out_override, "output directory override");
  app.add_flag("--full-scale", full_scale, "100 seeds / 2500 evaluations defaults");

  std::string run_config;
  auto* run_cmd = app.add_subcommand("run", "execute an experiment config");
  run_cmd->add_option("config", run_config, "config file")->required();

  std::vector<std::string> summarize_inputs;
  std::string summarize_out = "summary.csv";
  auto* sum_cmd = app.add_subcommand("summarize", "ensemble quartiles from trace files");
  sum_cmd->add_option("traces", summarize_inputs, "trace csv files or globs")->required();
  sum_cmd->add_option("--out-file", summarize_out, "summary csv path");

  std::string rob_solution, rob_axis, rob_values, rob_config;
  std::string rob_out = "robustness.csv";
  auto* rob_cmd = app.add_subcommand("robustness", "re-propagate a solution under scaled problems");
  rob_cmd->add_option("solution", rob_solution, "control file (t_ms u_um)")->required();
  rob_cmd->add_option("axis", rob_axis, "beta-scale | potential-scale")->required();
  rob_cmd->add_option("values", rob_values, "comma list or start:stop:step")->required();
  rob_cmd->add_option("config", rob_config, "config file (problem block)")->required();
  rob_cmd->add_option("--out-file", rob_out, "table csv path");

  std::string plot_in, plot_out;
  auto* plot_cmd = app.add_subcommand("plot", "render a summary csv as an svg band chart");
  plot_cmd->add_option("input", plot_in, "summary csv")->required();
  plot_cmd->add_option("output", plot_out, "svg path")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) {
      qoc::ExperimentConfig cfg = qoc::parse_config_file(run_config);
      if (full_scale) qoc::apply_full_scale(cfg);
      const std::string out_dir = out_override.empty() ? cfg.run.out_dir : out_override;
      const qoc::ExperimentResult res = qoc::run_experiment(cfg, out_dir, workers);
      std::cout << res.cells.size() - res.n_failed << "/" << res.cells.size()
                << " cells succeeded; results in " << out_dir << "\n";
      if (res.n_failed > 0) {
        for (const auto& c : res.cells)
          if (!c.ok())
            std::cerr << "cell seed=" << c.seed << " value=" << c.sweep_value
                      << " failed: " << c.error << "\n";
        return 1;
      }
      return 0;
    }
    if (sum_cmd->parsed()) {
      const auto files = expand_globs(summarize_inputs);
      if (files.empty()) {
        std::cerr << "summarize: no files match\n";
        return 1;
      }
      const qoc::EnsembleSummary s = qoc::summarize_trace_files(files);
      qoc::write_summary_csv(summarize_out, s);
      std::cout << "summarized " << files.size() << " traces -> " << summarize_out << "\n";
      return 0;
    }
    if (rob_cmd->parsed()) {
      qoc::ExperimentConfig cfg = qoc::parse_config_file(rob_config);
      qoc::SweepAxis axis;
      if (rob_axis == "beta-scale") axis = qoc::SweepAxis::BetaScale;
      else if (rob_axis == "potential-scale") axis = qoc::SweepAxis::PotentialScale;
      else throw qoc::ConfigError("axis must be beta-scale or potential-scale");
      const qoc::ControlVector u = qoc::read_control_txt(rob_solution);
      const auto rows =
          qoc::robustness_scan(cfg.problem, cfg.filter, u, axis, parse_values_arg(rob_values));
      std::ofstream out(rob_out);
      out << "x,fidelity,infidelity\n";
      out.precision(17);
      for (const auto& r : rows)
        out << r.value << ',' << r.fidelity << ',' << r.infidelity << '\n';
      std::cout << "robustness table -> " << rob_out << "\n";
      return 0;
    }
    if (plot_cmd->parsed()) {
      const qoc::EnsembleSummary s = qoc::read_summary_csv(plot_in);
      qoc::write_band_svg(plot_out, s);
      std::cout << "chart -> " << plot_out << "\n";
      return 0;
    }
  } catch (const qoc::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
