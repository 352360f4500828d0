#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include "qoc/bench.hpp"

namespace qoc {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  std::size_t b = s.find_last_not_of(" \t\r");
  if (a == std::string::npos) return "";
  return s.substr(a, b - a + 1);
}

[[noreturn]] void fail(const std::string& origin, int line, const std::string& msg) {
  throw ConfigError(origin + ":" + std::to_string(line) + ": " + msg);
}

double parse_double(const std::string& origin, int line, const std::string& key,
                    const std::string& v) {
  try {
    std::size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing");
    return x;
  } catch (const std::exception&) {
    fail(origin, line, "key '" + key + "': expected a number, got '" + v + "'");
  }
}

long parse_long(const std::string& origin, int line, const std::string& key,
                const std::string& v) {
  try {
    std::size_t pos = 0;
    const long x = std::stol(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing");
    return x;
  } catch (const std::exception&) {
    fail(origin, line, "key '" + key + "': expected an integer, got '" + v + "'");
  }
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

// "1,2,5" or "1..10" (inclusive).
std::vector<std::uint64_t> parse_seed_list(const std::string& origin, int line,
                                           const std::string& v) {
  std::vector<std::uint64_t> seeds;
  const auto dots = v.find("..");
  if (dots != std::string::npos) {
    const long a = parse_long(origin, line, "seeds", trim(v.substr(0, dots)));
    const long b = parse_long(origin, line, "seeds", trim(v.substr(dots + 2)));
    if (a < 0 || b < a) fail(origin, line, "seeds: bad range");
    for (long s = a; s <= b; ++s) seeds.push_back(static_cast<std::uint64_t>(s));
    return seeds;
  }
  for (const std::string& item : split_list(v))
    seeds.push_back(static_cast<std::uint64_t>(parse_long(origin, line, "seeds", item)));
  if (seeds.empty()) fail(origin, line, "seeds: empty list");
  return seeds;
}

BasisKind parse_basis_kind(const std::string& origin, int line, const std::string& v) {
  if (v == "cb") return BasisKind::CB;
  if (v == "crab") return BasisKind::CRAB;
  fail(origin, line, "basis kind must be cb or crab, got '" + v + "'");
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text, const std::string& origin) {
  ExperimentConfig cfg;
  cfg.run.seeds = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};

  bool has_algorithm_name = false;
  std::string section;
  std::istringstream in(text);
  std::string raw;
  int line = 0;

  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    const std::string s = trim(raw);
    if (s.empty()) continue;

    if (s.front() == '[') {
      if (s.back() != ']') fail(origin, line, "unterminated section header");
      section = trim(s.substr(1, s.size() - 2));
      if (section != "problem" && section != "algorithm" && section != "filter" &&
          section != "run" && section != "sweep")
        fail(origin, line, "unknown section [" + section + "]");
      continue;
    }

    const auto eq = s.find('=');
    if (eq == std::string::npos) fail(origin, line, "expected 'key = value'");
    const std::string key = trim(s.substr(0, eq));
    const std::string val = trim(s.substr(eq + 1));
    if (key.empty()) fail(origin, line, "empty key");
    if (section.empty()) fail(origin, line, "key outside any section");

    auto num = [&]() { return parse_double(origin, line, key, val); };
    auto integer = [&]() { return parse_long(origin, line, key, val); };

    if (section == "problem") {
      ProblemConfig& p = cfg.problem;
      if (key == "mass_hbar_ms_per_um2") p.mass = num();
      else if (key == "beta_hbar_hz_um") p.beta_hbar_hz_um = num();
      else if (key == "p2_2pi_hz") p.p2_2pi_hz = num();
      else if (key == "p4_2pi_hz") p.p4_2pi_hz = num();
      else if (key == "p6_2pi_hz") p.p6_2pi_hz = num();
      else if (key == "r0_um") p.r0_um = num();
      else if (key == "gamma_ms_per_um2") p.gamma_ms_per_um2 = num();
      else if (key == "T_ms") p.t_ms = num();
      else if (key == "n_time_slices") p.n_time_slices = static_cast<int>(integer());
      else if (key == "x_min_um") p.x_min_um = num();
      else if (key == "x_max_um") p.x_max_um = num();
      else if (key == "n_points") p.n_points = static_cast<int>(integer());
      else fail(origin, line, "unknown key '" + key + "' in [problem]");
    } else if (section == "algorithm") {
      AlgorithmConfig& a = cfg.algorithm;
      if (key == "name") {
        if (val == "grape") a.kind = AlgorithmKind::Grape;
        else if (val == "group") a.kind = AlgorithmKind::Group;
        else if (val == "dgroup") a.kind = AlgorithmKind::Dgroup;
        else if (val == "nm-crab") a.kind = AlgorithmKind::NmCrab;
        else if (val == "nm-dcrab") a.kind = AlgorithmKind::NmDcrab;
        else if (val == "krotov") a.kind = AlgorithmKind::Krotov;
        else fail(origin, line, "unknown algorithm '" + val + "'");
        has_algorithm_name = true;
      } else if (key == "basis_kind") {
        a.basis_kind = parse_basis_kind(origin, line, val);
      } else if (key == "basis_size") {
        a.basis_size = static_cast<int>(integer());
      } else if (key == "krotov_alpha") {
        a.krotov_alpha = num();
      } else if (key == "superiterations") {
        a.superiterations = static_cast<int>(integer());
      } else if (key == "lbfgs_memory") {
        a.lbfgs_memory = static_cast<int>(integer());
      } else if (key == "linesearch") {
        if (val == "wolfe") a.linesearch = LineSearchSpec::Kind::StrongWolfe;
        else if (val == "armijo") a.linesearch = LineSearchSpec::Kind::Armijo;
        else fail(origin, line, "linesearch must be wolfe or armijo");
      } else if (key == "gradient_backend") {
        if (val == "adjoint") a.use_goat = false;
        else if (val == "goat") a.use_goat = true;
        else fail(origin, line, "gradient_backend must be adjoint or goat");
      } else if (key == "nm_simplex_scale_um") {
        a.nm_simplex_scale = num();
      } else {
        fail(origin, line, "unknown key '" + key + "' in [algorithm]");
      }
    } else if (section == "filter") {
      FilterConfig& f = cfg.filter;
      if (key == "kind") {
        if (val == "none") f.kind = FilterConfig::Kind::None;
        else if (val == "identity") f.kind = FilterConfig::Kind::Identity;
        else if (val == "exponential") f.kind = FilterConfig::Kind::Exponential;
        else if (val == "file") f.kind = FilterConfig::Kind::File;
        else fail(origin, line, "filter kind must be none|identity|exponential|file");
      } else if (key == "tau_c_ms") {
        f.tau_c_ms = num();
      } else if (key == "file") {
        f.file = val;
      } else {
        fail(origin, line, "unknown key '" + key + "' in [filter]");
      }
    } else if (section == "run") {
      RunConfig& r = cfg.run;
      if (key == "seeds") {
        r.seeds = parse_seed_list(origin, line, val);
        r.seeds_explicit = true;
      } else if (key == "max_evals") {
        r.max_evals = integer();
        r.max_evals_explicit = true;
      } else if (key == "init_basis_kind") {
        r.init_basis_kind = parse_basis_kind(origin, line, val);
      } else if (key == "init_basis_size") {
        r.init_basis_size = static_cast<int>(integer());
      } else if (key == "init_amplitude_um") {
        r.init_amplitude_um = num();
      } else if (key == "out_dir") {
        r.out_dir = val;
      } else {
        fail(origin, line, "unknown key '" + key + "' in [run]");
      }
    } else if (section == "sweep") {
      SweepSpec& sw = cfg.sweep;
      if (key == "axis") {
        if (val == "beta-scale") sw.axis = SweepAxis::BetaScale;
        else if (val == "potential-scale") sw.axis = SweepAxis::PotentialScale;
        else if (val == "basis-size") sw.axis = SweepAxis::BasisSize;
        else if (val == "krotov-step") sw.axis = SweepAxis::KrotovStep;
        else fail(origin, line, "unknown sweep axis '" + val + "'");
      } else if (key == "values") {
        sw.values.clear();
        for (const std::string& item : split_list(val))
          sw.values.push_back(parse_double(origin, line, key, item));
        if (sw.values.empty()) fail(origin, line, "sweep values: empty list");
      } else {
        fail(origin, line, "unknown key '" + key + "' in [sweep]");
      }
    }
  }

  if (!has_algorithm_name) throw ConfigError(origin + ": missing [algorithm] name");

  // Physical validation.
  const ProblemConfig& p = cfg.problem;
  auto require = [&](bool ok, const std::string& msg) {
    if (!ok) throw ConfigError(origin + ": " + msg);
  };
  require(p.mass > 0.0, "mass must be positive");
  require(p.t_ms > 0.0, "T_ms must be positive");
  require(p.n_time_slices >= 1, "n_time_slices must be >= 1");
  require(p.n_points >= 8 && (p.n_points & (p.n_points - 1)) == 0,
          "n_points must be a power of two >= 8");
  require(p.x_max_um > p.x_min_um, "x_max_um must exceed x_min_um");
  require(p.r0_um > 0.0, "r0_um must be positive");
  require(p.gamma_ms_per_um2 >= 0.0, "gamma must be non-negative");
  require(cfg.algorithm.basis_size >= 1, "basis_size must be >= 1");
  require(cfg.algorithm.superiterations >= 1, "superiterations must be >= 1");
  require(cfg.algorithm.lbfgs_memory >= 1, "lbfgs_memory must be >= 1");
  require(cfg.algorithm.krotov_alpha > 0.0, "krotov_alpha must be positive");
  require(cfg.run.max_evals >= 1, "max_evals must be >= 1");
  require(cfg.run.init_basis_size >= 1, "init_basis_size must be >= 1");
  require(!cfg.run.seeds.empty(), "seeds must be non-empty");
  require(cfg.filter.tau_c_ms > 0.0, "tau_c_ms must be positive");
  if (cfg.filter.kind == FilterConfig::Kind::File)
    require(!cfg.filter.file.empty(), "filter kind=file requires a file path");
  if (cfg.sweep.axis != SweepAxis::None)
    require(!cfg.sweep.values.empty(), "sweep axis set but no values given");
  for (double v : cfg.sweep.values)
    require(std::isfinite(v), "sweep values must be finite");
  if (cfg.sweep.axis == SweepAxis::BasisSize)
    for (double v : cfg.sweep.values)
      require(v >= 1.0 && v == std::floor(v), "basis-size sweep values must be integers >= 1");

  const bool coefficient_space = cfg.algorithm.kind == AlgorithmKind::Group ||
                                 cfg.algorithm.kind == AlgorithmKind::Dgroup ||
                                 cfg.algorithm.kind == AlgorithmKind::NmCrab ||
                                 cfg.algorithm.kind == AlgorithmKind::NmDcrab;
  if (coefficient_space) {
    require(cfg.algorithm.basis_kind == cfg.run.init_basis_kind,
            "coefficient-space algorithms must share the init basis kind "
            "(shared initial controls)");
    if (cfg.sweep.axis != SweepAxis::BasisSize)
      require(cfg.algorithm.basis_size >= cfg.run.init_basis_size,
              "basis_size must be >= init_basis_size (initial controls embed)");
    else
      for (double v : cfg.sweep.values)
        require(static_cast<int>(v) >= cfg.run.init_basis_size,
                "swept basis sizes must be >= init_basis_size");
  }
  if (cfg.algorithm.kind == AlgorithmKind::Krotov)
    require(cfg.filter.kind == FilterConfig::Kind::None,
            "krotov does not support a control filter");

  return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), path);
}

void apply_full_scale(ExperimentConfig& cfg) {
  if (!cfg.run.seeds_explicit) {
    cfg.run.seeds.clear();
    for (std::uint64_t s = 1; s <= 100; ++s) cfg.run.seeds.push_back(s);
  }
  if (!cfg.run.max_evals_explicit) cfg.run.max_evals = 2500;
}

std::string to_string(AlgorithmKind kind) {
  switch (kind) {
    case AlgorithmKind::Grape: return "grape";
    case AlgorithmKind::Group: return "group";
    case AlgorithmKind::Dgroup: return "dgroup";
    case AlgorithmKind::NmCrab: return "nm-crab";
    case AlgorithmKind::NmDcrab: return "nm-dcrab";
    case AlgorithmKind::Krotov: return "krotov";
  }
  return "?";
}

std::string to_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::None: return "none";
    case SweepAxis::BetaScale: return "beta-scale";
    case SweepAxis::PotentialScale: return "potential-scale";
    case SweepAxis::BasisSize: return "basis-size";
    case SweepAxis::KrotovStep: return "krotov-step";
  }
  return "?";
}

}  // namespace qoc
