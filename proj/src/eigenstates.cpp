#include "qoc/eigenstates.hpp"

#include <cmath>

#include "qoc/units.hpp"

namespace qoc {

namespace {

struct ItpWorkspace {
  GridPtr grid;
  TrapPotential pot;
  double beta;
  double mass;
  Fft fft;
  std::vector<double> decay_half;  // exp(-k^2 dtau / 4m) / n, rebuilt per dtau

  ItpWorkspace(GridPtr g, const TrapPotential& p, double beta_, double mass_)
      : grid(std::move(g)), pot(p), beta(beta_), mass(mass_), fft(grid->n()) {
    decay_half.resize(grid->n());
  }

  void set_dtau(double dtau) {
    const int n = grid->n();
    for (int j = 0; j < n; ++j) {
      const double k = grid->k()[j];
      decay_half[j] = std::exp(-k * k / (2.0 * mass) * dtau / 2.0) / n;
    }
  }

  void kinetic_half(std::vector<cplx>& f) {
    fft.forward(f.data());
    const int n = grid->n();
    for (int j = 0; j < n; ++j) f[j] *= decay_half[j];
    fft.inverse(f.data());
  }

  void step(Wavefunction& psi, double dtau, bool odd) {
    kinetic_half(psi.amp);
    const int n = grid->n();
    const auto& x = grid->x();
    for (int j = 0; j < n; ++j) {
      const double lam = (pot.value(x[j], 0.0) + beta * std::norm(psi.amp[j])) * dtau;
      psi.amp[j] *= std::exp(-lam);
    }
    kinetic_half(psi.amp);
    if (odd) project_odd(psi);
    normalize(psi);
  }

  // mu = <psi|H + beta|psi|^2|psi>, r = ||(H + beta|psi|^2)psi - mu psi||.
  std::pair<double, double> residual(const Wavefunction& psi) {
    const int n = grid->n();
    std::vector<cplx> h = psi.amp;
    fft.forward(h.data());
    for (int j = 0; j < n; ++j) {
      const double k = grid->k()[j];
      h[j] *= k * k / (2.0 * mass) / n;
    }
    fft.inverse(h.data());
    const auto& x = grid->x();
    for (int j = 0; j < n; ++j)
      h[j] += (pot.value(x[j], 0.0) + beta * std::norm(psi.amp[j])) * psi.amp[j];
    cplx mu_c = 0.0;
    for (int j = 0; j < n; ++j) mu_c += std::conj(psi.amp[j]) * h[j];
    const double mu = mu_c.real() * grid->dx();
    double r2 = 0.0;
    for (int j = 0; j < n; ++j) r2 += std::norm(h[j] - mu * psi.amp[j]);
    return {mu, std::sqrt(r2 * grid->dx())};
  }
};

EigenstateResult itp_solve(const GridPtr& grid, const TrapPotential& pot, double beta,
                           double mass, const ItpOptions& opts, bool odd) {
  ItpWorkspace ws(grid, pot, beta, mass);

  Wavefunction psi;
  psi.grid = grid;
  psi.amp.resize(grid->n());
  // Oscillator-length Gaussian seed (odd branch: times x).
  const double p2_eff = pot.p2 > 0.0 ? pot.p2 : 1.0;
  const double omega = std::sqrt(2.0 * p2_eff / mass);
  const double alpha = mass * omega;
  for (int j = 0; j < grid->n(); ++j) {
    const double x = grid->x()[j];
    const double g = std::exp(-0.5 * alpha * x * x);
    psi.amp[j] = odd ? x * g : g;
  }
  if (odd) project_odd(psi);
  normalize(psi);

  const double dtaus[] = {1e-3, 2.5e-4, 6e-5, 1.5e-5, 4e-6, 1e-6, 2.5e-7};
  long iters = 0;
  double mu = 0.0, res = 0.0;
  std::tie(mu, res) = ws.residual(psi);

  for (double dtau : dtaus) {
    ws.set_dtau(dtau);
    double prev = res;
    while (iters < opts.max_iterations) {
      for (int i = 0; i < opts.check_every && iters < opts.max_iterations; ++i, ++iters)
        ws.step(psi, dtau, odd);
      std::tie(mu, res) = ws.residual(psi);
      if (res < opts.tol) break;
      if (res > prev * 0.995) break;  // stalled at this step size's floor
      prev = res;
    }
    if (res < opts.tol || iters >= opts.max_iterations) break;
  }

  if (res >= opts.tol)
    throw std::runtime_error("imaginary-time propagation did not converge: residual " +
                             std::to_string(res) + " after " + std::to_string(iters) +
                             " iterations");
  if (edge_density(psi) > 1e-8)
    throw std::runtime_error("eigenstate reaches the grid edge; enlarge the box");

  return EigenstateResult{std::move(psi), mu, res, iters};
}

}  // namespace

EigenstateResult ground_state(const GridPtr& grid, const TrapPotential& pot, double beta,
                              double mass, const ItpOptions& opts) {
  return itp_solve(grid, pot, beta, mass, opts, /*odd=*/false);
}

EigenstateResult first_excited_state(const GridPtr& grid, const TrapPotential& pot, double beta,
                                     double mass, const ItpOptions& opts) {
  return itp_solve(grid, pot, beta, mass, opts, /*odd=*/true);
}

}  // namespace qoc
