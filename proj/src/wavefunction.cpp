#include "qoc/wavefunction.hpp"

#include <cmath>
#include <stdexcept>

namespace qoc {

double norm(const Wavefunction& psi) {
  double s = 0.0;
  for (const cplx& a : psi.amp) s += std::norm(a);
  return std::sqrt(s * psi.grid->dx());
}

void normalize(Wavefunction& psi) {
  const double nrm = norm(psi);
  if (nrm == 0.0) throw std::invalid_argument("normalize: zero wavefunction");
  const double inv = 1.0 / nrm;
  for (cplx& a : psi.amp) a *= inv;
}

cplx overlap(const Wavefunction& a, const Wavefunction& b) {
  if (!a.grid || !b.grid || !a.grid->same_as(*b.grid) || a.amp.size() != b.amp.size())
    throw std::invalid_argument("overlap: grid mismatch");
  cplx s = 0.0;
  for (std::size_t j = 0; j < a.amp.size(); ++j) s += std::conj(a.amp[j]) * b.amp[j];
  return s * a.grid->dx();
}

double fidelity(const Wavefunction& a, const Wavefunction& b) {
  return std::norm(overlap(a, b));
}

double centroid(const Wavefunction& psi) {
  const auto& x = psi.grid->x();
  double s = 0.0;
  for (std::size_t j = 0; j < psi.amp.size(); ++j) s += x[j] * std::norm(psi.amp[j]);
  return s * psi.grid->dx();
}

void project_odd(Wavefunction& psi) {
  const int n = psi.n();
  std::vector<cplx> out(n);
  for (int j = 0; j < n; ++j) {
    const int jm = (n - j) % n;
    out[j] = 0.5 * (psi.amp[j] - psi.amp[jm]);
  }
  psi.amp = std::move(out);
}

double edge_density(const Wavefunction& psi, int margin) {
  const int n = psi.n();
  double m = 0.0;
  for (int j = 0; j < margin; ++j) {
    m = std::max(m, std::abs(psi.amp[j]));
    m = std::max(m, std::abs(psi.amp[n - 1 - j]));
  }
  return m;
}

}  // namespace qoc
