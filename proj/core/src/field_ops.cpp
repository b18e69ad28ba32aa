#include "ricci2d/field_ops.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ricci2d/errors.hpp"

namespace ricci2d {

NodeField laplacian_c(const LogField& w, const CylGrid& g) {
  const std::size_t nz = g.n_zeta();
  const std::size_t nt = g.n_theta();
  NodeField out(g);
  const double inv_dth2 = 1.0 / (g.dtheta() * g.dtheta());
  for (std::size_t i = 1; i + 1 < nz; ++i) {
    const double hm = g.h(i - 1);
    const double hp = g.h(i);
    const double c = 2.0 / (hm + hp);
    for (std::size_t j = 0; j < nt; ++j) {
      const double wc = w(i, j);
      double lap = c * ((w(i + 1, j) - wc) / hp - (wc - w(i - 1, j)) / hm);
      if (nt > 1) {
        const std::size_t jp = (j + 1) % nt;
        const std::size_t jm = (j + nt - 1) % nt;
        lap += (w(i, jp) - 2.0 * wc + w(i, jm)) * inv_dth2;
      }
      out(i, j) = lap;
    }
  }
  return out;
}

double mass(const FlowState& s, TailClosure tail) {
  const CylGrid& g = s.grid;
  const double wth = g.radial() ? kTwoPi : g.dtheta();
  double total = 0.0;
  for (std::size_t i = 0; i < g.n_zeta(); ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < g.n_theta(); ++j) row += std::exp(s.w(i, j));
    total += g.zeta_weight(i) * wth * row;
  }
  if (tail == TailClosure::Cusp) total += kFourPi * s.t / g.zeta_max();
  return total;
}

NodeField curvature_from_laplacian(const FlowState& s) {
  NodeField r = laplacian_c(s.w, s.grid);
  for (std::size_t k = 0; k < r.size(); ++k) r[k] = -r[k] / std::exp(s.w[k]);
  return r;
}

NodeField curvature_field(const FlowState& s) {
  if (s.increment.empty() || !(s.last_dt > 0.0)) return curvature_from_laplacian(s);
  NodeField r(s.grid);
  for (std::size_t k = 0; k < r.size(); ++k)
    r[k] = std::expm1(-s.increment[k]) / s.last_dt;
  return r;
}

OriginValue u_at_origin(const FlowState& s) {
  const CylGrid& g = s.grid;
  double acc = 0.0;
  for (std::size_t j = 0; j < g.n_theta(); ++j) acc += std::exp(s.w(0, j) - 2.0 * g.zeta(0));
  return {acc / static_cast<double>(g.n_theta()), g.zeta_min() > -6.0};
}

std::size_t locate(const CylGrid& g, double zeta) {
  auto z = g.zeta();
  auto it = std::upper_bound(z.begin(), z.end(), zeta);
  std::size_t i = it == z.begin() ? 0 : static_cast<std::size_t>(it - z.begin()) - 1;
  return std::min(i, g.n_zeta() - 2);
}

double interp(const LogField& w, const CylGrid& g, double zeta, double theta) {
  if (!(zeta >= g.zeta_min() && zeta <= g.zeta_max()))
    throw RangeError("interp: zeta = " + std::to_string(zeta) + " outside [" +
                     std::to_string(g.zeta_min()) + ", " + std::to_string(g.zeta_max()) + "]");
  const std::size_t i = locate(g, zeta);
  const double s = (zeta - g.zeta(i)) / g.h(i);
  if (g.radial()) return (1.0 - s) * w(i, 0) + s * w(i + 1, 0);

  const std::size_t nt = g.n_theta();
  double q = theta / g.dtheta();
  q -= std::floor(q / static_cast<double>(nt)) * static_cast<double>(nt);
  std::size_t j0 = static_cast<std::size_t>(std::floor(q));
  double a = q - static_cast<double>(j0);
  if (j0 >= nt) {
    j0 = 0;
    a = 0.0;
  }
  const std::size_t j1 = (j0 + 1) % nt;
  const double lo = (1.0 - a) * w(i, j0) + a * w(i, j1);
  const double hi = (1.0 - a) * w(i + 1, j0) + a * w(i + 1, j1);
  return (1.0 - s) * lo + s * hi;
}

}  // namespace ricci2d
