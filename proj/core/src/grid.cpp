#include "ricci2d/grid.hpp"

#include <cmath>
#include <string>

#include "ricci2d/errors.hpp"

namespace ricci2d {

namespace {

// Length covered by n geometric cells h*r, h*r^2, ..., h*r^n.
double geometric_length(double h, double r, int n) {
  double sum = 0.0;
  double step = h;
  for (int k = 0; k < n; ++k) {
    step *= r;
    sum += step;
  }
  return sum;
}

void check_theta(int n_theta) {
  if (n_theta < 1) throw ConfigError("grid.n_theta must be >= 1");
}

}  // namespace

CylGrid CylGrid::stretched(const GridSpec& s) {
  check_theta(s.n_theta);
  if (!(s.zeta_min < s.zeta_split && s.zeta_split < s.zeta_max))
    throw ConfigError("grid requires zeta_min < zeta_split < zeta_max");
  if (s.n_zeta < 8) throw ConfigError("grid.n_zeta must be >= 8");
  if (!(s.max_ratio > 1.0 && s.max_ratio <= 1.2))
    throw ConfigError("grid.max_ratio must lie in (1, 1.2]");

  const double inner = s.zeta_split - s.zeta_min;
  const double outer = s.zeta_max - s.zeta_split;
  for (int ns = 1; ns < s.n_zeta - 2; ++ns) {
    const int nu = s.n_zeta - 1 - ns;
    const double h = inner / nu;
    if (geometric_length(h, s.max_ratio, ns) < outer) continue;

    double lo = 1.0;
    double hi = s.max_ratio;
    if (geometric_length(h, lo, ns) >= outer) {
      // Even a uniform continuation overshoots; shrink to fit.
      hi = lo;
    } else {
      for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (geometric_length(h, mid, ns) < outer ? lo : hi) = mid;
      }
    }
    const double r = hi;
    CylGrid g;
    g.n_theta_ = static_cast<std::size_t>(s.n_theta);
    g.zeta_split_ = s.zeta_split;
    g.ratio_ = r;
    g.zeta_.resize(static_cast<std::size_t>(s.n_zeta));
    for (int i = 0; i <= nu; ++i) g.zeta_[i] = s.zeta_min + h * i;
    g.zeta_[nu] = s.zeta_split;
    const double scale = outer / geometric_length(h, r, ns);
    double step = h * scale;
    for (int k = 1; k <= ns; ++k) {
      step *= r;
      g.zeta_[nu + k] = g.zeta_[nu + k - 1] + step;
    }
    g.zeta_.back() = s.zeta_max;
    return g;
  }
  throw ConfigError("grid: n_zeta too small to reach zeta_max with ratio " +
                    std::to_string(s.max_ratio));
}

CylGrid CylGrid::uniform(double zeta_min, double zeta_max, int n_zeta, int n_theta) {
  check_theta(n_theta);
  if (!(zeta_min < zeta_max) || n_zeta < 3) throw ConfigError("invalid uniform grid");
  CylGrid g;
  g.n_theta_ = static_cast<std::size_t>(n_theta);
  g.zeta_.resize(static_cast<std::size_t>(n_zeta));
  const double h = (zeta_max - zeta_min) / (n_zeta - 1);
  for (int i = 0; i < n_zeta; ++i) g.zeta_[i] = zeta_min + h * i;
  g.zeta_.back() = zeta_max;
  g.zeta_split_ = zeta_max;
  return g;
}

CylGrid CylGrid::from_nodes(std::vector<double> zeta, int n_theta, double zeta_split) {
  check_theta(n_theta);
  if (zeta.size() < 3) throw ConfigError("grid needs at least 3 zeta nodes");
  for (std::size_t i = 1; i < zeta.size(); ++i)
    if (!(zeta[i] > zeta[i - 1])) throw ConfigError("zeta nodes must be increasing");
  CylGrid g;
  g.zeta_ = std::move(zeta);
  g.n_theta_ = static_cast<std::size_t>(n_theta);
  g.zeta_split_ = zeta_split;
  double r = 1.0;
  for (std::size_t i = 1; i + 1 < g.zeta_.size(); ++i) {
    const double q = g.h(i) / g.h(i - 1);
    if (q > r) r = q;
  }
  g.ratio_ = r;
  return g;
}

double CylGrid::zeta_weight(std::size_t i) const {
  const std::size_t n = zeta_.size();
  if (i == 0) return 0.5 * h(0);
  if (i == n - 1) return 0.5 * h(n - 2);
  return 0.5 * (h(i - 1) + h(i));
}

}  // namespace ricci2d
