#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace ricci2d {

inline constexpr double kTwoPi = 6.283185307179586476925286766559;
inline constexpr double kFourPi = 12.566370614359172953850573533118;

struct GridSpec {
  double zeta_min = -8.0;
  double zeta_split = 54.0;
  double zeta_max = 60.0;
  int n_zeta = 512;
  int n_theta = 1;
  double max_ratio = 1.2;

  bool operator==(const GridSpec&) const = default;
};

// Tensor grid in (zeta, theta) with zeta = log r. Zeta nodes are uniform on
// [zeta_min, zeta_split] and geometrically stretched beyond; theta is periodic
// with n_theta equispaced nodes (n_theta == 1 means radial symmetry).
class CylGrid {
 public:
  CylGrid() = default;

  static CylGrid stretched(const GridSpec& spec);
  // Uniform in zeta; zeta_split coincides with zeta_max.
  static CylGrid uniform(double zeta_min, double zeta_max, int n_zeta, int n_theta);
  static CylGrid from_nodes(std::vector<double> zeta, int n_theta, double zeta_split);

  std::size_t n_zeta() const { return zeta_.size(); }
  std::size_t n_theta() const { return n_theta_; }
  std::size_t size() const { return zeta_.size() * n_theta_; }
  bool radial() const { return n_theta_ == 1; }

  std::span<const double> zeta() const { return zeta_; }
  double zeta(std::size_t i) const { return zeta_[i]; }
  double zeta_min() const { return zeta_.front(); }
  double zeta_max() const { return zeta_.back(); }
  double zeta_split() const { return zeta_split_; }
  double stretch_ratio() const { return ratio_; }
  // Spacing between node i and i+1.
  double h(std::size_t i) const { return zeta_[i + 1] - zeta_[i]; }

  double dtheta() const { return kTwoPi / static_cast<double>(n_theta_); }
  double theta(std::size_t j) const { return dtheta() * static_cast<double>(j); }

  // Trapezoid weight of node i in zeta (half cells at both ends).
  double zeta_weight(std::size_t i) const;

  std::size_t index(std::size_t i, std::size_t j) const { return i * n_theta_ + j; }

  bool operator==(const CylGrid& o) const {
    return zeta_ == o.zeta_ && n_theta_ == o.n_theta_ && zeta_split_ == o.zeta_split_;
  }

 private:
  std::vector<double> zeta_;
  std::size_t n_theta_ = 1;
  double zeta_split_ = 0.0;
  double ratio_ = 1.0;
};

// Node values on a CylGrid, zeta-major (theta fastest).
class NodeField {
 public:
  NodeField() = default;
  NodeField(std::size_t n_zeta, std::size_t n_theta, double fill = 0.0)
      : nz_(n_zeta), nt_(n_theta), v_(n_zeta * n_theta, fill) {}
  explicit NodeField(const CylGrid& g, double fill = 0.0)
      : NodeField(g.n_zeta(), g.n_theta(), fill) {}

  std::size_t n_zeta() const { return nz_; }
  std::size_t n_theta() const { return nt_; }
  std::size_t size() const { return v_.size(); }
  bool empty() const { return v_.empty(); }

  double& operator()(std::size_t i, std::size_t j) { return v_[i * nt_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return v_[i * nt_ + j]; }
  double& operator[](std::size_t k) { return v_[k]; }
  double operator[](std::size_t k) const { return v_[k]; }

  std::span<double> values() { return v_; }
  std::span<const double> values() const { return v_; }
  std::span<const double> row(std::size_t i) const {
    return std::span<const double>(v_).subspan(i * nt_, nt_);
  }

  bool operator==(const NodeField&) const = default;

 private:
  std::size_t nz_ = 0;
  std::size_t nt_ = 0;
  std::vector<double> v_;
};

// w = log v with v = r^2 u.
using LogField = NodeField;

struct FlowState {
  CylGrid grid;
  LogField w;
  double t = 0.0;
  long step_index = 0;
  // Last accepted step and its increment w^{n+1} - w^n; empty before the first step.
  double last_dt = 0.0;
  NodeField increment;
};

}  // namespace ricci2d
