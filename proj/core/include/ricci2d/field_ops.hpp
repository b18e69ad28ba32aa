#pragma once

#include "ricci2d/grid.hpp"

namespace ricci2d {

// Cylindrical Laplacian w_zz + w_thth on interior rows (3-point nonuniform in
// zeta, periodic 3-point in theta). Rows 0 and n_zeta-1 are left at zero.
NodeField laplacian_c(const LogField& w, const CylGrid& grid);

enum class TailClosure { Cusp, None };

// Total area of u dx = integral of e^w dzeta dtheta, trapezoid in zeta and
// periodic trapezoid in theta, plus 4 pi t / zeta_max for the cusp tail.
double mass(const FlowState& state, TailClosure tail = TailClosure::Cusp);

// Scalar curvature R = -Lap_c w / e^w. When the state carries the increment of
// an implicit step the identity R = (e^{-delta} - 1)/dt is used instead, which
// stays accurate where e^w underflows the Laplacian's roundoff.
NodeField curvature_field(const FlowState& state);

// Same, always from the Laplacian (interior rows; boundary rows are zero).
NodeField curvature_from_laplacian(const FlowState& state);

struct OriginValue {
  double value = 0.0;
  // Set when zeta_min > -6: the innermost row may not yet see the flat core.
  bool flagged = false;
};

// Theta-average of u = e^{w - 2 zeta} on the innermost row.
OriginValue u_at_origin(const FlowState& state);

// Bilinear interpolation of w, periodic in theta. Throws RangeError when zeta
// is outside the grid.
double interp(const LogField& w, const CylGrid& grid, double zeta, double theta);

// Row index i with zeta_i <= zeta <= zeta_{i+1} (clamped to valid cells).
std::size_t locate(const CylGrid& grid, double zeta);

}  // namespace ricci2d
