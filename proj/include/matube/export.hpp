#pragma once

#include <ostream>

#include "matube/model.hpp"

namespace matube {

// Leaf trace: Ns x Nr grid over (s, r) in [0, s_max] x [0, r_max], CSV rows
//   s, r, Re z^1..Re z^n, Im z^1..Im z^n, u, ma_residual, status
// Rows with r >= R are marked tube_exceeded, not dropped; rows too close to
// the zero set for a Hessian stencil carry ma_residual = 0 and a status tag.
void trace_leaf_csv(const MAModel& model, const SpherePoint& p, int Ns, int Nr,
                    double s_max, double r_max, std::ostream& out);

// Grid of u over a window in the imaginary parts at a fixed real part:
//   x^1..x^n, y^1..y^n, u, min_eig_hc_u2, status
void grid_u_csv(const MAModel& model, const Vec& re_part, const Vec& y_lo,
                const Vec& y_hi, const std::vector<int>& res, std::ostream& out);

}  // namespace matube
