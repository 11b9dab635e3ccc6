#pragma once

#include <complex>
#include <vector>

namespace wgres {

using cplx = std::complex<double>;

// Longitudinal Green factors of the half-line with a Dirichlet end, with
// per-mode Riemann sheet selection for the threshold square roots.

enum class Sheet : unsigned char { physical, continued };

// One flag per transverse mode, in threshold order.
struct SheetChoice {
  std::vector<Sheet> flags;
};

// physical: Im tau > 0. continued: the branch reached by crossing the cut
// [c, inf) downward, tau = -(physical root). A mode with threshold c < xi is
// continued, c > xi physical; c == xi follows re_delta_sign (+1 continued,
// otherwise physical).
SheetChoice sheet_assignment(double xi, const std::vector<double>& thresholds,
                             int re_delta_sign);

// sqrt(z - c) on the chosen sheet. On the cut itself the physical value is
// the limit from above (Im z -> 0+).
cplx tau(cplx z, double c, Sheet sheet);

// G(z) = (exp(2 i d1 tau) - 1) / (i tau), series branch for |tau d1| < 1e-4.
cplx green_wall(cplx z, double c, Sheet sheet, double d1);

// dG/dz = d1 exp(2 i d1 tau)/tau^2 + i (exp(2 i d1 tau) - 1)/(2 tau^3),
// series branch near tau = 0. Singular like i d1^2/tau at the threshold
// itself, which the working disk never approaches.
cplx green_wall_dz(cplx z, double c, Sheet sheet, double d1);

// Two-point factor exp(i tau (x1+y1))/(i tau) - exp(i tau |x1-y1|)/(i tau).
cplx green_segment(cplx z, double c, Sheet sheet, double x1, double y1,
                   double d1);

}  // namespace wgres
