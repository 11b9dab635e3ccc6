#include "wgres/greens.hpp"

#include <cmath>

namespace wgres {

namespace {
constexpr cplx kI{0.0, 1.0};

// factorials up to 12!, enough for the series branches
constexpr double kFact[13] = {1,      1,       2,        6,        24,
                              120,    720,     5040,     40320,    362880,
                              3628800, 39916800, 479001600};
}  // namespace

SheetChoice sheet_assignment(double xi, const std::vector<double>& thresholds,
                             int re_delta_sign) {
  SheetChoice sc;
  sc.flags.reserve(thresholds.size());
  for (double c : thresholds) {
    Sheet s;
    if (c < xi)
      s = Sheet::continued;
    else if (c > xi)
      s = Sheet::physical;
    else
      s = (re_delta_sign > 0) ? Sheet::continued : Sheet::physical;
    sc.flags.push_back(s);
  }
  return sc;
}

cplx tau(cplx z, double c, Sheet sheet) {
  cplx p = std::sqrt(z - c);
  if (p.imag() < 0) p = -p;  // physical: Im >= 0, cut approached from above
  return sheet == Sheet::continued ? -p : p;
}

cplx green_wall(cplx z, double c, Sheet sheet, double d1) {
  const cplx tv = tau(z, c, sheet);
  if (std::abs(tv) * d1 < 1e-4) {
    // G = sum_{k>=1} (2 i d1)^k tau^(k-1) / (k! i)
    cplx acc = 0.0, pw = 1.0;
    const cplx b = 2.0 * kI * d1;
    cplx bk = b;
    for (int k = 1; k <= 9; ++k) {
      acc += bk * pw / (kFact[k] * kI);
      pw *= tv;
      bk *= b;
    }
    return acc;
  }
  const cplx e = std::exp(2.0 * kI * d1 * tv);
  return (e - 1.0) / (kI * tv);
}

cplx green_wall_dz(cplx z, double c, Sheet sheet, double d1) {
  const cplx tv = tau(z, c, sheet);
  if (std::abs(tv) * d1 < 1e-4) {
    // dG = sum_{k>=2} (2 i d1)^k (k-1) tau^(k-3) / (2 k! i); the k=2 term
    // carries the 1/tau threshold singularity
    const cplx b = 2.0 * kI * d1;
    cplx acc = 0.0, bk = b * b, pw = 1.0 / tv;
    for (int k = 2; k <= 10; ++k) {
      acc += bk * double(k - 1) * pw / (2.0 * kFact[k] * kI);
      pw *= tv;
      bk *= b;
    }
    return acc;
  }
  const cplx e = std::exp(2.0 * kI * d1 * tv);
  const cplx t2 = tv * tv;
  return d1 * e / t2 + kI * (e - 1.0) / (2.0 * t2 * tv);
}

cplx green_segment(cplx z, double c, Sheet sheet, double x1, double y1,
                   double d1) {
  const cplx tv = tau(z, c, sheet);
  const double s = x1 + y1, r = std::abs(x1 - y1);
  if (std::abs(tv) * (s > 1.0 ? s : 1.0) < 1e-4) {
    // sum_{k>=1} (i tau)^(k-1) (s^k - r^k) / k!
    cplx acc = 0.0, pw = 1.0;
    double sk = s, rk = r;
    for (int k = 1; k <= 9; ++k) {
      acc += pw * (sk - rk) / kFact[k];
      pw *= kI * tv;
      sk *= s;
      rk *= r;
    }
    return acc;
  }
  return (std::exp(kI * tv * s) - std::exp(kI * tv * r)) / (kI * tv);
}

}  // namespace wgres
