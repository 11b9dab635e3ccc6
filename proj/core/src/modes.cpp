#include "wgres/modes.hpp"

#include <cmath>
#include <stdexcept>

namespace wgres {

namespace {
constexpr double kPi = 3.141592653589793238462643383279502884;

void check_interval(double t, double eps, double d) {
  if (eps < 0 || t < 0 || t + eps > d)
    throw std::invalid_argument("aperture interval outside [0,d]");
}
}  // namespace

double mode_value(int n, double x, double d) {
  if (n < 1) throw std::invalid_argument("mode index must be >= 1");
  if (x < 0 || x > d) throw std::invalid_argument("x outside [0,d]");
  return std::sqrt(2.0 / d) * std::sin(n * kPi * x / d);
}

double gap_overlap(int n, int m, double t, double eps, double d) {
  if (n < 1 || m < 1) throw std::invalid_argument("mode index must be >= 1");
  check_interval(t, eps, d);
  if (eps == 0.0) return 0.0;
  const double mid = (2.0 * t + eps) / (2.0 * d);
  if (n == m) {
    return eps / d -
           (std::sin(2.0 * n * kPi * (t + eps) / d) -
            std::sin(2.0 * n * kPi * t / d)) /
               (2.0 * n * kPi);
  }
  const double dm = n - m, dp = n + m;
  return (2.0 / kPi) *
         (std::cos(dm * kPi * mid) * std::sin(dm * kPi * eps / (2.0 * d)) / dm -
          std::cos(dp * kPi * mid) * std::sin(dp * kPi * eps / (2.0 * d)) / dp);
}

double wall_overlap(int n, int m, double t, double eps, double d) {
  return (n == m ? 1.0 : 0.0) - gap_overlap(n, m, t, eps, d);
}

double gap_overlap_quadrature(int n, int m, double t, double eps, double d,
                              int n_points) {
  if (n_points < 2) throw std::invalid_argument("n_points must be >= 2");
  check_interval(t, eps, d);
  if (eps == 0.0) return 0.0;
  // 5-node Gauss-Legendre on [-1,1], exact through degree 9
  static const double xg[5] = {-0.9061798459386640, -0.5384693101056831, 0.0,
                               0.5384693101056831, 0.9061798459386640};
  static const double wg[5] = {0.2369268850561891, 0.4786286704993665,
                               0.5688888888888889, 0.4786286704993665,
                               0.2369268850561891};
  const int panels = (n_points + 4) / 5;
  const double w = eps / panels;
  double acc = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double a = t + p * w, c = a + 0.5 * w;
    double s = 0.0;
    for (int q = 0; q < 5; ++q) {
      const double x = c + 0.5 * w * xg[q];
      s += wg[q] * std::sin(n * kPi * x / d) * std::sin(m * kPi * x / d);
    }
    acc += 0.5 * w * s;
  }
  return (2.0 / d) * acc;
}

OverlapTable make_overlap_table(int N, double t, double eps, double d) {
  if (N < 1) throw std::invalid_argument("overlap table size must be >= 1");
  check_interval(t, eps, d);
  OverlapTable tab;
  tab.N = N;
  tab.t = t;
  tab.eps = eps;
  tab.d = d;
  tab.obar.resize(N, N);
  tab.wall.resize(N, N);
  for (int i = 0; i < N; ++i) {
    for (int j = 0; j <= i; ++j) {
      const double v = gap_overlap(i + 1, j + 1, t, eps, d);
      tab.obar(i, j) = v;
      tab.obar(j, i) = v;
      const double wv = (i == j ? 1.0 : 0.0) - v;
      tab.wall(i, j) = wv;
      tab.wall(j, i) = wv;
    }
  }
  return tab;
}

Overlaps make_overlaps(const Geometry& g, double eps, int N) {
  Overlaps o;
  o.dir2 = make_overlap_table(N, g.t, eps, g.d2);
  if (g.dimension == 3)
    o.dir3 = make_overlap_table(N, g.t3, g.a * eps, g.d3);
  return o;
}

}  // namespace wgres
