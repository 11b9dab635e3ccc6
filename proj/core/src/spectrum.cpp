#include "wgres/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace wgres {

namespace {
constexpr double kPi = 3.141592653589793238462643383279502884;
}

std::vector<EmbeddedLevel> enumerate_embedded(const Geometry& g, double e_max) {
  if (!(e_max > 0)) throw std::invalid_argument("e_max must be positive");
  struct Entry {
    double value;
    std::array<int, 3> idx;
  };
  std::vector<Entry> entries;
  const double b1 = (kPi / g.d1) * (kPi / g.d1);
  const double b2 = (kPi / g.d2) * (kPi / g.d2);
  if (g.dimension == 2) {
    const int l_max = (int)std::floor(std::sqrt(e_max / b1)) + 1;
    const int k_max = (int)std::floor(std::sqrt(e_max / b2)) + 1;
    for (int l = 1; l <= l_max; ++l)
      for (int k = 1; k <= k_max; ++k) {
        const double v = b1 * l * l + b2 * k * k;
        if (v <= e_max) entries.push_back({v, {l, k, 0}});
      }
  } else {
    const double b3 = (kPi / g.d3) * (kPi / g.d3);
    const int k1m = (int)std::floor(std::sqrt(e_max / b1)) + 1;
    const int k2m = (int)std::floor(std::sqrt(e_max / b2)) + 1;
    const int k3m = (int)std::floor(std::sqrt(e_max / b3)) + 1;
    for (int k1 = 1; k1 <= k1m; ++k1)
      for (int k2 = 1; k2 <= k2m; ++k2)
        for (int k3 = 1; k3 <= k3m; ++k3) {
          const double v = b1 * k1 * k1 + b2 * k2 * k2 + b3 * k3 * k3;
          if (v <= e_max) entries.push_back({v, {k1, k2, k3}});
        }
  }
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    if (a.value != b.value) return a.value < b.value;
    return a.idx < b.idx;
  });
  const double first_threshold =
      g.dimension == 2 ? b2 : b2 + (kPi / g.d3) * (kPi / g.d3);
  std::vector<EmbeddedLevel> levels;
  for (const Entry& e : entries) {
    if (!levels.empty() &&
        std::abs(e.value - levels.back().value) <= 1e-9 * levels.back().value) {
      levels.back().indices.push_back(e.idx);
      levels.back().multiplicity++;
    } else {
      EmbeddedLevel lv;
      lv.value = e.value;
      lv.indices = {e.idx};
      lv.multiplicity = 1;
      lv.above_threshold = e.value >= first_threshold;
      levels.push_back(std::move(lv));
    }
  }
  for (EmbeddedLevel& lv : levels)
    std::sort(lv.indices.begin(), lv.indices.end());
  return levels;
}

OpenChannels open_channels(const Geometry& g, double e) {
  OpenChannels oc;
  const double b2 = (kPi / g.d2) * (kPi / g.d2);
  if (g.dimension == 2) {
    for (int n = 1;; ++n) {
      const double c = b2 * n * n;
      if (std::abs(c - e) <= 1e-12 * std::abs(e)) {
        oc.threshold_coincidence = true;
        break;
      }
      if (c >= e) break;
      oc.indices.push_back({n, 0});
    }
  } else {
    const double b3 = (kPi / g.d3) * (kPi / g.d3);
    const int n2m = (int)std::floor(std::sqrt(e / b2)) + 1;
    const int n3m = (int)std::floor(std::sqrt(e / b3)) + 1;
    for (int n2 = 1; n2 <= n2m; ++n2)
      for (int n3 = 1; n3 <= n3m; ++n3) {
        const double c = b2 * n2 * n2 + b3 * n3 * n3;
        if (std::abs(c - e) <= 1e-12 * std::abs(e)) {
          oc.threshold_coincidence = true;
          continue;
        }
        if (c < e) oc.indices.push_back({n2, n3});
      }
  }
  return oc;
}

double threshold_clearance(const Geometry& g, double xi) {
  const double b2 = (kPi / g.d2) * (kPi / g.d2);
  double best = std::abs(xi - b2);
  if (g.dimension == 2) {
    for (int n = 1;; ++n) {
      const double c = b2 * n * n;
      best = std::min(best, std::abs(xi - c));
      if (c > xi && c - xi > best) break;
    }
  } else {
    const double b3 = (kPi / g.d3) * (kPi / g.d3);
    const int n2m = (int)std::floor(std::sqrt(std::max(xi, b2 * 4.0) / b2)) + 2;
    const int n3m = (int)std::floor(std::sqrt(std::max(xi, b3 * 4.0) / b3)) + 2;
    best = std::abs(xi - (b2 + b3));
    for (int n2 = 1; n2 <= n2m; ++n2)
      for (int n3 = 1; n3 <= n3m; ++n3)
        best = std::min(best, std::abs(xi - (b2 * n2 * n2 + b3 * n3 * n3)));
  }
  return best;
}

std::vector<double> transverse_thresholds(const Geometry& g, int n_max) {
  std::vector<double> cs;
  const double b2 = (kPi / g.d2) * (kPi / g.d2);
  if (g.dimension == 2) {
    cs.reserve(n_max);
    for (int n = 1; n <= n_max; ++n) cs.push_back(b2 * n * n);
  } else {
    const double b3 = (kPi / g.d3) * (kPi / g.d3);
    cs.reserve((size_t)n_max * n_max);
    for (int n2 = 1; n2 <= n_max; ++n2)
      for (int n3 = 1; n3 <= n_max; ++n3)
        cs.push_back(b2 * n2 * n2 + b3 * n3 * n3);
  }
  return cs;
}

}  // namespace wgres
