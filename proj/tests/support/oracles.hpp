#pragma once

// Independent brute-force re-implementations used to cross-check the library.
// Everything here is written long-hand (explicit loops, selection sort, no
// calls into dal:: beyond plain types) so a defect in the library cannot hide
// in a shared code path.

#include <cmath>
#include <cstddef>
#include <vector>

namespace oracle {

using Vec = std::vector<double>;

inline double norm(const Vec& v) {
  double s = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) s += v[i] * v[i];
  return std::sqrt(s);
}

inline Vec normalize(const Vec& v) {
  const double n = norm(v);
  Vec out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] / n;
  return out;
}

// ||l2(u) - l2(v)||, all in double, elementwise loop.
inline double distance(const Vec& u, const Vec& v) {
  const Vec a = normalize(u);
  const Vec b = normalize(v);
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

inline std::vector<double> distance_table(const Vec& f, const std::vector<Vec>& anchors) {
  std::vector<double> out(anchors.size());
  for (std::size_t i = 0; i < anchors.size(); ++i) out[i] = distance(f, anchors[i]);
  return out;
}

// Linear-scan argmin with lowest-index tie-break.
inline std::size_t argmin(const std::vector<double>& d) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < d.size(); ++i) {
    if (d[i] < d[best]) best = i;
  }
  return best;
}

// Selection sort producing the ascending-distance index order, ties by index.
inline std::vector<std::size_t> sort_order(const std::vector<double>& d) {
  std::vector<std::size_t> order;
  std::vector<bool> used(d.size(), false);
  for (std::size_t round = 0; round < d.size(); ++round) {
    std::size_t best = d.size();
    for (std::size_t i = 0; i < d.size(); ++i) {
      if (used[i]) continue;
      if (best == d.size() || d[i] < d[best]) best = i;
    }
    used[best] = true;
    order.push_back(best);
  }
  return order;
}

inline double mean(const std::vector<double>& xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

}  // namespace oracle
