#include "dal/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace dal {
namespace {

// Distance between two already-normalized vectors with all arithmetic in T.
template <class T>
double unit_distance(const std::vector<T>& a, const std::vector<T>& b) {
  T acc = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const T d = a[i] - b[i];
    acc += d * d;
  }
  return static_cast<double>(std::sqrt(acc));
}

template <class T>
std::vector<T> normalized_as(const Vec& v) {
  T acc = 0;
  for (double x : v) {
    const T t = static_cast<T>(x);
    acc += t * t;
  }
  const T n = std::sqrt(acc);
  if (static_cast<double>(n) < kZeroNormEps) {
    raise(ErrorCode::ZeroVector, "cannot normalize vector with norm " +
                                     std::to_string(static_cast<double>(n)));
  }
  std::vector<T> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    out[i] = static_cast<T>(v[i]) / n;
  }
  return out;
}

template <class T>
DistanceRanking distance_row_t(const Vec& f, const std::vector<Vec>& anchors) {
  const auto fn = normalized_as<T>(f);
  DistanceRanking r;
  r.distances.resize(anchors.size());
  for (std::size_t i = 0; i < anchors.size(); ++i) {
    if (anchors[i].size() != f.size()) {
      raise(ErrorCode::DimensionMismatch,
            "anchor " + std::to_string(i) + " has dimension " +
                std::to_string(anchors[i].size()) + ", expected " +
                std::to_string(f.size()));
    }
    r.distances[i] = unit_distance(fn, normalized_as<T>(anchors[i]));
  }
  r.order.resize(anchors.size());
  std::iota(r.order.begin(), r.order.end(), std::size_t{0});
  std::sort(r.order.begin(), r.order.end(), [&](std::size_t a, std::size_t b) {
    if (r.distances[a] != r.distances[b]) return r.distances[a] < r.distances[b];
    return a < b;
  });
  r.rank1_index = r.order[0];
  r.rank1_distance = r.distances[r.rank1_index];
  return r;
}

}  // namespace

bool all_finite(const Vec& v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

double norm2(const Vec& v) {
  double acc = 0.0;
  for (double x : v) acc += x * x;
  return std::sqrt(acc);
}

Vec l2_normalize(const Vec& v) {
  const double n = norm2(v);
  if (n < kZeroNormEps) {
    raise(ErrorCode::ZeroVector,
          "cannot normalize vector with norm " + std::to_string(n));
  }
  Vec out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] / n;
  return out;
}

double pair_distance(const Vec& u, const Vec& v, Precision prec) {
  if (u.size() != v.size()) {
    raise(ErrorCode::DimensionMismatch,
          "pair_distance: " + std::to_string(u.size()) + " vs " +
              std::to_string(v.size()));
  }
  if (prec == Precision::f32) {
    return unit_distance(normalized_as<float>(u), normalized_as<float>(v));
  }
  return unit_distance(normalized_as<double>(u), normalized_as<double>(v));
}

DistanceRanking distance_row(const Vec& f, const std::vector<Vec>& anchors,
                             Precision prec) {
  if (anchors.empty()) {
    raise(ErrorCode::EmptyAnchorSet, "distance_row needs at least one anchor");
  }
  if (prec == Precision::f32) return distance_row_t<float>(f, anchors);
  return distance_row_t<double>(f, anchors);
}

}  // namespace dal
