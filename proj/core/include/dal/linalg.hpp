#pragma once

#include <cstddef>
#include <vector>

#include "dal/error.hpp"

namespace dal {

using Vec = std::vector<double>;

// Working precision of the distance kernels. Training defaults to f32 (all
// normalization and distance arithmetic passes through float); tests, metrics,
// and gradient math run f64.
enum class Precision { f32, f64 };

// Vectors with norm below this are rejected as degenerate (ZeroVector).
inline constexpr double kZeroNormEps = 1e-12;

bool all_finite(const Vec& v);
double norm2(const Vec& v);

// Unit-norm copy; direction preserved. ZeroVector if ||v|| < kZeroNormEps.
Vec l2_normalize(const Vec& v);

// Euclidean distance between the normalized inputs; symmetric, in [0, 2].
double pair_distance(const Vec& u, const Vec& v, Precision prec = Precision::f64);

struct DistanceRanking {
  std::vector<double> distances;   // per-anchor distance, original anchor order
  std::vector<std::size_t> order;  // anchor indices by ascending distance; ties -> lowest index
  std::size_t rank1_index = 0;
  double rank1_distance = 0.0;
};

// Distances from one vector to every anchor, plus the sorted ranking.
// O(N·d) for the distances, O(N log N) for the sort.
DistanceRanking distance_row(const Vec& f, const std::vector<Vec>& anchors,
                             Precision prec = Precision::f64);

}  // namespace dal
