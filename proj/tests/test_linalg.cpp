#include "doctest.h"

#include <cmath>
#include <vector>

#include "dal/linalg.hpp"
#include "dal/rng.hpp"
#include "oracles.hpp"

using dal::DalError;
using dal::ErrorCode;
using dal::Precision;
using dal::Vec;

namespace {

Vec random_vec(dal::Rng& rng, std::size_t d, double lo = -2.0, double hi = 2.0) {
  Vec v(d);
  for (auto& x : v) x = rng.uniform(lo, hi);
  return v;
}

}  // namespace

TEST_CASE("l2_normalize pinned values") {
  CHECK(dal::l2_normalize({1.0, 0.0}) == Vec{1.0, 0.0});
  const Vec n = dal::l2_normalize({3.0, 4.0});
  CHECK(n[0] == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(n[1] == doctest::Approx(0.8).epsilon(1e-12));
  CHECK_THROWS_AS(dal::l2_normalize({0.0, 0.0}), DalError);
  try {
    dal::l2_normalize({0.0, 0.0});
  } catch (const DalError& e) {
    CHECK(e.code() == ErrorCode::ZeroVector);
  }
}

TEST_CASE("l2_normalize yields unit norm and is idempotent on random vectors") {
  dal::Rng rng(21);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t d = 1 + rng.index(48);
    Vec v = random_vec(rng, d);
    if (dal::norm2(v) < 1e-6) continue;
    const Vec n1 = dal::l2_normalize(v);
    CHECK(std::abs(dal::norm2(n1) - 1.0) < 1e-12);
    const Vec n2 = dal::l2_normalize(n1);
    for (std::size_t i = 0; i < d; ++i) {
      CHECK(std::abs(n1[i] - n2[i]) < 1e-12);
    }
  }
}

TEST_CASE("pair_distance pinned values") {
  const Vec u{0.6, 0.8};
  CHECK(dal::pair_distance(u, u) == 0.0);
  CHECK(dal::pair_distance({1.0, 0.0}, {0.0, 1.0}) ==
        doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
  CHECK(dal::pair_distance({1.0, 0.0}, {3.0, 4.0}) ==
        doctest::Approx(std::sqrt(0.8)).epsilon(1e-12));
  CHECK_THROWS_AS(dal::pair_distance({1.0}, {1.0, 2.0}), DalError);
}

TEST_CASE("pair_distance is symmetric, bounded, and satisfies the triangle inequality") {
  dal::Rng rng(22);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t d = 2 + rng.index(30);
    const Vec a = random_vec(rng, d), b = random_vec(rng, d), c = random_vec(rng, d);
    if (dal::norm2(a) < 1e-6 || dal::norm2(b) < 1e-6 || dal::norm2(c) < 1e-6) continue;
    const double ab = dal::pair_distance(a, b);
    const double ba = dal::pair_distance(b, a);
    const double ac = dal::pair_distance(a, c);
    const double cb = dal::pair_distance(c, b);
    CHECK(ab == ba);
    CHECK(ab >= 0.0);
    CHECK(ab <= 2.0);
    CHECK(ab <= ac + cb + 1e-12);
    CHECK(std::abs(ab - oracle::distance(a, b)) < 1e-12);
  }
}

TEST_CASE("distance_row pinned values and errors") {
  auto r = dal::distance_row({1.0, 0.0}, {{1.0, 0.0}, {0.0, 1.0}});
  CHECK(r.rank1_index == 0);
  CHECK(r.rank1_distance == 0.0);

  auto r2 = dal::distance_row({1.0, 0.0}, {{0.0, 1.0}, {1.0, 0.0}});
  CHECK(r2.rank1_index == 1);

  CHECK_THROWS_AS(dal::distance_row({1.0, 0.0}, {}), DalError);
  CHECK_THROWS_AS(dal::distance_row({1.0, 0.0}, {{1.0, 0.0, 0.0}}), DalError);
}

TEST_CASE("distance_row matches the brute-force oracle on 200 random instances") {
  dal::Rng rng(23);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t d = 16;
    const std::size_t n = 1 + rng.index(50);
    const Vec f = random_vec(rng, d);
    if (dal::norm2(f) < 1e-6) continue;
    std::vector<Vec> anchors;
    for (std::size_t i = 0; i < n; ++i) {
      Vec a = random_vec(rng, d);
      if (dal::norm2(a) < 1e-6) a[0] += 1.0;
      anchors.push_back(a);
    }
    const auto got = dal::distance_row(f, anchors);
    const auto want = oracle::distance_table(f, anchors);
    REQUIRE(got.distances.size() == want.size());
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(std::abs(got.distances[i] - want[i]) < 1e-12);
    }
    CHECK(got.rank1_index == oracle::argmin(want));
    const auto order = oracle::sort_order(want);
    for (std::size_t i = 0; i < n; ++i) CHECK(got.order[i] == order[i]);
    CHECK(got.distances[got.order[0]] == got.rank1_distance);
  }
}

TEST_CASE("duplicated anchors rank with the smaller index first") {
  const Vec f{0.3, 0.7, 0.1};
  const Vec a{1.0, 2.0, 3.0};
  auto r = dal::distance_row(f, {a, a, a});
  CHECK(r.rank1_index == 0);
  CHECK(r.order == std::vector<std::size_t>{0, 1, 2});
}

TEST_CASE("f32 path stays close to f64 and rejects zero vectors the same way") {
  dal::Rng rng(24);
  for (int trial = 0; trial < 100; ++trial) {
    const Vec a = random_vec(rng, 16), b = random_vec(rng, 16);
    if (dal::norm2(a) < 1e-3 || dal::norm2(b) < 1e-3) continue;
    const double d64 = dal::pair_distance(a, b, Precision::f64);
    const double d32 = dal::pair_distance(a, b, Precision::f32);
    CHECK(std::abs(d64 - d32) < 1e-5);
  }
  CHECK_THROWS_AS(dal::pair_distance({0.0, 0.0}, {1.0, 0.0}, Precision::f32), DalError);
}
