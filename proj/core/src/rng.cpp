#include "dal/rng.hpp"

#include <bit>
#include <cassert>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

namespace dal {

double Rng::normal() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  // u1 in (0, 1] so the log is finite.
  double u1 = 1.0 - uniform();
  double u2 = uniform();
  double r = std::sqrt(-2.0 * std::log(u1));
  double a = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(a);
  have_spare_ = true;
  return r * std::cos(a);
}

std::size_t Rng::index(std::size_t n) {
  assert(n > 0);
  const std::uint64_t range = static_cast<std::uint64_t>(n);
  // Accept draws below the largest multiple of `range`; each residue is then
  // equally likely.
  const std::uint64_t rem = std::uint64_t(-1) % range;
  const std::uint64_t bound = std::uint64_t(-1) - rem;
  std::uint64_t x;
  do {
    x = next_u64();
  } while (x >= bound);
  return static_cast<std::size_t>(x % range);
}

std::vector<std::size_t> Rng::sample_without_replacement(std::size_t n, std::size_t k) {
  assert(k <= n);
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  // Partial Fisher-Yates: the first k slots become the ordered sample.
  for (std::size_t i = 0; i < k; ++i) {
    std::swap(idx[i], idx[i + index(n - i)]);
  }
  idx.resize(k);
  return idx;
}

std::string Rng::serialize() const {
  std::ostringstream oss;
  oss << engine_ << '\n'
      << (have_spare_ ? 1 : 0) << ' ' << std::bit_cast<std::uint64_t>(spare_);
  return oss.str();
}

Rng Rng::deserialize(const std::string& text) {
  Rng out(0);
  std::istringstream iss(text);
  iss >> out.engine_;
  int flag = 0;
  std::uint64_t bits = 0;
  iss >> flag >> bits;
  out.have_spare_ = (flag != 0);
  out.spare_ = std::bit_cast<double>(bits);
  return out;
}

}  // namespace dal
