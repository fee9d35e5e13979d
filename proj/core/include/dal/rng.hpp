#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace dal {

// Deterministic random source. Sampling helpers are hand-rolled on top of
// std::mt19937_64 because the standard <random> distributions are
// implementation-defined, and runs must reproduce bit-for-bit across
// toolchains. The full state (engine plus the cached Box-Muller spare)
// serializes textually for checkpoint resume.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform double in [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard Gaussian via Box-Muller; the second variate is cached.
  double normal();

  // Uniform index in [0, n); rejection sampling keeps it exactly uniform.
  std::size_t index(std::size_t n);

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[index(i)]);
    }
  }

  // Ordered uniform sample of k distinct values from [0, n); k <= n.
  std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k);

  std::string serialize() const;
  static Rng deserialize(const std::string& text);

  bool operator==(const Rng& other) const {
    return engine_ == other.engine_ && have_spare_ == other.have_spare_ &&
           (!have_spare_ || spare_ == other.spare_);
  }

 private:
  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace dal
