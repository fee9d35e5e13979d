#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "dal/linalg.hpp"
#include "dal/rng.hpp"

namespace dal {

enum class HeadKind { Identity, Linear, OneHidden };

// uniform: symmetric fan-based init, weights ~ U(-sqrt(6/(fan_in+fan_out)), +...).
// near_identity: rectangular identity plus 5% of the fan-based noise —
// starts the map close to a partial isometry so the raw feature geometry
// survives initialization (the role a pretrained backbone plays at scale).
enum class HeadInit { uniform, near_identity };

// Trainable map from raw feature to embedding. Parameters are one flat
// sequence: Linear stores W (d_out x d_in, row-major) then b (d_out);
// OneHidden stores W1 (hidden x d_in), b1 (hidden), W2 (d_out x hidden),
// b2 (d_out) with a max(0, .) rectifier between the layers.
struct EmbeddingHead {
  HeadKind kind = HeadKind::Identity;
  std::size_t d_in = 0;
  std::size_t d_out = 0;
  std::size_t hidden = 0;  // OneHidden only
  std::vector<double> params;

  std::size_t param_count() const { return params.size(); }
  bool operator==(const EmbeddingHead&) const = default;
};

EmbeddingHead make_head(HeadKind kind, std::size_t d_in, std::size_t d_out,
                        std::size_t hidden, Rng& rng,
                        HeadInit init = HeadInit::uniform);

Vec forward(const EmbeddingHead& head, const Vec& raw);

struct BackwardResult {
  std::vector<double> param_grad;  // same layout as head.params
  Vec input_grad;
};

// Chain-rule gradients of (upstream . forward) at `raw`. The rectifier takes
// the zero subgradient at 0.
BackwardResult backward(const EmbeddingHead& head, const Vec& raw, const Vec& upstream);

// SGD with momentum and a stepwise-multiplicative rate schedule:
// rate(t) = initial_rate * decay_factor^floor(t / decay_interval)
// (no decay when decay_interval == 0).
struct OptimizerState {
  double initial_rate = 0.005;
  double decay_factor = 0.1;
  std::size_t decay_interval = 0;
  double momentum = 0.9;
  std::vector<double> velocity;
  std::size_t iteration = 0;

  double rate_at(std::size_t t) const;
  bool operator==(const OptimizerState&) const = default;
};

// velocity = momentum * velocity + grads; params -= rate(t) * velocity.
// Raises NonFiniteGradient on any NaN/Inf gradient entry.
void sgd_step(OptimizerState& state, std::vector<double>& params,
              const std::vector<double>& grads);

struct FdReport {
  double max_rel_error = 0.0;
  std::size_t worst_coordinate = 0;
  double analytic_at_worst = 0.0;
  double numeric_at_worst = 0.0;
};

// Central finite differences of `loss` over the head's parameters, compared
// against the supplied analytic gradient. `coordinates` selects which
// parameters to probe (empty = all). Step is taken in 64-bit.
FdReport finite_diff_check(EmbeddingHead& head,
                           const std::function<double(const EmbeddingHead&)>& loss,
                           const std::vector<double>& analytic_grad,
                           double step = 1e-5,
                           const std::vector<std::size_t>& coordinates = {});

}  // namespace dal
