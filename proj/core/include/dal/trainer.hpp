#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dal/data.hpp"
#include "dal/eval.hpp"
#include "dal/model.hpp"
#include "dal/objective.hpp"

namespace dal {

// Everything a training run needs beyond the dataset. Zero-valued size
// fields mean "derive": d_out from the input dimension, decay_interval from
// max_iter / 2.
struct TrainOptions {
  // objective
  double margin = 0.2;
  double lambda = 1.0;
  Mode mode = Mode::joint;

  // anchors
  double eta = 0.5;

  // sampling
  std::size_t batch = 64;
  bool balanced_sampling = false;  // one frame per tracklet per round

  // schedule
  std::size_t max_iter = 2000;
  std::size_t halt_iteration = 0;  // stop early (resumable); 0 = run to max_iter
  std::size_t cadence = 100;       // iterations between metric rows
  std::uint64_t seed = 1;
  Precision precision = Precision::f32;  // training-time distance arithmetic

  // head
  HeadKind head_kind = HeadKind::Linear;
  HeadInit head_init = HeadInit::near_identity;
  std::size_t d_out = 0;
  std::size_t hidden = 64;

  // optimizer
  double learning_rate = 0.005;
  double decay_factor = 0.1;
  std::size_t decay_interval = 0;
  double momentum = 0.9;

  void validate() const;  // ConfigInvalid
};

// One metrics snapshot. Losses are those of the batch drawn at `iter` (nan
// for the pre-training row at iteration 0); true_match_rate is nan while no
// anchor is fused (undefined, not zero).
struct MetricsRow {
  std::uint64_t iter = 0;
  double loss_i = 0.0;
  double loss_c = 0.0;
  double loss_total = 0.0;
  double assoc_rate = 0.0;
  double true_match_rate = 0.0;
};

struct TrainResult {
  Checkpoint checkpoint;
  std::vector<MetricsRow> metrics;
};

// Run the full training loop from a fresh initialization: build the head,
// initialize anchors to per-tracklet embedding means, then per iteration
// sample a batch, embed it, rank it against its cameras' anchors, compute
// losses and embedding gradients against the frozen anchor state, apply the
// moving-average anchor updates, re-evaluate the cross-camera fusion of the
// touched tracklets, and take one SGD step.
TrainResult train(const Dataset& ds, const TrainOptions& options);

// Continue a halted run to options.max_iter, bit-exactly reproducing the
// unbroken trajectory. The metrics rows cover only the resumed portion.
TrainResult resume(const Dataset& ds, const Checkpoint& start,
                   const TrainOptions& options);

// CSV header `iter,loss_I,loss_C,loss_total,assoc_rate,true_match_rate`,
// values printed with %.17g so 64-bit runs round-trip bit-exactly; nan
// serializes as the literal `nan`.
void write_metrics_csv(const std::string& path, const std::vector<MetricsRow>& rows);
std::vector<MetricsRow> read_metrics_csv(const std::string& path);

}  // namespace dal
