#include "dal/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace dal {
namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

void check(bool ok, const char* message) {
  if (!ok) raise(ErrorCode::ConfigInvalid, message);
}

struct LoopState {
  EmbeddingHead head;
  OptimizerState optimizer;
  AnchorBank bank;
  Rng rng{0};
  BalancedSampler sampler;
  bool balanced = false;
  std::uint64_t iteration = 0;
};

MetricsRow snapshot(std::uint64_t iter, const LossBreakdown* losses,
                    const AnchorBank& bank, const Dataset& ds) {
  MetricsRow row;
  row.iter = iter;
  row.loss_i = losses ? losses->loss_i : kNan;
  row.loss_c = losses ? losses->loss_c : kNan;
  row.loss_total = losses ? losses->loss_total : kNan;
  row.assoc_rate = association_rate(bank);
  row.true_match_rate = kNan;
  if (ds.has_labels) {
    try {
      row.true_match_rate = true_match_rate(bank, ds.identity_of);
    } catch (const DalError& e) {
      if (e.code() != ErrorCode::NoMergedAnchors) throw;
    }
  }
  return row;
}

void run_loop(const Dataset& ds, const TrainOptions& opt, LoopState& s,
              std::vector<MetricsRow>& metrics) {
  const std::uint64_t stop =
      (opt.halt_iteration > 0 && opt.halt_iteration < opt.max_iter)
          ? opt.halt_iteration
          : opt.max_iter;

  while (s.iteration < stop) {
    // 1. Sample a mini-batch of frames.
    const std::vector<std::size_t> batch =
        s.balanced ? s.sampler.next(s.rng, ds, opt.batch)
                   : sample_batch(s.rng, ds, opt.batch);

    // 2. Embed; frames whose embedding has no direction cannot be ranked
    //    and drop out of this iteration.
    std::vector<std::size_t> rows;
    std::vector<Vec> embeddings;
    rows.reserve(batch.size());
    embeddings.reserve(batch.size());
    for (std::size_t row : batch) {
      Vec f = forward(s.head, ds.frames[row].feature);
      if (norm2(f) < kZeroNormEps) continue;
      rows.push_back(row);
      embeddings.push_back(std::move(f));
    }

    LossBreakdown losses;
    std::vector<double> param_grad(s.head.params.size(), 0.0);
    if (!embeddings.empty()) {
      // 3. Rank each frame within its own camera's intra anchors.
      std::vector<FrameContext> frames(embeddings.size());
      for (std::size_t i = 0; i < embeddings.size(); ++i) {
        const FrameRecord& rec = ds.frames[rows[i]];
        frames[i].camera = rec.camera_id;
        frames[i].source_index = rec.tracklet_index;
        frames[i].ranking =
            distance_row(embeddings[i], s.bank.intra[rec.camera_id], opt.precision);
      }
      const std::vector<BatchCameraStats> stats = batch_mean_rank1(frames);

      // 4. Losses and embedding gradients against the frozen anchor state.
      losses = batch_losses(embeddings, frames, s.bank, opt.margin, opt.lambda,
                            opt.mode, opt.precision);
      const std::vector<Vec> grads = loss_gradient(embeddings, frames, s.bank, stats,
                                                   opt.margin, opt.lambda, opt.mode);
      for (std::size_t i = 0; i < embeddings.size(); ++i) {
        const BackwardResult br =
            backward(s.head, ds.frames[rows[i]].feature, grads[i]);
        for (std::size_t p = 0; p < param_grad.size(); ++p) {
          param_grad[p] += br.param_grad[p];
        }
      }

      // 5. Moving-average updates for the touched intra anchors, applied
      //    sequentially in batch order.
      for (std::size_t i = 0; i < embeddings.size(); ++i) {
        const FrameRecord& rec = ds.frames[rows[i]];
        Vec& anchor = s.bank.intra[rec.camera_id][rec.tracklet_index];
        anchor = ema_update(anchor, embeddings[i], opt.eta);
      }

      // 6. Re-test the cross-camera fusion of every touched tracklet, in
      //    ascending (camera, tracklet) order.
      std::set<std::pair<std::size_t, std::size_t>> touched;
      for (std::size_t row : rows) {
        touched.emplace(ds.frames[row].camera_id, ds.frames[row].tracklet_index);
      }
      for (const auto& [cam, trk] : touched) {
        const CyclicMatch match = best_cyclic_match(s.bank, cam, trk, opt.precision);
        update_cross_anchor(s.bank, cam, trk, match);
      }
    }

    // 7. One optimizer step on the head parameters.
    sgd_step(s.optimizer, s.head.params, param_grad);
    ++s.iteration;

    if (s.iteration % opt.cadence == 0 || s.iteration == stop) {
      metrics.push_back(snapshot(s.iteration,
                                 embeddings.empty() ? nullptr : &losses, s.bank, ds));
    }
  }
}

TrainResult finish(const TrainOptions& opt, LoopState& s,
                   std::vector<MetricsRow> metrics) {
  TrainResult out;
  out.checkpoint.iteration = s.iteration;
  out.checkpoint.head = std::move(s.head);
  out.checkpoint.optimizer = std::move(s.optimizer);
  out.checkpoint.bank = std::move(s.bank);
  out.checkpoint.rng_state = s.rng.serialize();
  out.checkpoint.sampler_state = s.balanced ? s.sampler.serialize() : std::string();
  out.metrics = std::move(metrics);
  (void)opt;
  return out;
}

}  // namespace

void TrainOptions::validate() const {
  check(margin > 0.0, "margin must be > 0");
  check(lambda >= 0.0, "lambda must be >= 0");
  check(eta > 0.0 && eta <= 1.0, "eta must lie in (0, 1]");
  check(batch >= 1, "batch must be >= 1");
  check(cadence >= 1, "cadence must be >= 1");
  check(halt_iteration <= max_iter, "halt_iteration cannot exceed max_iter");
  check(learning_rate > 0.0, "learning_rate must be > 0");
  check(decay_factor > 0.0 && decay_factor <= 1.0, "decay_factor must lie in (0, 1]");
  check(momentum >= 0.0 && momentum < 1.0, "momentum must lie in [0, 1)");
  check(head_kind != HeadKind::OneHidden || hidden >= 1,
        "hidden must be >= 1 for the one-hidden-layer head");
}

TrainResult train(const Dataset& ds, const TrainOptions& options) {
  options.validate();
  ds.validate_for_training();

  LoopState s;
  s.rng = Rng(options.seed);
  const std::size_t d_out =
      options.head_kind == HeadKind::Identity
          ? ds.dim
          : (options.d_out > 0 ? options.d_out : ds.dim);
  const std::size_t hidden =
      options.head_kind == HeadKind::OneHidden ? options.hidden : 0;
  s.head = make_head(options.head_kind, ds.dim, d_out, hidden, s.rng,
                     options.head_init);

  // Anchors start at the per-tracklet means of the initial embeddings.
  std::vector<std::vector<std::vector<Vec>>> grouped(ds.cameras);
  for (std::size_t k = 0; k < ds.cameras; ++k) {
    grouped[k].resize(ds.tracklets_per_camera[k]);
    for (std::size_t t = 0; t < ds.tracklets_per_camera[k]; ++t) {
      for (std::size_t row : ds.frames_by_tracklet[k][t]) {
        grouped[k][t].push_back(forward(s.head, ds.frames[row].feature));
      }
    }
  }
  s.bank = init_anchor_bank(grouped, options.eta);

  s.optimizer.initial_rate = options.learning_rate;
  s.optimizer.decay_factor = options.decay_factor;
  s.optimizer.decay_interval =
      options.decay_interval > 0 ? options.decay_interval : options.max_iter / 2;
  s.optimizer.momentum = options.momentum;
  s.optimizer.velocity.assign(s.head.params.size(), 0.0);
  s.optimizer.iteration = 0;

  s.balanced = options.balanced_sampling;
  if (s.balanced) s.sampler = BalancedSampler(ds);

  std::vector<MetricsRow> metrics;
  metrics.push_back(snapshot(0, nullptr, s.bank, ds));
  run_loop(ds, options, s, metrics);
  return finish(options, s, std::move(metrics));
}

TrainResult resume(const Dataset& ds, const Checkpoint& start,
                   const TrainOptions& options) {
  options.validate();
  ds.validate_for_training();
  if (start.head.d_in != ds.dim) {
    raise(ErrorCode::DimensionMismatch,
          "checkpoint expects inputs of dimension " + std::to_string(start.head.d_in) +
              ", dataset has " + std::to_string(ds.dim));
  }
  if (start.iteration > options.max_iter) {
    raise(ErrorCode::ConfigInvalid,
          "checkpoint is already past max_iter (" + std::to_string(start.iteration) +
              " > " + std::to_string(options.max_iter) + ")");
  }

  LoopState s;
  s.head = start.head;
  s.optimizer = start.optimizer;
  s.bank = start.bank;
  s.rng = Rng::deserialize(start.rng_state);
  s.balanced = !start.sampler_state.empty();
  if (s.balanced) s.sampler = BalancedSampler::deserialize(start.sampler_state);
  s.iteration = start.iteration;

  std::vector<MetricsRow> metrics;
  run_loop(ds, options, s, metrics);
  return finish(options, s, std::move(metrics));
}

void write_metrics_csv(const std::string& path, const std::vector<MetricsRow>& rows) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) raise(ErrorCode::IoFailure, "cannot open " + path + " for writing");
  out << "iter,loss_I,loss_C,loss_total,assoc_rate,true_match_rate\n";
  char buf[64];
  auto emit = [&](double v) {
    if (std::isnan(v)) {
      out << "nan";
    } else {
      std::snprintf(buf, sizeof(buf), "%.17g", v);
      out << buf;
    }
  };
  for (const auto& r : rows) {
    out << r.iter << ',';
    emit(r.loss_i);
    out << ',';
    emit(r.loss_c);
    out << ',';
    emit(r.loss_total);
    out << ',';
    emit(r.assoc_rate);
    out << ',';
    emit(r.true_match_rate);
    out << '\n';
  }
  if (!out) raise(ErrorCode::IoFailure, "short write to " + path);
}

std::vector<MetricsRow> read_metrics_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) raise(ErrorCode::IoFailure, "cannot open " + path + " for reading");
  std::string line;
  if (!std::getline(in, line) ||
      (line != "iter,loss_I,loss_C,loss_total,assoc_rate,true_match_rate" &&
       line != "iter,loss_I,loss_C,loss_total,assoc_rate,true_match_rate\r")) {
    raise(ErrorCode::IoFailure, "unrecognized metrics header in " + path);
  }
  std::vector<MetricsRow> rows;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    std::istringstream ss(line);
    std::string field;
    MetricsRow r;
    auto next = [&]() -> std::string {
      if (!std::getline(ss, field, ',')) {
        raise(ErrorCode::IoFailure, "short metrics row in " + path);
      }
      if (!field.empty() && field.back() == '\r') field.pop_back();
      return field;
    };
    r.iter = std::stoull(next());
    r.loss_i = std::strtod(next().c_str(), nullptr);
    r.loss_c = std::strtod(next().c_str(), nullptr);
    r.loss_total = std::strtod(next().c_str(), nullptr);
    r.assoc_rate = std::strtod(next().c_str(), nullptr);
    r.true_match_rate = std::strtod(next().c_str(), nullptr);
    rows.push_back(r);
  }
  return rows;
}

}  // namespace dal
