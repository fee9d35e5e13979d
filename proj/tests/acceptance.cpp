// Acceptance gate: ten pass/fail checks with pinned tolerances, one printed
// line per check. Exits with the number of failed checks.

#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include "dal/eval.hpp"
#include "dal/trainer.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace dal;

namespace {

struct Outcome {
  bool pass = false;
  std::string label;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* format, ...) {
  char buf[512];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buf, sizeof(buf), format, args);
  va_end(args);
  return buf;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v[v.size() / 2];
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

Vec random_unit(Rng& rng, std::size_t dim) {
  while (true) {
    Vec v(dim);
    for (auto& x : v) x = rng.normal();
    if (norm2(v) >= 1e-6) return l2_normalize(v);
  }
}

// The training gradient differentiates the batch objective with the ranking
// selections and the per-camera mean targets pinned at the expansion point
// (the documented loss_gradient contract). This closure recomputes embeddings
// and distances from the head while holding exactly that structure fixed, so
// its central differences are the derivative the analytic path claims; the
// exclusion margins in the caller ensure the pinned structure also coincides
// with the live objective throughout the probed neighborhood.
struct PinnedFrame {
  std::size_t camera = 0;
  std::size_t source = 0;
  std::size_t rank1 = 0;
  bool own_first = false;
  double frozen_mean = 0.0;
};

double pinned_batch_loss(const EmbeddingHead& head, const std::vector<Vec>& raws,
                         const std::vector<PinnedFrame>& pins,
                         const AnchorBank& bank, double m, double lambda) {
  double total = 0.0;
  for (std::size_t i = 0; i < raws.size(); ++i) {
    const Vec f = forward(head, raws[i]);
    const PinnedFrame& pin = pins[i];
    const double d_pp = pair_distance(f, bank.intra[pin.camera][pin.source]);
    const double da_pp = pair_distance(f, bank.cross[pin.camera][pin.source]);
    const double neg = pin.own_first
                           ? pin.frozen_mean
                           : pair_distance(f, bank.intra[pin.camera][pin.rank1]);
    total += std::max(0.0, d_pp - neg + m) +
             lambda * std::max(0.0, da_pp - neg + m);
  }
  return total / static_cast<double>(raws.size());
}

// ----------------------------------------------------------------- check 1

Outcome check_substitution() {
  Outcome o;
  o.label = "scope-substitution";
  o.pass = true;
  o.detail =
      "absolute accuracy targets on licensed video benchmarks are out of scope "
      "(no CNN backbone, no pretrained weights); the property checks below "
      "stand in for them";
  return o;
}

// ----------------------------------------------------------------- check 2

Outcome check_gradients() {
  Outcome o;
  o.label = "gradient-correctness";
  const auto t0 = std::chrono::steady_clock::now();
  constexpr double kTol = 1e-4;          // max relative error allowed
  constexpr double kStep = 1e-5;         // central-difference step
  constexpr double kBoundary = 1e-3;     // branch-boundary exclusion margin
  constexpr std::size_t kConfigs = 120;  // valid configurations required
  constexpr double kMargin = 0.2;
  constexpr double kLambda = 1.0;

  Rng rng(2024);
  double worst = 0.0;
  std::size_t done = 0, attempts = 0, mean_branch = 0, push_branch = 0;
  const HeadKind kinds[3] = {HeadKind::Identity, HeadKind::Linear, HeadKind::OneHidden};

  while (done < kConfigs && attempts < 4000) {
    ++attempts;
    const HeadKind kind = kinds[attempts % 3];
    const std::size_t d_in = 3 + rng.index(4);
    const std::size_t d_out = kind == HeadKind::Identity ? d_in : 3 + rng.index(4);
    const std::size_t hidden = kind == HeadKind::OneHidden ? 3 + rng.index(4) : 0;
    EmbeddingHead head = make_head(kind, d_in, d_out, hidden, rng, HeadInit::uniform);

    // A two-camera bank with a few fused cross anchors so both hinge
    // positives (own intra anchor, own cross anchor) are distinct vectors.
    std::vector<std::vector<std::vector<Vec>>> grouped(2);
    for (std::size_t k = 0; k < 2; ++k) {
      const std::size_t n = 2 + rng.index(3);
      for (std::size_t t = 0; t < n; ++t) {
        Vec v(d_out);
        for (auto& x : v) x = rng.normal();
        grouped[k].push_back({v});
      }
    }
    AnchorBank bank = init_anchor_bank(grouped, 0.5);
    for (std::size_t k = 0; k < 2; ++k) {
      for (std::size_t i = 0; i < bank.n_anchors(k); ++i) {
        if (rng.uniform() < 0.5) continue;
        CyclicMatch match;
        match.query_camera = k;
        match.query_index = i;
        match.peer_camera = 1 - k;
        match.peer_index = rng.index(bank.n_anchors(1 - k));
        match.consistent = true;
        update_cross_anchor(bank, k, i, match);
      }
    }

    const std::size_t n_frames = 4 + rng.index(3);
    std::vector<Vec> raws(n_frames, Vec(d_in));
    std::vector<std::size_t> cameras(n_frames), sources(n_frames);
    for (std::size_t i = 0; i < n_frames; ++i) {
      for (auto& x : raws[i]) x = rng.normal();
      cameras[i] = rng.index(2);
      sources[i] = rng.index(bank.n_anchors(cameras[i]));
    }

    // Expansion point.
    std::vector<Vec> embeddings(n_frames);
    std::vector<FrameContext> frames(n_frames);
    bool degenerate = false;
    for (std::size_t i = 0; i < n_frames; ++i) {
      embeddings[i] = forward(head, raws[i]);
      if (norm2(embeddings[i]) < 1e-2) {
        degenerate = true;
        break;
      }
      frames[i].camera = cameras[i];
      frames[i].source_index = sources[i];
      frames[i].ranking =
          distance_row(embeddings[i], bank.intra[cameras[i]], Precision::f64);
    }
    if (degenerate) continue;
    const auto stats = batch_mean_rank1(frames);
    const LossBreakdown losses = batch_losses(embeddings, frames, bank, kMargin,
                                              kLambda, Mode::joint, Precision::f64);

    // Exclude configurations near any branch boundary: hinge activation
    // edges, rank-1 near-ties, vanishing distances, and rectifier units near
    // zero, where the objective is not differentiable and finite differences
    // would straddle the kink.
    bool near_boundary = false;
    for (std::size_t i = 0; i < n_frames && !near_boundary; ++i) {
      const FrameTerms& ft = losses.per_frame[i];
      const DistanceRanking& r = frames[i].ranking;
      if (std::abs(ft.d_pp - ft.d_neg + kMargin) < kBoundary) near_boundary = true;
      if (std::abs(ft.da_pp - ft.d_neg + kMargin) < kBoundary) near_boundary = true;
      if (ft.d_pp < kBoundary || ft.da_pp < kBoundary) near_boundary = true;
      if (!ft.own_is_rank1 && ft.d_neg < kBoundary) near_boundary = true;
      if (r.order.size() >= 2) {
        const double gap =
            r.distances[r.order[1]] - r.distances[r.order[0]];
        if (gap < kBoundary) near_boundary = true;
      }
    }
    if (kind == HeadKind::OneHidden) {
      // Pre-activations follow the documented flat layout: W1, b1, W2, b2.
      const double* W1 = head.params.data();
      const double* b1 = W1 + hidden * d_in;
      for (std::size_t i = 0; i < n_frames && !near_boundary; ++i) {
        for (std::size_t r = 0; r < hidden && !near_boundary; ++r) {
          double z = b1[r];
          for (std::size_t c = 0; c < d_in; ++c) z += W1[r * d_in + c] * raws[i][c];
          if (std::abs(z) < kBoundary) near_boundary = true;
        }
      }
    }
    if (near_boundary) continue;

    for (const FrameTerms& ft : losses.per_frame) {
      (ft.own_is_rank1 ? mean_branch : push_branch) += 1;
    }

    std::vector<PinnedFrame> pins(n_frames);
    for (std::size_t i = 0; i < n_frames; ++i) {
      pins[i].camera = cameras[i];
      pins[i].source = sources[i];
      pins[i].rank1 = frames[i].ranking.rank1_index;
      pins[i].own_first = losses.per_frame[i].own_is_rank1;
      pins[i].frozen_mean = mean_rank1_of(stats, cameras[i]);
    }

    const std::vector<Vec> grads = loss_gradient(embeddings, frames, bank, stats,
                                                 kMargin, kLambda, Mode::joint);

    if (kind == HeadKind::Identity) {
      // No parameters: check the input gradients coordinate by coordinate.
      for (std::size_t i = 0; i < n_frames; ++i) {
        for (std::size_t j = 0; j < d_in; ++j) {
          std::vector<Vec> probe = raws;
          probe[i][j] += kStep;
          const double up =
              pinned_batch_loss(head, probe, pins, bank, kMargin, kLambda);
          probe[i][j] -= 2.0 * kStep;
          const double down =
              pinned_batch_loss(head, probe, pins, bank, kMargin, kLambda);
          const double fd = (up - down) / (2.0 * kStep);
          const double denom =
              std::max({std::abs(fd), std::abs(grads[i][j]), 1e-3});
          worst = std::max(worst, std::abs(fd - grads[i][j]) / denom);
        }
      }
    } else {
      std::vector<double> param_grad(head.params.size(), 0.0);
      for (std::size_t i = 0; i < n_frames; ++i) {
        const BackwardResult br = backward(head, raws[i], grads[i]);
        for (std::size_t p = 0; p < param_grad.size(); ++p) {
          param_grad[p] += br.param_grad[p];
        }
      }
      const FdReport report = finite_diff_check(
          head,
          [&](const EmbeddingHead& h) {
            return pinned_batch_loss(h, raws, pins, bank, kMargin, kLambda);
          },
          param_grad, kStep);
      worst = std::max(worst, report.max_rel_error);
    }
    ++done;
  }

  const double secs = seconds_since(t0);
  o.pass = done >= kConfigs && worst < kTol && mean_branch >= 20 &&
           push_branch >= 20 && secs < 30.0;
  o.detail = fmt(
      "max rel err %.3g over %zu configs (tol %.0e, step %.0e; hinge branches "
      "hit %zu/%zu; %.2fs < 30s)",
      worst, done, kTol, kStep, mean_branch, push_branch, secs);
  return o;
}

// ----------------------------------------------------------------- check 3

Outcome check_ema_fixed_point() {
  Outcome o;
  o.label = "anchor-update-fixed-point";
  constexpr double kTol = 1e-6;
  constexpr int kSteps = 50;
  constexpr std::size_t kPairs = 120;
  // The update contracts at a rate that depends on the running norm of the
  // anchor; starts are drawn from the band where 50 steps provably suffice.
  constexpr double kNormLo = 0.2;
  constexpr double kNormHi = 1.5;

  Rng rng(31);
  double worst = 0.0;
  for (std::size_t p = 0; p < kPairs; ++p) {
    const std::size_t dim = 2 + rng.index(15);
    Vec x = random_unit(rng, dim);
    for (auto& v : x) v *= rng.uniform(kNormLo, kNormHi);
    Vec f = random_unit(rng, dim);
    for (auto& v : f) v *= rng.uniform(kNormLo, kNormHi);
    for (int s = 0; s < kSteps; ++s) x = ema_update(x, f, 0.5);
    const double gap = pair_distance(x, f, Precision::f64);
    worst = std::max(worst, gap);
  }
  o.pass = worst < kTol;
  o.detail = fmt("worst ||l2(x)-l2(f)|| = %.3g after %d steps over %zu pairs "
                 "(tol %.0e, start norms in [%.1f, %.1f])",
                 worst, kSteps, kPairs, kTol, kNormLo, kNormHi);
  return o;
}

// ----------------------------------------------------------------- check 4

std::vector<double> oracle_cmc(const std::vector<Vec>& q,
                               const std::vector<std::int64_t>& qid,
                               const std::vector<Vec>& g,
                               const std::vector<std::int64_t>& gid) {
  std::vector<double> cmc(g.size(), 0.0);
  for (std::size_t i = 0; i < q.size(); ++i) {
    const auto d = oracle::distance_table(q[i], g);
    const auto order = oracle::sort_order(d);
    for (std::size_t r = 0; r < order.size(); ++r) {
      if (gid[order[r]] == qid[i]) {
        for (std::size_t s = r; s < cmc.size(); ++s) cmc[s] += 1.0;
        break;
      }
    }
  }
  for (auto& c : cmc) c /= static_cast<double>(q.size());
  return cmc;
}

double oracle_map(const std::vector<Vec>& q, const std::vector<std::int64_t>& qid,
                  const std::vector<Vec>& g, const std::vector<std::int64_t>& gid) {
  double total = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    const auto d = oracle::distance_table(q[i], g);
    const auto order = oracle::sort_order(d);
    double hits = 0.0, ap = 0.0;
    for (std::size_t r = 0; r < order.size(); ++r) {
      if (gid[order[r]] == qid[i]) {
        hits += 1.0;
        ap += hits / static_cast<double>(r + 1);
      }
    }
    total += ap / hits;
  }
  return total / static_cast<double>(q.size());
}

Outcome check_ranking_oracles() {
  Outcome o;
  o.label = "ranking-oracle-equivalence";
  constexpr double kTol = 1e-12;
  Rng rng(47);
  std::size_t instances = 0;
  std::size_t index_mismatches = 0;
  double worst_value = 0.0;

  // distance_row against the long-hand table: indices exact, values close.
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t dim = 2 + rng.index(31);
    const std::size_t n = 2 + rng.index(49);
    std::vector<Vec> anchors(n, Vec(dim));
    for (auto& a : anchors) {
      for (auto& x : a) x = rng.normal();
    }
    if (trial % 4 == 0 && n >= 2) anchors[n - 1] = anchors[0];  // forced tie
    Vec f(dim);
    for (auto& x : f) x = rng.normal();
    if (norm2(f) < 1e-6) continue;

    const DistanceRanking got = distance_row(f, anchors, Precision::f64);
    const auto want = oracle::distance_table(f, anchors);
    const auto order = oracle::sort_order(want);
    if (got.order != order || got.rank1_index != order[0]) ++index_mismatches;
    for (std::size_t j = 0; j < n; ++j) {
      worst_value = std::max(worst_value, std::abs(got.distances[j] - want[j]));
    }
    ++instances;
  }

  // cyclic_rank against brute-force forward/backward nearest neighbors.
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t dim = 2 + rng.index(31);
    std::vector<std::vector<std::vector<Vec>>> grouped(2);
    for (std::size_t k = 0; k < 2; ++k) {
      const std::size_t n = 2 + rng.index(49);
      for (std::size_t t = 0; t < n; ++t) {
        Vec v(dim);
        for (auto& x : v) x = rng.normal();
        grouped[k].push_back({v});
      }
    }
    const AnchorBank bank = init_anchor_bank(grouped, 0.5);
    const std::size_t p = rng.index(bank.n_anchors(0));

    const CyclicMatch got = cyclic_rank(bank, 0, p, 1);
    const auto fwd = oracle::distance_table(bank.intra[0][p], bank.intra[1]);
    const std::size_t best_fwd = oracle::argmin(fwd);
    const auto bwd =
        oracle::distance_table(bank.intra[1][best_fwd], bank.intra[0]);
    const std::size_t best_bwd = oracle::argmin(bwd);
    if (got.peer_index != best_fwd || got.backward_index != best_bwd ||
        got.consistent != (best_bwd == p)) {
      ++index_mismatches;
    }
    worst_value =
        std::max(worst_value, std::abs(got.forward_distance - fwd[best_fwd]));
    worst_value =
        std::max(worst_value, std::abs(got.backward_distance - bwd[best_bwd]));
    ++instances;
  }

  // cmc_curve and mean_average_precision against the long-hand versions.
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t dim = 2 + rng.index(31);
    const std::size_t n_ids = 2 + rng.index(8);
    std::vector<Vec> queries, gallery;
    std::vector<std::int64_t> qid, gid;
    for (std::size_t i = 0; i < n_ids; ++i) {
      Vec q(dim);
      for (auto& x : q) x = rng.normal();
      queries.push_back(q);
      qid.push_back(static_cast<std::int64_t>(i));
      const std::size_t copies = 1 + rng.index(3);
      for (std::size_t c = 0; c < copies && gallery.size() < 50; ++c) {
        Vec g(dim);
        for (auto& x : g) x = rng.normal();
        gallery.push_back(g);
        gid.push_back(static_cast<std::int64_t>(i));
      }
    }
    if (trial % 2 == 0) {
      const auto got = cmc_curve(queries, qid, gallery, gid);
      const auto want = oracle_cmc(queries, qid, gallery, gid);
      for (std::size_t r = 0; r < got.size(); ++r) {
        worst_value = std::max(worst_value, std::abs(got[r] - want[r]));
      }
    } else {
      const double got = mean_average_precision(queries, qid, gallery, gid);
      worst_value =
          std::max(worst_value, std::abs(got - oracle_map(queries, qid, gallery, gid)));
    }
    ++instances;
  }

  o.pass = instances >= 200 && index_mismatches == 0 && worst_value <= kTol;
  o.detail = fmt("%zu instances, %zu index mismatches, worst value gap %.3g "
                 "(tol %.0e)",
                 instances, index_mismatches, worst_value, kTol);
  return o;
}

// ----------------------------------------------------------------- check 5

Outcome check_counterpart_reduction() {
  Outcome o;
  o.label = "unfused-counterpart-reduction";
  constexpr double kTol = 1e-9;
  Rng rng(59);
  double worst = 0.0;
  std::size_t batches = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t dim = 3 + rng.index(10);
    std::vector<std::vector<std::vector<Vec>>> grouped(2);
    for (std::size_t k = 0; k < 2; ++k) {
      const std::size_t n = 2 + rng.index(5);
      for (std::size_t t = 0; t < n; ++t) {
        Vec v(dim);
        for (auto& x : v) x = rng.normal();
        grouped[k].push_back({v});
      }
    }
    // Freshly initialized: every cross anchor still equals its intra anchor.
    const AnchorBank bank = init_anchor_bank(grouped, 0.5);

    const std::size_t n_frames = 6 + rng.index(5);
    std::vector<Vec> embeddings;
    std::vector<FrameContext> frames;
    for (std::size_t i = 0; i < n_frames; ++i) {
      Vec f(dim);
      for (auto& x : f) x = rng.normal();
      if (norm2(f) < 1e-6) continue;
      FrameContext ctx;
      ctx.camera = rng.index(2);
      ctx.source_index = rng.index(bank.n_anchors(ctx.camera));
      ctx.ranking = distance_row(f, bank.intra[ctx.camera], Precision::f64);
      embeddings.push_back(std::move(f));
      frames.push_back(std::move(ctx));
    }
    const LossBreakdown losses =
        batch_losses(embeddings, frames, bank, 0.2, 1.0, Mode::joint, Precision::f64);
    worst = std::max(worst, std::abs(losses.loss_c - losses.loss_i));
    worst = std::max(worst, std::abs(losses.loss_total - 2.0 * losses.loss_i));
    ++batches;
  }
  o.pass = batches >= 50 && worst <= kTol;
  o.detail = fmt("worst |loss_C - loss_I| and |total - 2 loss_I| = %.3g over "
                 "%zu batches (tol %.0e)",
                 worst, batches, kTol);
  return o;
}

// ----------------------------------------------------------------- check 6

Outcome check_noiseless_recovery() {
  Outcome o;
  o.label = "noiseless-recovery";
  const auto t0 = std::chrono::steady_clock::now();

  SyntheticConfig cfg;
  cfg.identities = 50;
  cfg.cameras = 2;
  cfg.dim = 32;
  cfg.distortion = 0.0;
  cfg.noise = 0.0;
  cfg.seed = 1;
  const Dataset ds = generate_synthetic(cfg);

  TrainOptions opt;
  opt.head_kind = HeadKind::Identity;
  opt.balanced_sampling = true;  // one round touches every tracklet once
  opt.batch = 64;
  opt.max_iter = 2;  // 2 x 64 draws >= 100 tracklets = one full round
  opt.cadence = 1;
  opt.seed = 3;
  const TrainResult result = train(ds, opt);

  const double assoc = result.metrics.back().assoc_rate;
  const double tmr = result.metrics.back().true_match_rate;
  const double secs = seconds_since(t0);
  o.pass = assoc == 1.0 && tmr == 1.0 && secs < 5.0;
  o.detail = fmt("association_rate %.17g, true_match_rate %.17g (exact 1.0 "
                 "required; %.2fs < 5s)",
                 assoc, tmr, secs);
  return o;
}

// ----------------------------------------------------------------- check 7

Outcome check_noisy_recovery() {
  Outcome o;
  o.label = "noisy-recovery";
  const auto t0 = std::chrono::steady_clock::now();
  // 90% of the measured matching ceiling: nearest-prototype matching on the
  // raw (undistorted) generator output scores 1.00 on this dataset family,
  // so the bar is 0.90 for both metrics.
  constexpr double kThreshold = 0.90;

  const Dataset ds = generate_synthetic(SyntheticConfig{});  // pinned defaults
  const TrainResult result = train(ds, TrainOptions{});      // pinned defaults
  const EvalReport report =
      evaluate(ds, result.checkpoint.head, &result.checkpoint.bank,
               result.checkpoint.iteration);

  const double tmr = report.true_match_rate ? *report.true_match_rate : 0.0;
  const double secs = seconds_since(t0);
  o.pass = tmr >= kThreshold && report.cmc[0] >= kThreshold && secs < 120.0;
  o.detail = fmt("true_match_rate %.4f, cmc[0] %.4f (thresholds %.2f; %.1fs "
                 "< 120s)",
                 tmr, report.cmc[0], kThreshold, secs);
  return o;
}

// ----------------------------------------------------------------- check 8

Outcome check_ablation_ordering() {
  Outcome o;
  o.label = "ablation-ordering";
  const std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};

  auto run_mode = [](std::uint64_t seed, Mode mode) {
    SyntheticConfig cfg;
    cfg.seed = seed;
    const Dataset ds = generate_synthetic(cfg);
    TrainOptions opt;
    opt.seed = seed;
    opt.mode = mode;
    const TrainResult r = train(ds, opt);
    return evaluate(ds, r.checkpoint.head, &r.checkpoint.bank,
                    r.checkpoint.iteration)
        .cmc[0];
  };

  std::vector<double> joint, c_only, i_only;
  for (std::uint64_t s : seeds) {
    joint.push_back(run_mode(s, Mode::joint));
    c_only.push_back(run_mode(s, Mode::C_only));
    i_only.push_back(run_mode(s, Mode::I_only));
  }
  const double mj = median(joint), mc = median(c_only), mi = median(i_only);
  o.pass = mj >= mc && mc >= mi;
  o.detail = fmt("median cmc[0]: joint %.3f >= C_only %.3f >= I_only %.3f "
                 "over %zu seeds",
                 mj, mc, mi, seeds.size());
  return o;
}

// ----------------------------------------------------------------- check 9

Outcome check_ranking_complexity() {
  Outcome o;
  o.label = "ranking-complexity";
  constexpr double kMaxRatio = 2.4;
  constexpr std::size_t kDim = 32;
  constexpr int kCalls = 1500;
  constexpr int kTrials = 9;

  Rng rng(71);
  auto make_anchors = [&](std::size_t n) {
    std::vector<Vec> anchors(n, Vec(kDim));
    for (auto& a : anchors) {
      for (auto& x : a) x = rng.normal();
    }
    return anchors;
  };
  const auto anchors_512 = make_anchors(512);
  const auto anchors_1024 = make_anchors(1024);
  std::vector<Vec> frames(64, Vec(kDim));
  for (auto& f : frames) {
    for (auto& x : f) x = rng.normal();
  }

  auto time_calls = [&](const std::vector<Vec>& anchors) {
    const auto t0 = std::chrono::steady_clock::now();
    for (int c = 0; c < kCalls; ++c) {
      const DistanceRanking r =
          distance_row(frames[c % frames.size()], anchors, Precision::f64);
      if (r.rank1_index >= anchors.size()) std::abort();  // keep the work live
    }
    return seconds_since(t0);
  };

  std::vector<double> ratios;
  for (int trial = 0; trial < kTrials; ++trial) {
    const double small = time_calls(anchors_512);
    const double large = time_calls(anchors_1024);
    ratios.push_back(large / small);
  }
  const double ratio = median(ratios);
  o.pass = ratio <= kMaxRatio;
  o.detail = fmt("median time ratio 512->1024 anchors = %.2f over %d trials "
                 "(limit %.1f)",
                 ratio, kTrials, kMaxRatio);
  return o;
}

// ---------------------------------------------------------------- check 10

Outcome check_determinism() {
  Outcome o;
  o.label = "determinism-and-persistence";
  const fs::path dir = fs::temp_directory_path() /
                       ("dal_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  const auto file = [&](const char* name) { return (dir / name).string(); };

  SyntheticConfig cfg;
  cfg.identities = 20;
  cfg.dim = 16;
  cfg.distortion = 0.4;
  cfg.noise = 0.08;
  cfg.seed = 6;
  const Dataset ds = generate_synthetic(cfg);

  TrainOptions opt;
  opt.max_iter = 400;
  opt.cadence = 50;
  opt.seed = 7;
  opt.precision = Precision::f64;

  const TrainResult a = train(ds, opt);
  const TrainResult b = train(ds, opt);
  write_metrics_csv(file("a.csv"), a.metrics);
  write_metrics_csv(file("b.csv"), b.metrics);
  save_checkpoint(file("a.dalc"), a.checkpoint);
  save_checkpoint(file("b.dalc"), b.checkpoint);
  const bool rerun_identical = slurp(file("a.csv")) == slurp(file("b.csv")) &&
                               slurp(file("a.dalc")) == slurp(file("b.dalc")) &&
                               !slurp(file("a.csv")).empty();

  TrainOptions halted = opt;
  halted.halt_iteration = 200;
  const TrainResult half = train(ds, halted);
  save_checkpoint(file("half.dalc"), half.checkpoint);
  const Checkpoint reloaded = load_checkpoint(file("half.dalc"));
  const bool roundtrip_exact = reloaded == half.checkpoint;
  const TrainResult rest = resume(ds, reloaded, opt);
  save_checkpoint(file("rest.dalc"), rest.checkpoint);
  const bool resume_identical = rest.checkpoint == a.checkpoint &&
                                slurp(file("rest.dalc")) == slurp(file("a.dalc"));

  std::error_code ec;
  fs::remove_all(dir, ec);

  o.pass = rerun_identical && roundtrip_exact && resume_identical;
  o.detail = fmt("rerun CSV+checkpoint byte-identical: %s; checkpoint "
                 "round-trip exact: %s; halted+resumed equals unbroken: %s",
                 rerun_identical ? "yes" : "no", roundtrip_exact ? "yes" : "no",
                 resume_identical ? "yes" : "no");
  return o;
}

}  // namespace

int main() {
  const std::vector<std::function<Outcome()>> checks = {
      check_substitution,       check_gradients,
      check_ema_fixed_point,    check_ranking_oracles,
      check_counterpart_reduction, check_noiseless_recovery,
      check_noisy_recovery,     check_ablation_ordering,
      check_ranking_complexity, check_determinism,
  };

  int failures = 0;
  for (std::size_t i = 0; i < checks.size(); ++i) {
    const Outcome o = checks[i]();
    if (!o.pass) ++failures;
    std::printf("[%s] %02zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1,
                o.label.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("acceptance: %zu of %zu checks passed\n", checks.size() - failures,
              checks.size());
  return failures;
}
