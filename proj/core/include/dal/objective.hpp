#pragma once

#include <cstddef>
#include <vector>

#include "dal/anchors.hpp"
#include "dal/linalg.hpp"

namespace dal {

// Which loss terms enter the objective. joint trains both; the other two are
// the single-loss configurations used by the ablation study.
enum class Mode { joint, I_only, C_only };

// One batch frame's view of its own camera's intra-anchor ranking.
struct FrameContext {
  std::size_t camera = 0;
  std::size_t source_index = 0;  // the frame's own tracklet == anchor index
  DistanceRanking ranking;       // against that camera's intra anchors
};

// Per-camera mean of in-batch rank-1 distances: the "average nearest anchor"
// pull target used when a frame's own anchor already ranks first.
struct BatchCameraStats {
  std::size_t camera = 0;
  std::size_t count = 0;
  double mean_rank1 = 0.0;
};

std::vector<BatchCameraStats> batch_mean_rank1(const std::vector<FrameContext>& frames);

// Lookup helper; the camera must be present (every batch frame's camera is).
double mean_rank1_of(const std::vector<BatchCameraStats>& stats, std::size_t camera);

// Intra-camera hinge for one frame. If some other anchor t ranks first the
// own-anchor distance is pushed below it by margin m; if the own anchor ranks
// first it is pushed below the camera's in-batch mean rank-1 distance.
double intra_loss(const FrameContext& frame, double mean_rank1, double m);

// Cross-camera hinge: same negative term as intra_loss, but the positive term
// is the distance to the frame's cross anchor instead of its intra anchor.
double cross_loss(double da_pp, const FrameContext& frame, double mean_rank1, double m);

double total_loss(double loss_i, double loss_c, double lambda);

// Per-frame audit values for one batch computation.
struct FrameTerms {
  double d_pp = 0.0;    // distance to own intra anchor
  double d_neg = 0.0;   // negative term (rank-1 distance or camera mean)
  double da_pp = 0.0;   // distance to own cross anchor
  bool own_is_rank1 = false;
  double intra_value = 0.0;
  double cross_value = 0.0;
};

struct LossBreakdown {
  double loss_i = 0.0;      // batch mean of per-frame intra hinges
  double loss_c = 0.0;      // batch mean of per-frame cross hinges
  double loss_total = 0.0;  // mode-weighted combination
  double margin = 0.0;
  double lambda = 0.0;
  std::vector<FrameTerms> per_frame;
};

// Batch-mean losses for raw embeddings against a frozen bank. Distances use
// the requested precision; rankings in `frames` must have been computed
// against the same bank state.
LossBreakdown batch_losses(const std::vector<Vec>& embeddings,
                           const std::vector<FrameContext>& frames,
                           const AnchorBank& bank, double m, double lambda,
                           Mode mode, Precision prec = Precision::f64);

// d/df of ||l2(f) - c|| for a constant unit vector c. Returns the zero
// subgradient when f is degenerate or the distance vanishes.
Vec distance_gradient(const Vec& f, const Vec& c_unit);

// Gradient of the batch-level objective (mean over frames, mode-weighted)
// with respect to each raw frame embedding. Anchors, rank-1 selections, and
// the per-camera mean terms are held constant; only the distances from each
// embedding to its fixed anchor directions are differentiated. Distance
// arithmetic runs in 64-bit regardless of the ranking precision.
std::vector<Vec> loss_gradient(const std::vector<Vec>& embeddings,
                               const std::vector<FrameContext>& frames,
                               const AnchorBank& bank,
                               const std::vector<BatchCameraStats>& stats,
                               double m, double lambda, Mode mode);

}  // namespace dal
