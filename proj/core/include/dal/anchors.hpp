#pragma once

#include <cstddef>
#include <vector>

#include "dal/linalg.hpp"

namespace dal {

// Whether a cross-camera anchor is currently fused with a peer tracklet's
// intra-camera anchor, and if so which one.
struct MergeState {
  bool merged = false;
  std::size_t peer_camera = 0;
  std::size_t peer_index = 0;

  bool operator==(const MergeState&) const = default;
};

// Per-camera banks of intra-camera anchors (one per tracklet) and their
// cross-camera counterparts. Anchors are stored raw — the moving-average
// update subtracts normalized quantities from the raw vector, so storage
// drifts toward a positive multiple of the tracked direction; normalization
// happens at every point of use.
struct AnchorBank {
  std::size_t dim = 0;
  double eta = 0.5;  // moving-average update rate, in (0, 1]
  std::vector<std::vector<Vec>> intra;         // [camera][tracklet]
  std::vector<std::vector<Vec>> cross;         // [camera][tracklet]
  std::vector<std::vector<MergeState>> merge;  // [camera][tracklet]

  std::size_t n_cameras() const { return intra.size(); }
  std::size_t n_anchors(std::size_t camera) const { return intra[camera].size(); }
  std::size_t total_anchors() const;
  bool operator==(const AnchorBank&) const = default;
};

// Build a bank from per-tracklet frame embeddings: each intra anchor is the
// arithmetic mean of its tracklet's frames, each cross anchor starts equal to
// its intra counterpart, and everything starts unfused.
// frames[camera][tracklet] is a non-empty list of embeddings.
AnchorBank init_anchor_bank(const std::vector<std::vector<std::vector<Vec>>>& frames,
                            double eta);

// One moving-average step pulling the raw anchor toward the frame direction:
// x - eta * (l2(x) - l2(f)).
Vec ema_update(const Vec& x, const Vec& f, double eta);

// Result of the mutual rank-1 test between one query anchor and one peer
// camera: forward rank-1 into the peer camera, backward rank-1 from that peer
// back into the query camera, consistent iff the cycle returns to the query.
struct CyclicMatch {
  std::size_t query_camera = 0;
  std::size_t query_index = 0;
  std::size_t peer_camera = 0;
  std::size_t peer_index = 0;
  double forward_distance = 0.0;
  std::size_t backward_index = 0;
  double backward_distance = 0.0;
  bool consistent = false;
};

// Mutual rank-1 test of intra anchor (k, p) against peer camera l (l != k).
CyclicMatch cyclic_rank(const AnchorBank& bank, std::size_t k, std::size_t p,
                        std::size_t l, Precision prec = Precision::f64);

// Cyclic-rank (k, p) against every other camera and keep the consistent match
// with the smallest forward distance. With two cameras this is exactly the
// single pairwise test. If no camera yields a consistent cycle, the returned
// match has consistent == false (the nearest-forward candidate is reported).
CyclicMatch best_cyclic_match(const AnchorBank& bank, std::size_t k, std::size_t p,
                              Precision prec = Precision::f64);

// Fuse or revert the cross anchor for (k, i): a consistent match sets it to
// the midpoint of the two normalized intra anchors and records the peer; an
// inconsistent one reverts it to the intra anchor and clears the fusion.
void update_cross_anchor(AnchorBank& bank, std::size_t k, std::size_t i,
                         const CyclicMatch& match);

}  // namespace dal
