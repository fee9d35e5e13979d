#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "dal/anchors.hpp"
#include "dal/data.hpp"
#include "dal/linalg.hpp"
#include "dal/model.hpp"

namespace dal {

// Matching quality and association dynamics at one training iteration. All
// metric computation runs in 64-bit regardless of the training precision.
struct EvalReport {
  std::vector<double> cmc;  // cmc[r] = fraction matched within rank r+1
  double map = 0.0;
  double association_rate = 0.0;
  // Fraction of fused anchors whose peer shares their identity; undefined
  // (not zero) when nothing is fused yet.
  std::optional<double> true_match_rate;
  std::uint64_t iteration = 0;
};

// Test-time tracklet descriptor: elementwise maximum over the tracklet's
// frame embeddings, then l2_normalize. Raises EmptyTracklet with no frames
// and ZeroVector when the pooled vector has no direction.
Vec tracklet_representation(const std::vector<Vec>& frame_embeddings);

// cmc[r] = fraction of queries whose first same-identity gallery item occurs
// at rank <= r+1 under ascending distance, ties broken by lowest gallery
// index. Every query id must appear in the gallery (QueryWithoutGalleryMatch).
std::vector<double> cmc_curve(const std::vector<Vec>& query_reps,
                              const std::vector<std::int64_t>& query_ids,
                              const std::vector<Vec>& gallery_reps,
                              const std::vector<std::int64_t>& gallery_ids);

// Per query, AP = mean over its relevant gallery items of the precision at
// each item's rank; returns the mean AP over queries. Preconditions and tie
// handling as cmc_curve.
double mean_average_precision(const std::vector<Vec>& query_reps,
                              const std::vector<std::int64_t>& query_ids,
                              const std::vector<Vec>& gallery_reps,
                              const std::vector<std::int64_t>& gallery_ids);

// Fraction of anchors currently fused with a cross-camera peer.
double association_rate(const AnchorBank& bank);

// Among fused anchors, the fraction whose peer tracklet carries the same
// identity. identity_of is indexed [camera][tracklet]. Raises NoMergedAnchors
// when nothing is fused (the quantity is undefined, not zero).
double true_match_rate(const AnchorBank& bank,
                       const std::vector<std::vector<std::int64_t>>& identity_of);

// Full evaluation protocol over a labeled dataset (MissingLabels otherwise):
// embed every frame with `head`, pool per tracklet, then match across
// cameras. With exactly 2 cameras, camera 0's tracklets query camera 1's
// gallery; with more, every tracklet queries the union of all other cameras'
// tracklets (same-camera entries excluded). `bank` supplies the association
// metrics and may be null (association_rate 0, true_match_rate undefined).
EvalReport evaluate(const Dataset& ds, const EmbeddingHead& head,
                    const AnchorBank* bank, std::uint64_t iteration);

}  // namespace dal
