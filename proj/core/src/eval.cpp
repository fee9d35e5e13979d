#include "dal/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace dal {
namespace {

// Rank one query against a gallery: position of the first same-identity item
// and the average precision over all same-identity items, under ascending
// distance with lowest-index tie-break.
struct QueryRanking {
  std::size_t first_correct_rank = 0;  // 0-based
  double average_precision = 0.0;
};

QueryRanking rank_query(const Vec& query_rep, std::int64_t query_id,
                        const std::vector<Vec>& gallery_reps,
                        const std::vector<std::int64_t>& gallery_ids) {
  if (gallery_reps.empty()) {
    raise(ErrorCode::EmptyAnchorSet, "gallery is empty");
  }
  const std::size_t g = gallery_reps.size();
  std::vector<double> dist(g);
  for (std::size_t j = 0; j < g; ++j) {
    dist[j] = pair_distance(query_rep, gallery_reps[j], Precision::f64);
  }
  std::vector<std::size_t> order(g);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (dist[a] != dist[b]) return dist[a] < dist[b];
    return a < b;
  });

  QueryRanking out;
  bool found = false;
  std::size_t relevant_seen = 0;
  double precision_sum = 0.0;
  for (std::size_t r = 0; r < g; ++r) {
    if (gallery_ids[order[r]] == query_id) {
      if (!found) {
        out.first_correct_rank = r;
        found = true;
      }
      ++relevant_seen;
      precision_sum += static_cast<double>(relevant_seen) / static_cast<double>(r + 1);
    }
  }
  if (!found) {
    raise(ErrorCode::QueryWithoutGalleryMatch,
          "identity " + std::to_string(query_id) + " absent from the gallery");
  }
  out.average_precision = precision_sum / static_cast<double>(relevant_seen);
  return out;
}

}  // namespace

Vec tracklet_representation(const std::vector<Vec>& frame_embeddings) {
  if (frame_embeddings.empty()) {
    raise(ErrorCode::EmptyTracklet, "cannot pool zero frames");
  }
  Vec pooled = frame_embeddings[0];
  for (std::size_t f = 1; f < frame_embeddings.size(); ++f) {
    const Vec& e = frame_embeddings[f];
    if (e.size() != pooled.size()) {
      raise(ErrorCode::DimensionMismatch,
            "frame embedding dimensions differ within one tracklet");
    }
    for (std::size_t i = 0; i < pooled.size(); ++i) {
      pooled[i] = std::max(pooled[i], e[i]);
    }
  }
  return l2_normalize(pooled);
}

std::vector<double> cmc_curve(const std::vector<Vec>& query_reps,
                              const std::vector<std::int64_t>& query_ids,
                              const std::vector<Vec>& gallery_reps,
                              const std::vector<std::int64_t>& gallery_ids) {
  if (query_reps.empty()) raise(ErrorCode::EmptyDataset, "no queries");
  std::vector<std::size_t> hits(gallery_reps.size(), 0);
  for (std::size_t q = 0; q < query_reps.size(); ++q) {
    const auto r = rank_query(query_reps[q], query_ids[q], gallery_reps, gallery_ids);
    ++hits[r.first_correct_rank];
  }
  // Cumulate in integers so a fully matched curve ends at exactly 1.
  std::vector<double> cmc(gallery_reps.size());
  std::size_t acc = 0;
  for (std::size_t r = 0; r < hits.size(); ++r) {
    acc += hits[r];
    cmc[r] = static_cast<double>(acc) / static_cast<double>(query_reps.size());
  }
  return cmc;
}

double mean_average_precision(const std::vector<Vec>& query_reps,
                              const std::vector<std::int64_t>& query_ids,
                              const std::vector<Vec>& gallery_reps,
                              const std::vector<std::int64_t>& gallery_ids) {
  if (query_reps.empty()) raise(ErrorCode::EmptyDataset, "no queries");
  double sum = 0.0;
  for (std::size_t q = 0; q < query_reps.size(); ++q) {
    sum += rank_query(query_reps[q], query_ids[q], gallery_reps, gallery_ids)
               .average_precision;
  }
  return sum / static_cast<double>(query_reps.size());
}

double association_rate(const AnchorBank& bank) {
  std::size_t merged = 0;
  std::size_t total = 0;
  for (const auto& camera : bank.merge) {
    for (const auto& m : camera) {
      ++total;
      if (m.merged) ++merged;
    }
  }
  if (total == 0) raise(ErrorCode::EmptyAnchorSet, "bank holds no anchors");
  return static_cast<double>(merged) / static_cast<double>(total);
}

double true_match_rate(const AnchorBank& bank,
                       const std::vector<std::vector<std::int64_t>>& identity_of) {
  std::size_t merged = 0;
  std::size_t correct = 0;
  for (std::size_t k = 0; k < bank.n_cameras(); ++k) {
    for (std::size_t i = 0; i < bank.n_anchors(k); ++i) {
      const MergeState& m = bank.merge[k][i];
      if (!m.merged) continue;
      ++merged;
      if (identity_of[k][i] == identity_of[m.peer_camera][m.peer_index]) ++correct;
    }
  }
  if (merged == 0) {
    raise(ErrorCode::NoMergedAnchors, "no anchor is fused; the rate is undefined");
  }
  return static_cast<double>(correct) / static_cast<double>(merged);
}

EvalReport evaluate(const Dataset& ds, const EmbeddingHead& head,
                    const AnchorBank* bank, std::uint64_t iteration) {
  if (!ds.has_labels) {
    raise(ErrorCode::MissingLabels, "evaluation needs identity labels in the manifest");
  }
  ds.validate_for_training();  // matching needs >= 2 cameras too

  // Per-tracklet descriptors, grouped by camera.
  std::vector<std::vector<Vec>> reps(ds.cameras);
  std::vector<std::vector<std::int64_t>> ids(ds.cameras);
  for (std::size_t k = 0; k < ds.cameras; ++k) {
    for (std::size_t t = 0; t < ds.tracklets_per_camera[k]; ++t) {
      std::vector<Vec> embedded;
      embedded.reserve(ds.frames_by_tracklet[k][t].size());
      for (std::size_t row : ds.frames_by_tracklet[k][t]) {
        embedded.push_back(forward(head, ds.frames[row].feature));
      }
      reps[k].push_back(tracklet_representation(embedded));
      ids[k].push_back(ds.identity_of[k][t]);
    }
  }

  EvalReport report;
  report.iteration = iteration;

  if (ds.cameras == 2) {
    report.cmc = cmc_curve(reps[0], ids[0], reps[1], ids[1]);
    report.map = mean_average_precision(reps[0], ids[0], reps[1], ids[1]);
  } else {
    // Every tracklet queries the union of the other cameras' tracklets.
    std::size_t max_gallery = 0;
    std::size_t queries = 0;
    for (std::size_t k = 0; k < ds.cameras; ++k) {
      std::size_t others = 0;
      for (std::size_t l = 0; l < ds.cameras; ++l) {
        if (l != k) others += reps[l].size();
      }
      max_gallery = std::max(max_gallery, others);
      queries += reps[k].size();
    }
    std::vector<std::size_t> hits(max_gallery, 0);
    double ap_sum = 0.0;
    for (std::size_t k = 0; k < ds.cameras; ++k) {
      std::vector<Vec> gallery;
      std::vector<std::int64_t> gallery_ids;
      for (std::size_t l = 0; l < ds.cameras; ++l) {
        if (l == k) continue;
        gallery.insert(gallery.end(), reps[l].begin(), reps[l].end());
        gallery_ids.insert(gallery_ids.end(), ids[l].begin(), ids[l].end());
      }
      for (std::size_t t = 0; t < reps[k].size(); ++t) {
        const auto r = rank_query(reps[k][t], ids[k][t], gallery, gallery_ids);
        ++hits[r.first_correct_rank];
        ap_sum += r.average_precision;
      }
    }
    report.cmc.resize(max_gallery);
    std::size_t acc = 0;
    for (std::size_t r = 0; r < max_gallery; ++r) {
      acc += hits[r];
      report.cmc[r] = static_cast<double>(acc) / static_cast<double>(queries);
    }
    report.map = ap_sum / static_cast<double>(queries);
  }

  if (bank != nullptr) {
    report.association_rate = association_rate(*bank);
    try {
      report.true_match_rate = true_match_rate(*bank, ds.identity_of);
    } catch (const DalError& e) {
      if (e.code() != ErrorCode::NoMergedAnchors) throw;
      report.true_match_rate = std::nullopt;
    }
  }
  return report;
}

}  // namespace dal
