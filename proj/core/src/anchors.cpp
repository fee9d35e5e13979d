#include "dal/anchors.hpp"

#include <cassert>
#include <limits>
#include <string>

namespace dal {

std::size_t AnchorBank::total_anchors() const {
  std::size_t n = 0;
  for (const auto& cam : intra) n += cam.size();
  return n;
}

AnchorBank init_anchor_bank(const std::vector<std::vector<std::vector<Vec>>>& frames,
                            double eta) {
  AnchorBank bank;
  bank.eta = eta;
  bank.intra.resize(frames.size());
  bank.cross.resize(frames.size());
  bank.merge.resize(frames.size());
  for (std::size_t k = 0; k < frames.size(); ++k) {
    bank.intra[k].reserve(frames[k].size());
    for (std::size_t i = 0; i < frames[k].size(); ++i) {
      const auto& tracklet = frames[k][i];
      if (tracklet.empty()) {
        raise(ErrorCode::EmptyTracklet, "camera " + std::to_string(k) +
                                            " tracklet " + std::to_string(i) +
                                            " has no frames");
      }
      Vec mean(tracklet[0].size(), 0.0);
      for (const auto& f : tracklet) {
        if (f.size() != mean.size()) {
          raise(ErrorCode::DimensionMismatch,
                "inconsistent embedding dimension in camera " + std::to_string(k) +
                    " tracklet " + std::to_string(i));
        }
        for (std::size_t j = 0; j < mean.size(); ++j) mean[j] += f[j];
      }
      for (auto& x : mean) x /= static_cast<double>(tracklet.size());
      if (bank.dim == 0) bank.dim = mean.size();
      bank.intra[k].push_back(mean);
    }
    bank.cross[k] = bank.intra[k];
    bank.merge[k].assign(bank.intra[k].size(), MergeState{});
  }
  return bank;
}

Vec ema_update(const Vec& x, const Vec& f, double eta) {
  const Vec xn = l2_normalize(x);
  const Vec fn = l2_normalize(f);
  Vec out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    out[i] = x[i] - eta * (xn[i] - fn[i]);
  }
  return out;
}

CyclicMatch cyclic_rank(const AnchorBank& bank, std::size_t k, std::size_t p,
                        std::size_t l, Precision prec) {
  assert(k != l);
  if (bank.intra[k].empty() || bank.intra[l].empty()) {
    raise(ErrorCode::EmptyAnchorSet, "cyclic ranking needs anchors in cameras " +
                                         std::to_string(k) + " and " + std::to_string(l));
  }
  CyclicMatch m;
  m.query_camera = k;
  m.query_index = p;
  m.peer_camera = l;
  const auto forward = distance_row(bank.intra[k][p], bank.intra[l], prec);
  m.peer_index = forward.rank1_index;
  m.forward_distance = forward.rank1_distance;
  const auto backward = distance_row(bank.intra[l][m.peer_index], bank.intra[k], prec);
  m.backward_index = backward.rank1_index;
  m.backward_distance = backward.rank1_distance;
  m.consistent = (m.backward_index == p);
  return m;
}

CyclicMatch best_cyclic_match(const AnchorBank& bank, std::size_t k, std::size_t p,
                              Precision prec) {
  CyclicMatch best_consistent;
  CyclicMatch best_any;
  double consistent_dist = std::numeric_limits<double>::infinity();
  double any_dist = std::numeric_limits<double>::infinity();
  for (std::size_t l = 0; l < bank.n_cameras(); ++l) {
    if (l == k || bank.intra[l].empty()) continue;
    const CyclicMatch m = cyclic_rank(bank, k, p, l, prec);
    if (m.forward_distance < any_dist) {
      any_dist = m.forward_distance;
      best_any = m;
    }
    if (m.consistent && m.forward_distance < consistent_dist) {
      consistent_dist = m.forward_distance;
      best_consistent = m;
    }
  }
  if (consistent_dist < std::numeric_limits<double>::infinity()) return best_consistent;
  if (any_dist == std::numeric_limits<double>::infinity()) {
    raise(ErrorCode::EmptyAnchorSet,
          "no peer camera with anchors for camera " + std::to_string(k));
  }
  best_any.consistent = false;
  return best_any;
}

void update_cross_anchor(AnchorBank& bank, std::size_t k, std::size_t i,
                         const CyclicMatch& match) {
  assert(match.query_camera == k && match.query_index == i);
  if (match.consistent) {
    const Vec a = l2_normalize(bank.intra[k][i]);
    const Vec b = l2_normalize(bank.intra[match.peer_camera][match.peer_index]);
    Vec mid(a.size());
    for (std::size_t j = 0; j < a.size(); ++j) mid[j] = 0.5 * (a[j] + b[j]);
    bank.cross[k][i] = mid;
    bank.merge[k][i] = MergeState{true, match.peer_camera, match.peer_index};
  } else {
    bank.cross[k][i] = bank.intra[k][i];
    bank.merge[k][i] = MergeState{};
  }
}

}  // namespace dal
