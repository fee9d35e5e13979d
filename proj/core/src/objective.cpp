#include "dal/objective.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <map>
#include <string>

namespace dal {
namespace {

double hinge(double x) { return x > 0.0 ? x : 0.0; }

struct ModeWeights {
  double w_i;
  double w_c;
};

ModeWeights weights_for(Mode mode, double lambda) {
  switch (mode) {
    case Mode::I_only: return {1.0, 0.0};
    case Mode::C_only: return {0.0, lambda};
    case Mode::joint: return {1.0, lambda};
  }
  return {1.0, lambda};
}

}  // namespace

std::vector<BatchCameraStats> batch_mean_rank1(const std::vector<FrameContext>& frames) {
  std::map<std::size_t, BatchCameraStats> by_camera;
  for (const auto& f : frames) {
    auto& s = by_camera[f.camera];
    s.camera = f.camera;
    s.count += 1;
    s.mean_rank1 += f.ranking.rank1_distance;
  }
  std::vector<BatchCameraStats> out;
  out.reserve(by_camera.size());
  for (auto& [cam, s] : by_camera) {
    s.mean_rank1 /= static_cast<double>(s.count);
    out.push_back(s);
  }
  return out;
}

double mean_rank1_of(const std::vector<BatchCameraStats>& stats, std::size_t camera) {
  for (const auto& s : stats) {
    if (s.camera == camera) return s.mean_rank1;
  }
  assert(false && "camera missing from batch stats");
  return 0.0;
}

double intra_loss(const FrameContext& frame, double mean_rank1, double m) {
  const std::size_t p = frame.source_index;
  const std::size_t t = frame.ranking.rank1_index;
  const double d_pp = frame.ranking.distances[p];
  const double neg = (t == p) ? mean_rank1 : frame.ranking.distances[t];
  return hinge(d_pp - neg + m);
}

double cross_loss(double da_pp, const FrameContext& frame, double mean_rank1, double m) {
  const std::size_t p = frame.source_index;
  const std::size_t t = frame.ranking.rank1_index;
  const double neg = (t == p) ? mean_rank1 : frame.ranking.distances[t];
  return hinge(da_pp - neg + m);
}

double total_loss(double loss_i, double loss_c, double lambda) {
  return loss_i + lambda * loss_c;
}

LossBreakdown batch_losses(const std::vector<Vec>& embeddings,
                           const std::vector<FrameContext>& frames,
                           const AnchorBank& bank, double m, double lambda,
                           Mode mode, Precision prec) {
  assert(embeddings.size() == frames.size());
  const auto stats = batch_mean_rank1(frames);
  LossBreakdown out;
  out.margin = m;
  out.lambda = lambda;
  out.per_frame.reserve(frames.size());
  for (std::size_t b = 0; b < frames.size(); ++b) {
    const auto& fr = frames[b];
    const double mean = mean_rank1_of(stats, fr.camera);
    FrameTerms t;
    t.own_is_rank1 = (fr.ranking.rank1_index == fr.source_index);
    t.d_pp = fr.ranking.distances[fr.source_index];
    t.d_neg = t.own_is_rank1 ? mean : fr.ranking.distances[fr.ranking.rank1_index];
    t.da_pp = pair_distance(embeddings[b], bank.cross[fr.camera][fr.source_index], prec);
    t.intra_value = intra_loss(fr, mean, m);
    t.cross_value = cross_loss(t.da_pp, fr, mean, m);
    out.loss_i += t.intra_value;
    out.loss_c += t.cross_value;
    out.per_frame.push_back(t);
  }
  const double n = static_cast<double>(frames.size());
  out.loss_i /= n;
  out.loss_c /= n;
  switch (mode) {
    case Mode::I_only: out.loss_total = out.loss_i; break;
    case Mode::C_only: out.loss_total = lambda * out.loss_c; break;
    case Mode::joint: out.loss_total = total_loss(out.loss_i, out.loss_c, lambda); break;
  }
  return out;
}

Vec distance_gradient(const Vec& f, const Vec& c_unit) {
  const double s = norm2(f);
  Vec g(f.size(), 0.0);
  if (s < kZeroNormEps) return g;
  Vec n(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) n[i] = f[i] / s;
  double dist_sq = 0.0;
  double n_dot_diff = 0.0;
  Vec diff(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    diff[i] = n[i] - c_unit[i];
    dist_sq += diff[i] * diff[i];
    n_dot_diff += n[i] * diff[i];
  }
  const double dist = std::sqrt(dist_sq);
  if (dist < kZeroNormEps) return g;
  // Project the difference onto the tangent space of the sphere at n, then
  // rescale by the normalization Jacobian 1/s and the distance derivative.
  for (std::size_t i = 0; i < f.size(); ++i) {
    g[i] = (diff[i] - n[i] * n_dot_diff) / (s * dist);
  }
  return g;
}

std::vector<Vec> loss_gradient(const std::vector<Vec>& embeddings,
                               const std::vector<FrameContext>& frames,
                               const AnchorBank& bank,
                               const std::vector<BatchCameraStats>& stats,
                               double m, double lambda, Mode mode) {
  assert(embeddings.size() == frames.size());
  const ModeWeights w = weights_for(mode, lambda);
  const double inv_n = 1.0 / static_cast<double>(frames.size());
  std::vector<Vec> grads(frames.size());
  for (std::size_t b = 0; b < frames.size(); ++b) {
    const auto& fr = frames[b];
    const Vec& f = embeddings[b];
    grads[b].assign(f.size(), 0.0);
    const std::size_t p = fr.source_index;
    const std::size_t t = fr.ranking.rank1_index;
    const bool own_is_rank1 = (t == p);

    // Frozen anchor directions; distances re-derived in 64-bit from f so the
    // gradient matches finite differences exactly in test precision.
    const Vec xp = l2_normalize(bank.intra[fr.camera][p]);
    const Vec ap = l2_normalize(bank.cross[fr.camera][p]);
    const double d_pp = pair_distance(f, bank.intra[fr.camera][p]);
    const double da_pp = pair_distance(f, bank.cross[fr.camera][p]);
    double neg = 0.0;
    Vec neg_grad;  // empty when the negative term is the frozen camera mean
    if (own_is_rank1) {
      neg = mean_rank1_of(stats, fr.camera);
    } else {
      neg = pair_distance(f, bank.intra[fr.camera][t]);
      neg_grad = distance_gradient(f, l2_normalize(bank.intra[fr.camera][t]));
    }

    if (w.w_i > 0.0 && d_pp - neg + m > 0.0) {
      const Vec gp = distance_gradient(f, xp);
      for (std::size_t i = 0; i < f.size(); ++i) {
        double g = gp[i];
        if (!neg_grad.empty()) g -= neg_grad[i];
        grads[b][i] += w.w_i * inv_n * g;
      }
    }
    if (w.w_c > 0.0 && da_pp - neg + m > 0.0) {
      const Vec ga = distance_gradient(f, ap);
      for (std::size_t i = 0; i < f.size(); ++i) {
        double g = ga[i];
        if (!neg_grad.empty()) g -= neg_grad[i];
        grads[b][i] += w.w_c * inv_n * g;
      }
    }
  }
  return grads;
}

}  // namespace dal
