#include "dal/model.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <string>

namespace dal {
namespace {

double fan_limit(std::size_t fan_in, std::size_t fan_out) {
  return std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
}

// Fill one weight matrix (rows x cols, row-major) at params[offset...].
// Both init styles consume exactly rows*cols uniform draws, so the RNG
// stream stays aligned whichever is chosen.
void init_matrix(std::vector<double>& params, std::size_t offset, std::size_t rows,
                 std::size_t cols, Rng& rng, HeadInit init) {
  const double lim = fan_limit(cols, rows);
  const double scale = (init == HeadInit::near_identity) ? 0.05 : 1.0;
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      double w = scale * rng.uniform(-lim, lim);
      if (init == HeadInit::near_identity && r == c) w += 1.0;
      params[offset + r * cols + c] = w;
    }
  }
}

void check_dim(const Vec& v, std::size_t want, const char* what) {
  if (v.size() != want) {
    raise(ErrorCode::DimensionMismatch, std::string(what) + " has dimension " +
                                            std::to_string(v.size()) + ", expected " +
                                            std::to_string(want));
  }
}

}  // namespace

EmbeddingHead make_head(HeadKind kind, std::size_t d_in, std::size_t d_out,
                        std::size_t hidden, Rng& rng, HeadInit init) {
  EmbeddingHead head;
  head.kind = kind;
  head.d_in = d_in;
  head.d_out = d_out;
  switch (kind) {
    case HeadKind::Identity:
      head.d_out = d_in;
      break;
    case HeadKind::Linear:
      head.params.assign(d_out * d_in + d_out, 0.0);
      init_matrix(head.params, 0, d_out, d_in, rng, init);
      break;
    case HeadKind::OneHidden:
      head.hidden = hidden;
      head.params.assign(hidden * d_in + hidden + d_out * hidden + d_out, 0.0);
      init_matrix(head.params, 0, hidden, d_in, rng, init);
      init_matrix(head.params, hidden * d_in + hidden, d_out, hidden, rng, init);
      break;
  }
  return head;
}

Vec forward(const EmbeddingHead& head, const Vec& raw) {
  check_dim(raw, head.d_in, "input");
  switch (head.kind) {
    case HeadKind::Identity:
      return raw;
    case HeadKind::Linear: {
      const double* W = head.params.data();
      const double* b = W + head.d_out * head.d_in;
      Vec out(head.d_out);
      for (std::size_t r = 0; r < head.d_out; ++r) {
        double acc = b[r];
        for (std::size_t c = 0; c < head.d_in; ++c) acc += W[r * head.d_in + c] * raw[c];
        out[r] = acc;
      }
      return out;
    }
    case HeadKind::OneHidden: {
      const double* W1 = head.params.data();
      const double* b1 = W1 + head.hidden * head.d_in;
      const double* W2 = b1 + head.hidden;
      const double* b2 = W2 + head.d_out * head.hidden;
      Vec h(head.hidden);
      for (std::size_t r = 0; r < head.hidden; ++r) {
        double acc = b1[r];
        for (std::size_t c = 0; c < head.d_in; ++c) acc += W1[r * head.d_in + c] * raw[c];
        h[r] = acc > 0.0 ? acc : 0.0;
      }
      Vec out(head.d_out);
      for (std::size_t r = 0; r < head.d_out; ++r) {
        double acc = b2[r];
        for (std::size_t c = 0; c < head.hidden; ++c) acc += W2[r * head.hidden + c] * h[c];
        out[r] = acc;
      }
      return out;
    }
  }
  return raw;
}

BackwardResult backward(const EmbeddingHead& head, const Vec& raw, const Vec& upstream) {
  check_dim(raw, head.d_in, "input");
  check_dim(upstream, head.d_out, "upstream gradient");
  BackwardResult res;
  switch (head.kind) {
    case HeadKind::Identity:
      res.input_grad = upstream;
      return res;
    case HeadKind::Linear: {
      const double* W = head.params.data();
      res.param_grad.assign(head.params.size(), 0.0);
      double* dW = res.param_grad.data();
      double* db = dW + head.d_out * head.d_in;
      res.input_grad.assign(head.d_in, 0.0);
      for (std::size_t r = 0; r < head.d_out; ++r) {
        db[r] = upstream[r];
        for (std::size_t c = 0; c < head.d_in; ++c) {
          dW[r * head.d_in + c] = upstream[r] * raw[c];
          res.input_grad[c] += W[r * head.d_in + c] * upstream[r];
        }
      }
      return res;
    }
    case HeadKind::OneHidden: {
      const double* W1 = head.params.data();
      const double* b1 = W1 + head.hidden * head.d_in;
      const double* W2 = b1 + head.hidden;
      // Recompute pre-activations to know which rectifier units are live.
      Vec z(head.hidden);
      for (std::size_t r = 0; r < head.hidden; ++r) {
        double acc = b1[r];
        for (std::size_t c = 0; c < head.d_in; ++c) acc += W1[r * head.d_in + c] * raw[c];
        z[r] = acc;
      }
      Vec h(head.hidden);
      for (std::size_t r = 0; r < head.hidden; ++r) h[r] = z[r] > 0.0 ? z[r] : 0.0;

      res.param_grad.assign(head.params.size(), 0.0);
      double* dW1 = res.param_grad.data();
      double* db1 = dW1 + head.hidden * head.d_in;
      double* dW2 = db1 + head.hidden;
      double* db2 = dW2 + head.d_out * head.hidden;

      Vec dh(head.hidden, 0.0);
      for (std::size_t r = 0; r < head.d_out; ++r) {
        db2[r] = upstream[r];
        for (std::size_t c = 0; c < head.hidden; ++c) {
          dW2[r * head.hidden + c] = upstream[r] * h[c];
          dh[c] += W2[r * head.hidden + c] * upstream[r];
        }
      }
      res.input_grad.assign(head.d_in, 0.0);
      for (std::size_t r = 0; r < head.hidden; ++r) {
        const double dz = z[r] > 0.0 ? dh[r] : 0.0;
        db1[r] = dz;
        for (std::size_t c = 0; c < head.d_in; ++c) {
          dW1[r * head.d_in + c] = dz * raw[c];
          res.input_grad[c] += W1[r * head.d_in + c] * dz;
        }
      }
      return res;
    }
  }
  return res;
}

double OptimizerState::rate_at(std::size_t t) const {
  if (decay_interval == 0) return initial_rate;
  return initial_rate *
         std::pow(decay_factor, static_cast<double>(t / decay_interval));
}

void sgd_step(OptimizerState& state, std::vector<double>& params,
              const std::vector<double>& grads) {
  assert(params.size() == grads.size());
  if (state.velocity.size() != params.size()) state.velocity.assign(params.size(), 0.0);
  for (std::size_t i = 0; i < grads.size(); ++i) {
    if (!std::isfinite(grads[i])) {
      raise(ErrorCode::NonFiniteGradient,
            "gradient coordinate " + std::to_string(i) + " is not finite at iteration " +
                std::to_string(state.iteration));
    }
  }
  const double rate = state.rate_at(state.iteration);
  for (std::size_t i = 0; i < params.size(); ++i) {
    state.velocity[i] = state.momentum * state.velocity[i] + grads[i];
    params[i] -= rate * state.velocity[i];
  }
  state.iteration += 1;
}

FdReport finite_diff_check(EmbeddingHead& head,
                           const std::function<double(const EmbeddingHead&)>& loss,
                           const std::vector<double>& analytic_grad,
                           double step, const std::vector<std::size_t>& coordinates) {
  assert(analytic_grad.size() == head.params.size());
  std::vector<std::size_t> probe = coordinates;
  if (probe.empty()) {
    probe.resize(head.params.size());
    for (std::size_t i = 0; i < probe.size(); ++i) probe[i] = i;
  }
  FdReport report;
  for (std::size_t i : probe) {
    const double saved = head.params[i];
    head.params[i] = saved + step;
    const double hi = loss(head);
    head.params[i] = saved - step;
    const double lo = loss(head);
    head.params[i] = saved;
    const double fd = (hi - lo) / (2.0 * step);
    const double a = analytic_grad[i];
    const double denom = std::max({std::abs(fd), std::abs(a), 1e-3});
    const double rel = std::abs(a - fd) / denom;
    if (rel > report.max_rel_error) {
      report.max_rel_error = rel;
      report.worst_coordinate = i;
      report.analytic_at_worst = a;
      report.numeric_at_worst = fd;
    }
  }
  return report;
}

}  // namespace dal
