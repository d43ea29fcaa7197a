#pragma once

// Test-only reference computations. Nothing here calls into the code paths
// it is used to check, except the forward pass that defines the loss being
// differentiated.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "volest/nn.hpp"

namespace oracle {

// Central finite differences of the batch loss with respect to every
// trainable scalar, in flat_views order.
inline std::vector<double> finite_difference_gradient(const volest::nn::NetworkParams& params,
                                                      const volest::nn::LayerSpec& spec,
                                                      const volest::nn::Matrix& x,
                                                      const volest::nn::Vector& y,
                                                      volest::nn::Mode mode,
                                                      const volest::nn::DropoutMasks* masks,
                                                      volest::nn::Loss loss, double h = 1e-5) {
  using namespace volest::nn;
  NetworkParams probe = params;
  auto views = flat_views(probe.trainable);
  std::vector<double> out;
  for (auto& view : views) {
    for (Eigen::Index i = 0; i < view.size(); ++i) {
      const double saved = view[i];
      view[i] = saved + h;
      const double up = loss_value(loss, forward(probe, spec, x, mode, masks), y);
      view[i] = saved - h;
      const double down = loss_value(loss, forward(probe, spec, x, mode, masks), y);
      view[i] = saved;
      out.push_back((up - down) / (2.0 * h));
    }
  }
  return out;
}

inline std::vector<double> flatten(const volest::nn::Tensors& t) {
  std::vector<double> out;
  for (const auto& v : volest::nn::flat_views(t))
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

// max_i |a_i - b_i| / max(|a_i|, |b_i|), with entries where both sides are
// below `floor` compared on an absolute scale against that floor.
inline double max_relative_error(const std::vector<double>& a, const std::vector<double>& b,
                                 double floor = 1e-8) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double denom = std::max({std::abs(a[i]), std::abs(b[i]), floor});
    worst = std::max(worst, std::abs(a[i] - b[i]) / denom);
  }
  return worst;
}

// Two-sided exact signed-rank p-value by enumerating all 2^n sign patterns
// of the ranks 1..n (no ties).
inline double signed_rank_p_enumerated(int n, double w_plus) {
  const std::uint64_t patterns = std::uint64_t{1} << n;
  std::uint64_t le = 0, ge = 0;
  for (std::uint64_t mask = 0; mask < patterns; ++mask) {
    double w = 0;
    for (int r = 0; r < n; ++r)
      if (mask & (std::uint64_t{1} << r)) w += r + 1;
    if (w <= w_plus + 1e-9) ++le;
    if (w >= w_plus - 1e-9) ++ge;
  }
  const double tail = static_cast<double>(std::min(le, ge)) / static_cast<double>(patterns);
  return std::min(1.0, 2.0 * tail);
}

// Same enumeration over arbitrary (possibly tied, averaged) ranks.
inline double signed_rank_p_enumerated(const std::vector<double>& ranks, double w_plus) {
  const std::uint64_t patterns = std::uint64_t{1} << ranks.size();
  std::uint64_t le = 0, ge = 0;
  for (std::uint64_t mask = 0; mask < patterns; ++mask) {
    double w = 0;
    for (std::size_t r = 0; r < ranks.size(); ++r)
      if (mask & (std::uint64_t{1} << r)) w += ranks[r];
    if (w <= w_plus + 1e-9) ++le;
    if (w >= w_plus - 1e-9) ++ge;
  }
  const double tail = static_cast<double>(std::min(le, ge)) / static_cast<double>(patterns);
  return std::min(1.0, 2.0 * tail);
}

}  // namespace oracle
