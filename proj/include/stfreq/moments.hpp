#pragma once

#include <cstddef>

#include "stfreq/panel.hpp"

namespace stfreq {

/// Space-time lag (h, u) with spatial tolerance. Pairs are directed:
/// s_i - s_j ~ h and t_i - t_j = u. |u| < n is required at evaluation time.
struct SpaceTimeLag {
  Coords h;
  long u = 0;
  double tolerance = 0.0;
};

struct MomentEstimate {
  double value = 0.0;
  std::size_t count = 0;  // |N(h, u)|: station pairs x admissible time pairs
};

/// Matheron estimator: mean of [Y_{t_i}(s_i) - Y_{t_j}(s_j)]^2 over N(h, u).
MomentEstimate matheron_variogram(const Panel& panel, const SpaceTimeLag& lag);

/// Same pair set with station means removed (1/n normalisation):
/// mean of [Y_{t_i}(s_i) - Ybar(s_i)][Y_{t_j}(s_j) - Ybar(s_j)].
MomentEstimate sample_covariance(const Panel& panel, const SpaceTimeLag& lag);

}  // namespace stfreq
