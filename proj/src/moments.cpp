#include "stfreq/moments.hpp"

#include <cstdlib>
#include <string>
#include <vector>

#include "stfreq/error.hpp"

namespace stfreq {

namespace {

// Visits every element of N(h, u) as (station i, time ti, station j, time tj),
// times zero-based.
template <typename Visit>
std::size_t for_each_lag_pair(const Panel& panel, const SpaceTimeLag& lag, Visit&& visit) {
  const LagPairSet pairs = build_lag_pairs(panel.stations(), lag.h, lag.tolerance);
  const long n = static_cast<long>(panel.n());
  const long u = lag.u;
  if (std::labs(u) >= n || pairs.empty()) {
    fail(ErrorCode::EmptyLagSet, "no (station, time) pairs at |h|=" + std::to_string(norm(lag.h)) +
                                     ", u=" + std::to_string(u));
  }
  const long t_begin = std::max(0L, u);
  const long t_end = std::min(n, n + u);
  for (const auto& [i, j] : pairs.pairs) {
    for (long ti = t_begin; ti < t_end; ++ti) visit(i, ti, j, ti - u);
  }
  return pairs.count() * static_cast<std::size_t>(t_end - t_begin);
}

}  // namespace

MomentEstimate matheron_variogram(const Panel& panel, const SpaceTimeLag& lag) {
  const RealMatrix& y = panel.values();
  double sum = 0.0;
  const std::size_t count = for_each_lag_pair(panel, lag, [&](std::size_t i, long ti, std::size_t j, long tj) {
    const double d = y(i, ti) - y(j, tj);
    sum += d * d;
  });
  return {sum / static_cast<double>(count), count};
}

MomentEstimate sample_covariance(const Panel& panel, const SpaceTimeLag& lag) {
  const RealMatrix& y = panel.values();
  std::vector<double> means(panel.m(), 0.0);
  for (std::size_t i = 0; i < panel.m(); ++i) {
    for (std::size_t t = 0; t < panel.n(); ++t) means[i] += y(i, t);
    means[i] /= static_cast<double>(panel.n());
  }
  double sum = 0.0;
  const std::size_t count = for_each_lag_pair(panel, lag, [&](std::size_t i, long ti, std::size_t j, long tj) {
    sum += (y(i, ti) - means[i]) * (y(j, tj) - means[j]);
  });
  return {sum / static_cast<double>(count), count};
}

}  // namespace stfreq
