#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "stfreq/panel.hpp"
#include "stfreq/specmodel.hpp"
#include "stfreq/whittle.hpp"

namespace stfreq {

/// Philox4x32-10 (Salmon et al., "Parallel random numbers: as easy as 1, 2,
/// 3"). Every draw is a pure function of (seed, counter), so output does not
/// depend on how the work is split between threads.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter, std::array<std::uint32_t, 2> key);

/// Stream layout: counter = (index lo, index hi, stream, purpose), key = seed.
/// Streams are stations (or lags) and index runs over time (or pair x
/// frequency), so each (purpose, stream, index) triple owns one block.
enum class DrawPurpose : std::uint32_t { White = 1, Innovation = 2, Nugget = 3, Periodogram = 4 };

/// Uniform on the open interval (0, 1) from 64 random bits.
double uniform_draw(std::uint64_t seed, DrawPurpose purpose, std::uint32_t stream, std::uint64_t index);
/// Standard normal by Box-Muller on one Philox block.
double normal_draw(std::uint64_t seed, DrawPurpose purpose, std::uint32_t stream, std::uint64_t index);
/// Unit exponential, -ln(1 - U).
double exponential_draw(std::uint64_t seed, DrawPurpose purpose, std::uint32_t stream, std::uint64_t index);

/// Independent N(0, sigma_i^2) series. InvalidSigma for nonpositive sigma.
Panel simulate_white(const StationSet& stations, std::size_t n, const std::vector<double>& sigmas, std::uint64_t seed);

/// C_S(h) = sill * exp(-|h| / range).
struct SpatialCovariance {
  double range = 1.0;
  double sill = 1.0;

  double operator()(double distance) const;
};

/// Y_t = A e_t + eta_t with A A^T = C_S over the stations, e_t(s) independent
/// stationary AR(1) series of unit variance and eta white noise of variance
/// nugget. NotPositiveDefinite when C_S fails to factor; InvalidParams for
/// |rho| >= 1, range or sill <= 0, or a negative nugget.
Panel simulate_separable(const StationSet& stations, std::size_t n, const SpatialCovariance& spatial, double rho,
                         std::uint64_t seed, double nugget = 0.0);

/// Periodogram draws I(w_k) = g0(w_k) E_k with E_k unit exponential, for
/// k = 0..n/2 and mirrored above, for every (lag, pair).
std::vector<LagPeriodograms> simulate_whittle_periodograms(const SpectrumParams& psi, const std::vector<Coords>& lags,
                                                           std::size_t pairs_per_lag, std::size_t n, std::uint64_t seed,
                                                           SpectrumConstants constants = SpectrumConstants::Consistent);

enum class SimKind { White, Separable, WhittlePeriodogram };

/// JSON-described simulation request; see the README for the schema.
struct SimSpec {
  SimKind kind = SimKind::White;
  StationSet stations;
  std::size_t n = 0;
  std::uint64_t seed = 0;
  std::vector<double> sigmas;  // white
  SpatialCovariance spatial;   // separable
  double rho = 0.0;
  double nugget = 0.0;
  SpectrumParams params;       // whittle-periodogram
  std::vector<Coords> lags;
  std::size_t pairs_per_lag = 1;
};

SimSpec parse_sim_spec(const nlohmann::json& j);
/// Regular grid of nx x ny stations named s<row>_<col>, spacing apart.
StationSet grid_stations(std::size_t nx, std::size_t ny, double spacing);

}  // namespace stfreq
