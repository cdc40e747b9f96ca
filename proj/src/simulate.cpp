#include "stfreq/simulate.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "stfreq/dft.hpp"
#include "stfreq/error.hpp"
#include "stfreq/parallel.hpp"

namespace stfreq {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

std::array<std::uint32_t, 4> block(std::uint64_t seed, DrawPurpose purpose, std::uint32_t stream, std::uint64_t index) {
  return philox4x32({static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32), stream,
                     static_cast<std::uint32_t>(purpose)},
                    {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)});
}

double to_unit(std::uint32_t hi, std::uint32_t lo) {
  const std::uint64_t bits = (static_cast<std::uint64_t>(hi) << 32 | lo) >> 11;
  return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> c, std::array<std::uint32_t, 2> key) {
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * c[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * c[2];
    c = {static_cast<std::uint32_t>(p1 >> 32) ^ c[1] ^ key[0], static_cast<std::uint32_t>(p1),
         static_cast<std::uint32_t>(p0 >> 32) ^ c[3] ^ key[1], static_cast<std::uint32_t>(p0)};
    key[0] += kWeyl0;
    key[1] += kWeyl1;
  }
  return c;
}

double uniform_draw(std::uint64_t seed, DrawPurpose purpose, std::uint32_t stream, std::uint64_t index) {
  const auto b = block(seed, purpose, stream, index);
  return to_unit(b[0], b[1]);
}

double normal_draw(std::uint64_t seed, DrawPurpose purpose, std::uint32_t stream, std::uint64_t index) {
  const auto b = block(seed, purpose, stream, index);
  const double u1 = to_unit(b[0], b[1]);
  const double u2 = to_unit(b[2], b[3]);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double exponential_draw(std::uint64_t seed, DrawPurpose purpose, std::uint32_t stream, std::uint64_t index) {
  return -std::log1p(-uniform_draw(seed, purpose, stream, index));
}

Panel simulate_white(const StationSet& stations, std::size_t n, const std::vector<double>& sigmas, std::uint64_t seed) {
  const std::size_t m = stations.size();
  if (sigmas.size() != m) fail(ErrorCode::DimensionMismatch, "need one sigma per station");
  for (double s : sigmas) {
    if (!(s > 0.0) || !std::isfinite(s)) fail(ErrorCode::InvalidSigma, "sigma must be positive, got " + std::to_string(s));
  }
  if (n == 0) fail(ErrorCode::EmptyPanel, "n must be positive");
  RealMatrix values(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n));
  parallel_for(m, [&](std::size_t i) {
    for (std::size_t t = 0; t < n; ++t) {
      values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(t)) =
          sigmas[i] * normal_draw(seed, DrawPurpose::White, static_cast<std::uint32_t>(i), t);
    }
  });
  return Panel(stations, std::move(values));
}

double SpatialCovariance::operator()(double distance) const { return sill * std::exp(-distance / range); }

Panel simulate_separable(const StationSet& stations, std::size_t n, const SpatialCovariance& spatial, double rho,
                         std::uint64_t seed, double nugget) {
  const std::size_t m = stations.size();
  if (!(std::abs(rho) < 1.0)) fail(ErrorCode::InvalidParams, "AR(1) coefficient must lie in (-1, 1)");
  if (!(spatial.range > 0.0) || !(spatial.sill > 0.0)) fail(ErrorCode::InvalidParams, "range and sill must be positive");
  if (!(nugget >= 0.0)) fail(ErrorCode::InvalidParams, "nugget variance must be nonnegative");
  if (n == 0 || m == 0) fail(ErrorCode::EmptyPanel, "need at least one station and one time point");

  Eigen::MatrixXd cov(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      Coords diff(stations.dim());
      for (std::size_t c = 0; c < diff.size(); ++c) diff[c] = stations[i].coords[c] - stations[j].coords[c];
      cov(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = spatial(norm(diff));
    }
  }
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) fail(ErrorCode::NotPositiveDefinite, "spatial covariance matrix is not positive definite");
  const Eigen::MatrixXd a = llt.matrixL();

  Eigen::MatrixXd e(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n));
  const double innovation = std::sqrt(1.0 - rho * rho);
  parallel_for(m, [&](std::size_t i) {
    const auto row = static_cast<Eigen::Index>(i);
    const auto stream = static_cast<std::uint32_t>(i);
    double state = normal_draw(seed, DrawPurpose::Innovation, stream, 0);
    e(row, 0) = state;
    for (std::size_t t = 1; t < n; ++t) {
      state = rho * state + innovation * normal_draw(seed, DrawPurpose::Innovation, stream, t);
      e(row, static_cast<Eigen::Index>(t)) = state;
    }
  });
  RealMatrix values = a * e;
  if (nugget > 0.0) {
    const double sd = std::sqrt(nugget);
    parallel_for(m, [&](std::size_t i) {
      for (std::size_t t = 0; t < n; ++t) {
        values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(t)) +=
            sd * normal_draw(seed, DrawPurpose::Nugget, static_cast<std::uint32_t>(i), t);
      }
    });
  }
  return Panel(stations, std::move(values));
}

std::vector<LagPeriodograms> simulate_whittle_periodograms(const SpectrumParams& psi, const std::vector<Coords>& lags,
                                                           std::size_t pairs_per_lag, std::size_t n, std::uint64_t seed,
                                                           SpectrumConstants constants) {
  psi.validate();
  if (n < 2) fail(ErrorCode::TooFewObservations, "need n >= 2");
  if (pairs_per_lag == 0) fail(ErrorCode::InvalidParams, "pairs_per_lag must be positive");
  std::vector<LagPeriodograms> out(lags.size());
  for (std::size_t l = 0; l < lags.size(); ++l) {
    std::vector<double> g(n / 2 + 1);
    for (std::size_t k = 0; k <= n / 2; ++k) g[k] = temporal_spectrum(fourier_frequency(k, n), psi, lags[l], constants);
    out[l].h = lags[l];
    out[l].pairs.assign(pairs_per_lag, std::vector<double>(n));
    parallel_for(pairs_per_lag, [&](std::size_t p) {
      auto& row = out[l].pairs[p];
      for (std::size_t k = 0; k <= n / 2; ++k) {
        row[k] = g[k] * exponential_draw(seed, DrawPurpose::Periodogram, static_cast<std::uint32_t>(l), p * n + k);
        if (k > 0) row[n - k] = row[k];
      }
    });
  }
  return out;
}

StationSet grid_stations(std::size_t nx, std::size_t ny, double spacing) {
  std::vector<Station> stations;
  for (std::size_t r = 0; r < ny; ++r) {
    for (std::size_t c = 0; c < nx; ++c) {
      stations.push_back({"s" + std::to_string(r) + "_" + std::to_string(c),
                          {spacing * static_cast<double>(c), spacing * static_cast<double>(r)}});
    }
  }
  return StationSet(std::move(stations));
}

SimSpec parse_sim_spec(const nlohmann::json& j) {
  SimSpec spec;
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "white") {
    spec.kind = SimKind::White;
  } else if (kind == "separable") {
    spec.kind = SimKind::Separable;
  } else if (kind == "whittle-periodogram") {
    spec.kind = SimKind::WhittlePeriodogram;
  } else {
    fail(ErrorCode::InvalidParams, "unknown simulation kind '" + kind + "'");
  }
  spec.n = j.at("n").get<std::size_t>();
  spec.seed = j.value("seed", std::uint64_t{0});

  if (j.contains("stations")) {
    std::vector<Station> stations;
    for (const auto& s : j.at("stations")) stations.push_back({s.at("id").get<std::string>(), s.at("coords").get<Coords>()});
    spec.stations = StationSet(std::move(stations));
  } else if (j.contains("grid")) {
    const auto& g = j.at("grid");
    spec.stations = grid_stations(g.at("nx").get<std::size_t>(), g.at("ny").get<std::size_t>(), g.value("spacing", 1.0));
  } else if (spec.kind != SimKind::WhittlePeriodogram) {
    fail(ErrorCode::InvalidParams, "simulation spec needs 'stations' or 'grid'");
  }

  switch (spec.kind) {
    case SimKind::White:
      if (j.contains("sigmas")) {
        spec.sigmas = j.at("sigmas").get<std::vector<double>>();
      } else {
        spec.sigmas.assign(spec.stations.size(), j.value("sigma", 1.0));
      }
      break;
    case SimKind::Separable:
      spec.spatial.range = j.value("range", 1.0);
      spec.spatial.sill = j.value("sill", 1.0);
      spec.rho = j.value("rho", 0.0);
      spec.nugget = j.value("nugget", 0.0);
      break;
    case SimKind::WhittlePeriodogram:
      spec.params = j.at("params").get<SpectrumParams>();
      spec.lags = j.at("lags").get<std::vector<Coords>>();
      spec.pairs_per_lag = j.value("pairs_per_lag", std::size_t{1});
      break;
  }
  return spec;
}

}  // namespace stfreq
