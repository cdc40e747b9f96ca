#include <gtest/gtest.h>

#include <numeric>
#include <random>

#include "oracles.hpp"
#include "stfreq/dft.hpp"
#include "stfreq/error.hpp"
#include "stfreq/fv.hpp"
#include "stfreq/moments.hpp"
#include "stfreq/simulate.hpp"

using namespace stfreq;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an stfreq::Error";
  return ErrorCode::Io;
}

// Pairs (2p+1, 2p) ten units apart so h = (1, 0) matches only within a pair.
StationSet disjoint_pairs(std::size_t count) {
  std::vector<Station> s;
  for (std::size_t p = 0; p < count; ++p) {
    s.push_back({"a" + std::to_string(p), {10.0 * static_cast<double>(p), 0.0}});
    s.push_back({"b" + std::to_string(p), {10.0 * static_cast<double>(p) + 1.0, 0.0}});
  }
  return StationSet(std::move(s));
}

}  // namespace

TEST(Kernel, WeightsAreNormalisedSymmetricNonnegative) {
  for (auto kind : {KernelKind::Daniell, KernelKind::ModifiedDaniell, KernelKind::Bartlett}) {
    for (std::size_t b : {0u, 1u, 3u, 10u}) {
      const auto w = Kernel{kind, b}.weights();
      ASSERT_EQ(w.size(), 2 * b + 1);
      EXPECT_NEAR(std::accumulate(w.begin(), w.end(), 0.0), 1.0, 1e-15);
      for (std::size_t r = 0; r < w.size(); ++r) {
        EXPECT_GE(w[r], 0.0);
        EXPECT_EQ(w[r], w[w.size() - 1 - r]);
      }
    }
  }
  const auto md = Kernel{KernelKind::ModifiedDaniell, 2}.weights();
  EXPECT_DOUBLE_EQ(md[0], 0.125);
  EXPECT_DOUBLE_EQ(md[2], 0.25);
}

TEST(Kernel, ParseNamesAndDefaults) {
  EXPECT_EQ(Kernel::parse("daniell", 2).kind, KernelKind::Daniell);
  EXPECT_EQ(Kernel::parse("modified-daniell", 2).kind, KernelKind::ModifiedDaniell);
  EXPECT_EQ(Kernel::parse("bartlett-window", 2).kind, KernelKind::Bartlett);
  EXPECT_EQ(code_of([] { Kernel::parse("tukey", 2); }), ErrorCode::InvalidParams);
  EXPECT_EQ(default_bandwidth(512), 13u);  // ceil(512^0.4) = ceil(12.13)
  EXPECT_EQ(default_kernel(100).kind, KernelKind::ModifiedDaniell);
}

TEST(SmoothFv, ConstantIdentityAndBandwidthLimit) {
  const std::vector<double> c(20, 1.75);
  for (double v : smooth_fv(c, {KernelKind::Bartlett, 4})) EXPECT_NEAR(v, 1.75, 1e-15);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u;
  std::vector<double> x(15);
  for (auto& v : x) v = u(rng);
  EXPECT_EQ(smooth_fv(x, {KernelKind::Daniell, 0}), x);
  EXPECT_EQ(code_of([&] { smooth_fv(x, {KernelKind::Daniell, 8}); }), ErrorCode::BandwidthTooLarge);
}

TEST(SmoothFv, MonotoneAndLinear) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u;
  std::vector<double> a(40), b(40), sum(40);
  for (std::size_t k = 0; k < 40; ++k) {
    a[k] = u(rng);
    b[k] = a[k] + u(rng);
    sum[k] = a[k] + b[k];
  }
  const Kernel kern{KernelKind::ModifiedDaniell, 5};
  const auto sa = smooth_fv(a, kern), sb = smooth_fv(b, kern), ss = smooth_fv(sum, kern);
  for (std::size_t k = 0; k < 40; ++k) {
    EXPECT_LE(sa[k], sb[k]);
    EXPECT_NEAR(ss[k], sa[k] + sb[k], 1e-14);
  }
}

TEST(RawFv, ZeroForSelfPairsAndDuplicates) {
  std::mt19937_64 rng(3);
  const Panel p = oracle::random_panel(rng, 6, 32);
  const SpectralPanel s = dft_all(p);
  for (double v : raw_fv(s, build_lag_pairs(p.stations(), {0, 0}, 0.0))) EXPECT_EQ(v, 0.0);

  RealMatrix v = p.values();
  v.row(1) = v.row(0);
  const SpectralPanel dup = dft_all(Panel(p.stations(), v));
  LagPairSet set{{0, 0}, 0.0, {{0, 1}}};
  for (double x : raw_fv(dup, set)) EXPECT_EQ(x, 0.0);
  EXPECT_EQ(code_of([&] { raw_fv(s, LagPairSet{{9, 9}, 0.0, {}}); }), ErrorCode::EmptyLagSet);
}

TEST(RawFv, WhiteNoiseLevel) {
  const StationSet st = oracle::line_stations(4);
  const std::size_t n = 64;
  double sum = 0.0;
  std::size_t terms = 0;
  for (std::uint64_t rep = 0; rep < 500; ++rep) {
    const SpectralPanel s = dft_all(simulate_white(st, n, std::vector<double>(4, 1.0), 40 + rep));
    const auto raw = raw_fv(s, build_lag_pairs(st, {1, 0}, 0.0));
    for (std::size_t k = 1; k < n; ++k, ++terms) sum += raw[k];
  }
  EXPECT_NEAR(sum / static_cast<double>(terms) * oracle::kPi, 1.0, 0.05);
}

TEST(RawFv, ParsevalBridgeToMatheron) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 10; ++trial) {
    const Panel p = oracle::random_panel(rng, 7, 40 + 13 * trial);
    for (const Coords& h : {Coords{1, 0}, Coords{1, -1}, Coords{0, 2}}) {
      const LagPairSet pairs = build_lag_pairs(p.stations(), h, 0.0);
      if (pairs.empty()) continue;
      const double lhs = integrate_spectrum(raw_fv(dft_all(p), pairs));
      const double rhs = matheron_variogram(p, {h, 0, 0.0}).value;
      EXPECT_NEAR(lhs / rhs, 1.0, 1e-10);
    }
  }
}

TEST(FvVariance, NonnegativeAndErrors) {
  std::mt19937_64 rng(5);
  const Panel p = oracle::random_panel(rng, 8, 50);
  const SpectralPanel s = dft_all(p);
  const LagPairSet pairs = build_lag_pairs(p.stations(), {1, 0}, 0.0);
  ASSERT_FALSE(pairs.empty());
  for (double v : fv_variance(s, pairs, {KernelKind::ModifiedDaniell, 4})) EXPECT_GE(v, 0.0);
  EXPECT_EQ(code_of([&] { fv_variance(s, pairs, {KernelKind::Daniell, 25}); }), ErrorCode::BandwidthTooLarge);
  EXPECT_EQ(code_of([&] { fv_variance(s, LagPairSet{{7, 7}, 0.0, {}}, {KernelKind::Daniell, 2}); }),
            ErrorCode::EmptyLagSet);
}

TEST(FvVariance, MatchesMonteCarloVariance) {
  const StationSet st = disjoint_pairs(5);
  const std::size_t n = 128;
  const Kernel kern{KernelKind::ModifiedDaniell, 6};
  const std::vector<std::size_t> ks{20, 32, 44};
  std::vector<double> sum(ks.size()), sum_sq(ks.size()), predicted(ks.size());
  const int reps = 500;
  for (int rep = 0; rep < reps; ++rep) {
    const SpectralPanel s = dft_all(simulate_white(st, n, std::vector<double>(st.size(), 1.0), 900 + rep));
    const auto fv = estimate_fv(s, build_lag_pairs(st, {1, 0}, 0.0), kern);
    for (std::size_t q = 0; q < ks.size(); ++q) {
      sum[q] += fv.smoothed[ks[q]];
      sum_sq[q] += fv.smoothed[ks[q]] * fv.smoothed[ks[q]];
      predicted[q] += fv.variance[ks[q]] / reps;
    }
  }
  for (std::size_t q = 0; q < ks.size(); ++q) {
    const double mean = sum[q] / reps;
    const double empirical = sum_sq[q] / reps - mean * mean;
    const double ratio = predicted[q] / empirical;
    EXPECT_GT(ratio, 1.0 / 1.5) << "k=" << ks[q];
    EXPECT_LT(ratio, 1.5) << "k=" << ks[q];
  }
}

TEST(FvVariance, HalvesWhenPairsDouble) {
  const std::size_t n = 128;
  const Kernel kern{KernelKind::ModifiedDaniell, 6};
  auto mean_prediction = [&](std::size_t npairs) {
    const StationSet st = disjoint_pairs(npairs);
    double acc = 0.0;
    for (int rep = 0; rep < 200; ++rep) {
      const SpectralPanel s = dft_all(simulate_white(st, n, std::vector<double>(st.size(), 1.0), 3000 + rep));
      const auto v = fv_variance(s, build_lag_pairs(st, {1, 0}, 0.0), kern);
      for (std::size_t k = 10; k < 55; ++k) acc += v[k];
    }
    return acc;
  };
  EXPECT_NEAR(mean_prediction(10) / mean_prediction(5), 0.5, 0.05);
}

TEST(NuggetScan, SingleLagIsInsufficient) {
  std::mt19937_64 rng(6);
  const Panel p = oracle::random_panel(rng, 6, 32);
  EXPECT_EQ(code_of([&] { nugget_scan(p, {{1, 0}}, 0.0, default_kernel(32)); }), ErrorCode::InsufficientLags);
}

TEST(NuggetScan, RowsSortedAndEmptyLagsSkipped) {
  const StationSet grid = grid_stations(4, 4, 1.0);
  const Panel p = simulate_separable(grid, 64, {3.0, 1.0}, 0.3, 12);
  std::vector<std::string> warnings;
  auto previous = set_warning_handler([&](const std::string& m) { warnings.push_back(m); });
  const NuggetScan scan = nugget_scan(p, {{2, 0}, {9, 9}, {1, 0}, {0, 1}}, 0.0, default_kernel(64));
  set_warning_handler(previous);
  ASSERT_EQ(scan.rows.size(), 3u);
  EXPECT_EQ(warnings.size(), 1u);
  EXPECT_LE(scan.rows[0].h_norm, scan.rows[1].h_norm);
  EXPECT_LE(scan.rows[1].h_norm, scan.rows[2].h_norm);
  // the line passes through the averaged norm-1 point and the norm-2 point
  const double y1 = 0.5 * (scan.rows[0].integrated_fv_nonzero + scan.rows[1].integrated_fv_nonzero);
  const double y2 = scan.rows[2].integrated_fv_nonzero;
  EXPECT_NEAR(scan.intercept + scan.slope, y1, 1e-12);
  EXPECT_NEAR(scan.intercept + 2 * scan.slope, y2, 1e-12);
}

TEST(NuggetScan, IntegratedFvMatchesSmoothedSum) {
  const StationSet grid = grid_stations(3, 3, 1.0);
  const Panel p = simulate_separable(grid, 50, {3.0, 1.0}, 0.3, 13);
  const Kernel kern = default_kernel(50);
  const NuggetScan scan = nugget_scan(p, {{1, 0}, {2, 0}}, 0.0, kern);
  const auto raw = raw_fv(dft_all(p), build_lag_pairs(grid, {1, 0}, 0.0));
  EXPECT_NEAR(scan.rows[0].integrated_fv, integrate_spectrum(smooth_fv(raw, kern)), 1e-12);
}

TEST(FvMatrix, ConditionallyNegativeDefinite) {
  const StationSet grid = grid_stations(3, 3, 1.0);
  const Panel p = simulate_separable(grid, 64, {2.0, 1.0}, 0.6, 21);
  const SpectralPanel s = dft_all(p);
  std::mt19937_64 rng(22);
  std::normal_distribution<double> z;
  for (std::size_t k = 0; k < 64; k += 7) {
    const Eigen::MatrixXd g = fv_matrix(s, default_kernel(64), k);
    EXPECT_TRUE(g.isApprox(g.transpose()));
    for (int trial = 0; trial < 20; ++trial) {
      Eigen::VectorXcd a(9);
      for (Eigen::Index i = 0; i < 9; ++i) a[i] = {z(rng), z(rng)};
      a.array() -= a.mean();
      EXPECT_LE(cnd_form(g, a), 1e-8);
    }
  }
}
