// Acceptance checks. Prints one line per criterion and exits with the number
// of failures. Run with --criterion N for a single check.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "oracles.hpp"
#include "stfreq/dft.hpp"
#include "stfreq/error.hpp"
#include "stfreq/fv.hpp"
#include "stfreq/indeptest.hpp"
#include "stfreq/moments.hpp"
#include "stfreq/simulate.hpp"
#include "stfreq/special.hpp"
#include "stfreq/specmodel.hpp"
#include "stfreq/whittle.hpp"

using namespace stfreq;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

// 1. (2 pi / n) sum_k raw FV equals the u = 0 Matheron estimate on the same pairs.
Outcome parseval_bridge() {
  std::mt19937_64 rng(101);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t m = 2 + static_cast<std::size_t>(trial % 9);
    const std::size_t n = 16 + static_cast<std::size_t>(trial) * 12;  // up to 244
    const Panel p = oracle::random_panel(rng, m, n, 4);
    // lag taken from an existing pair so the set is never empty
    const Coords& a = p.stations()[0].coords;
    const Coords& b = p.stations()[1].coords;
    const Coords h{a[0] - b[0], a[1] - b[1]};
    const LagPairSet pairs = build_lag_pairs(p.stations(), h, 0.0);
    const double freq = integrate_spectrum(raw_fv(dft_all(p), pairs));
    const double time = matheron_variogram(p, {h, 0, 0.0}).value;
    worst = std::max(worst, rel(freq, time));
  }
  return {worst <= 1e-10, "max relative error " + fmt(worst) + " over 20 panels (tol 1e-10)"};
}

// 2. FFT path against the O(n^2) sum.
Outcome dft_correctness() {
  std::mt19937_64 rng(102);
  std::normal_distribution<double> z;
  double worst = 0.0;
  for (std::size_t n : {2u, 3u, 8u, 15u, 16u, 17u, 128u}) {
    std::vector<double> y(n);
    for (auto& v : y) v = z(rng);
    const auto fast = dft(y.data(), n);
    const auto slow = oracle::naive_dft(y);
    double diff = 0.0, scale = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      diff = std::max(diff, std::abs(fast[k] - slow[k]));
      scale = std::max(scale, std::abs(slow[k]));
    }
    worst = std::max(worst, diff / scale);
  }
  return {worst <= 1e-10, "max relative error " + fmt(worst) + " for n in {2,3,8,15,16,17,128} (tol 1e-10)"};
}

// 3. Moment estimators equal the exhaustive quadruple scan bit for bit.
Outcome moment_enumeration() {
  std::mt19937_64 rng(103);
  std::size_t checked = 0, mismatches = 0;
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t m = 2 + static_cast<std::size_t>(trial % 4), n = 3 + static_cast<std::size_t>(trial % 8);
    const Panel p = oracle::random_panel(rng, m, n, 3);
    for (const Coords& h : {Coords{1, 0}, Coords{0, 1}, Coords{-1, 1}, Coords{0, 0}}) {
      for (long u : {-1L, 0L, 2L}) {
        const oracle::Enumerated e = oracle::enumerate_moments(p, h, u);
        if (e.count == 0) continue;
        const auto g = matheron_variogram(p, {h, u, 0.0});
        const auto c = sample_covariance(p, {h, u, 0.0});
        ++checked;
        if (g.count != e.count || g.value != e.gamma || c.value != e.cov) ++mismatches;
      }
    }
  }
  return {checked > 0 && mismatches == 0,
          std::to_string(mismatches) + " mismatches in " + std::to_string(checked) + " (panel, h, u) cases"};
}

// 4. K_nu(x) against the integral representation.
Outcome bessel_accuracy() {
  double worst = 0.0;
  for (double nu : {0.0, 0.5, 1.0, 1.5, 2.5}) {
    for (double x : {0.1, 0.5, 1.0, 2.0, 5.0, 10.0}) worst = std::max(worst, rel(bessel_k(nu, x), oracle::bessel_k_integral(nu, x)));
  }
  return {worst <= 1e-8, "max relative error " + fmt(worst) + " on the 5 x 6 grid (tol 1e-8)"};
}

// 5. Closed-form temporal spectrum, the lambda-marginal of the space-time
// spectrum and the cross-spectrum at vanishing separation agree, the
// cross-spectrum matches an independent Hankel transform, and the unit
// checkpoint K_1(1) / (8 pi^2) holds.
Outcome spectrum_triangle() {
  const Coords h{1.0, 0.0};
  double worst = 0.0;
  for (double nu : {1.0, 1.5, 2.0}) {
    SpectrumParams p;
    p.nu = nu;
    p.sigma_eta2 = 1.3;
    p.poly = {0.8, 0.5, 0.7, 0.0, 0.0};
    const double omega = 0.9;
    const double temporal = temporal_spectrum(omega, p, h);
    const double marginal = marginalize_oracle(omega, p, h);
    const double limit = cross_spectrum({{1e-6, 0.0}, omega, p}, h);
    worst = std::max({worst, rel(temporal, marginal), rel(limit, temporal), rel(limit, marginal)});
    auto radial = [&](double r) { return spectrum_st({r, 0.0}, omega, p, h); };
    for (double r : {0.5, 1.0, 2.0}) worst = std::max(worst, rel(cross_spectrum({{r, 0.0}, omega, p}, h), oracle::hankel_2d(radial, r)));
  }
  SpectrumParams unit;
  unit.poly = {1.0, 0.0, 0.0, 0.0, 0.0};
  const double checkpoint = cross_spectrum({{1.0, 0.0}, 0.0, unit}, h);
  const double target = oracle::bessel_k_integral(1.0, 1.0) / (8.0 * oracle::kPi * oracle::kPi);
  const double cp = rel(checkpoint, target);
  return {worst <= 1e-4 && cp <= 1e-4 && rel(checkpoint, 0.0076233) <= 1e-4,
          "max pairwise relative gap " + fmt(worst) + ", checkpoint " + fmt(checkpoint, 8) + " vs " + fmt(target, 8) +
              " (tol 1e-4)"};
}

// 6. Smoothed FV of a separable exponential x AR(1) field against
// 2 [C_S(0) - C_S(h)] f_T(w).
Outcome separable_fv() {
  const StationSet grid = grid_stations(5, 5, 1.0);
  const std::size_t n = 512, reps = 100;
  const double rho = 0.5, range = 2.0;
  const Coords h{1.0, 0.0};
  const LagPairSet pairs = build_lag_pairs(grid, h, 0.0);
  const Kernel kernel = default_kernel(n);
  std::vector<double> mean(n, 0.0);
  for (std::size_t rep = 0; rep < reps; ++rep) {
    const Panel p = simulate_separable(grid, n, {range, 1.0}, rho, 6000 + rep);
    const auto g = smooth_fv(raw_fv(dft_all(p), pairs), kernel);
    for (std::size_t k = 0; k < n; ++k) mean[k] += g[k] / static_cast<double>(reps);
  }
  const double spatial = 2.0 * (1.0 - std::exp(-1.0 / range));
  double worst = 0.0;
  for (std::size_t k = 0; k <= n / 2; ++k) {
    const double w = fourier_frequency(k, n);
    if (!(w > 0.2 * oracle::kPi && w < 0.8 * oracle::kPi)) continue;
    const double f_t = (1 - rho * rho) / (2 * oracle::kPi * std::norm(1.0 - rho * std::polar(1.0, -w)));
    worst = std::max(worst, rel(mean[k], spatial * f_t));
  }
  return {worst <= 0.10, "sup relative error " + fmt(worst) + " on (0.2pi, 0.8pi), 100 reps (tol 0.10)"};
}

// 7. Whittle recovery with the full default parameter set free.
Outcome whittle_recovery() {
  SpectrumParams truth;
  truth.sigma_eta2 = 1.0;
  truth.poly = {1.0, 0.5, 0.5, 0.0, 0.0};
  const std::vector<Coords> lags{{1, 0}, {2, 0}, {3, 0}};
  const std::size_t n = 512, reps = 200;
  const ParamVector tru = pack(truth);

  auto study = [&](const ModelTemplate& model, std::size_t& covered, std::size_t& grad_ok, std::size_t& no_cov,
                   std::string& status) {
    covered = grad_ok = no_cov = 0;
    for (std::size_t rep = 0; rep < reps; ++rep) {
      const auto data = simulate_whittle_periodograms(truth, lags, 20, n, 7000 + rep);
      const FitResult r = fit(make_problem(n, data, model));
      if (r.gradient_norm < 1e-4 * (1 + std::abs(r.criterion_value))) ++grad_ok;
      if (!r.covariance) {
        ++no_cov;
        status = r.covariance_status;
        continue;
      }
      const auto se = r.std_errors();
      const ParamVector est = pack(r.psi_hat);
      bool inside = true;
      for (std::size_t a = 0; a < r.free.size(); ++a) inside = inside && std::abs(est[r.free[a]] - tru[r.free[a]]) <= 3 * se[a];
      if (inside) ++covered;
    }
  };

  ModelTemplate full;
  full.init = truth;
  std::size_t covered = 0, grad_ok = 0, no_cov = 0;
  std::string status;
  study(full, covered, grad_ok, no_cov, status);
  const bool pass = covered >= static_cast<std::size_t>(0.9 * reps) && grad_ok == reps;

  // With a0 held at its true value the remaining three are identified.
  ModelTemplate fixed = full;
  fixed.free = {true, false, true, true, false, false, false};
  std::size_t covered_f = 0, grad_f = 0, no_cov_f = 0;
  std::string status_f;
  study(fixed, covered_f, grad_f, no_cov_f, status_f);

  std::ostringstream d;
  d << "all four free: " << covered << "/" << reps << " within 3 SE, " << grad_ok << "/" << reps << " gradient ok, "
    << no_cov << " without covariance";
  if (no_cov > 0) d << " (" << status << ")";
  d << "; informational, a0 fixed: " << covered_f << "/" << reps << " within 3 SE, " << grad_f << "/" << reps
    << " gradient ok";
  return {pass, d.str()};
}

// 8. Moments, size and power of the independence test.
Outcome independence() {
  const auto a = lambda_moments(2, 2, 10);
  const double b = lambda_moments(3, 4, 1).mean;
  const bool moments_ok = std::abs(a.mean - 0.25) < 1e-15 && std::abs(a.variance - 0.00625) < 1e-15 &&
                          std::abs(b - (2.0 / 8 + 1.0 / 7)) < 1e-15;

  const StationSet tri({{"a", {0.0, 0.0}}, {"b", {1.0, 0.0}}, {"c", {0.5, std::sqrt(3.0) / 2}}});
  const std::size_t reps = 1000;
  std::size_t size_rej = 0, power_rej = 0;
  const double range = -1.0 / std::log(0.7);  // exp(-1 / range) = 0.7 at unit distance
  for (std::size_t rep = 0; rep < reps; ++rep) {
    if (independence_test(simulate_white(tri, 121, {1.0, 1.0, 1.0}, 8000 + rep), 2, 0.05).reject) ++size_rej;
  }
  for (std::size_t rep = 0; rep < reps; ++rep) {
    if (independence_test(simulate_separable(tri, 121, {range, 1.0}, 0.5, 9000 + rep), 2, 0.05).reject) ++power_rej;
  }
  const double size = static_cast<double>(size_rej) / reps, power = static_cast<double>(power_rej) / reps;
  const bool pass = moments_ok && size >= 0.03 && size <= 0.07 && power > 0.5;
  return {pass, std::string("moments ") + (moments_ok ? "exact" : "WRONG") + ", size " + fmt(size) +
                    " (need [0.03, 0.07]), power " + fmt(power) + " (need > 0.5)"};
}

// 9. Nugget intercept with and without additive white noise.
Outcome nugget_detection() {
  const StationSet grid = grid_stations(5, 5, 1.0);
  const std::vector<Coords> lags{{1, 0}, {0, 1}, {2, 0}, {0, 2}};
  const std::size_t n = 256, reps = 100;
  const double range = 1000.0, rho = 0.5, nugget = 0.1;
  const Kernel kernel = default_kernel(n);
  auto study = [&](double noise, std::uint64_t base) {
    std::vector<double> v;
    for (std::size_t rep = 0; rep < reps; ++rep) {
      const Panel p = simulate_separable(grid, n, {range, 1.0}, rho, base + rep, noise);
      v.push_back(nugget_scan(p, lags, 0.0, kernel).intercept);
    }
    double mean = 0.0, var = 0.0;
    for (double x : v) mean += x / reps;
    for (double x : v) var += (x - mean) * (x - mean) / (reps - 1);
    return std::make_pair(mean, std::sqrt(var / reps));
  };
  const auto [noisy, noisy_se] = study(nugget, 10000);
  const auto [clean, clean_se] = study(0.0, 20000);
  const double target = 2 * nugget;
  const bool pass = rel(noisy, target) <= 0.10 && std::abs(clean) <= 2 * clean_se;
  return {pass, "noisy intercept " + fmt(noisy) + " vs " + fmt(target) + " (rel " + fmt(rel(noisy, target)) +
                    ", tol 0.10); clean intercept " + fmt(clean) + " with MC SE " + fmt(clean_se)};
}

// 10. Sample-level conditional negative definiteness of the smoothed FV matrix.
Outcome cnd() {
  const StationSet grid = grid_stations(4, 4, 1.0);
  const std::size_t n = 128;
  const Panel p = simulate_separable(grid, n, {2.0, 1.0}, 0.4, 424242);
  const SpectralPanel s = dft_all(p);
  const Kernel kernel = default_kernel(n);
  std::mt19937_64 rng(110);
  std::normal_distribution<double> z;
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < n; ++k) {
    const Eigen::MatrixXd g = fv_matrix(s, kernel, k);
    for (int trial = 0; trial < 20; ++trial) {
      Eigen::VectorXcd a(static_cast<Eigen::Index>(grid.size()));
      for (Eigen::Index i = 0; i < a.size(); ++i) a[i] = {z(rng), z(rng)};
      a.array() -= a.mean();
      worst = std::max(worst, cnd_form(g, a));
    }
  }
  return {worst <= 1e-8, "largest quadratic form " + fmt(worst) + " over " + std::to_string(n) +
                             " frequencies x 20 weight vectors (must be <= 1e-8)"};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance checks"};
  int only = 0;
  app.add_option("--criterion", only, "Run a single criterion (1-10)")->check(CLI::Range(1, 10));
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::function<Outcome()>> checks = {parseval_bridge,   dft_correctness,  moment_enumeration,
                                                        bessel_accuracy,   spectrum_triangle, separable_fv,
                                                        whittle_recovery,  independence,      nugget_detection,
                                                        cnd};
  set_warning_handler([](const std::string&) {});
  int failures = 0;
  for (int c = 1; c <= 10; ++c) {
    if (only != 0 && c != only) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = checks[static_cast<std::size_t>(c - 1)]();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!o.pass) ++failures;
    std::cout << "criterion " << c << ": " << (o.pass ? "PASS" : "FAIL") << " | " << o.detail << " | " << fmt(secs)
              << " s" << std::endl;
  }
  return failures;
}
