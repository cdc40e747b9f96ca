#include "stfreq/fv.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "stfreq/error.hpp"
#include "stfreq/parallel.hpp"

namespace stfreq {

std::vector<double> Kernel::weights() const {
  const std::size_t b = half_width;
  std::vector<double> w(2 * b + 1, 0.0);
  if (b == 0) {
    w[0] = 1.0;
    return w;
  }
  switch (kind) {
    case KernelKind::Daniell:
      std::fill(w.begin(), w.end(), 1.0);
      break;
    case KernelKind::ModifiedDaniell:
      std::fill(w.begin(), w.end(), 1.0);
      w.front() = w.back() = 0.5;
      break;
    case KernelKind::Bartlett:
      for (std::size_t i = 0; i < w.size(); ++i) {
        const double r = std::abs(static_cast<double>(i) - static_cast<double>(b));
        w[i] = 1.0 - r / static_cast<double>(b + 1);
      }
      break;
  }
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  for (double& x : w) x /= total;
  return w;
}

std::string Kernel::name() const {
  switch (kind) {
    case KernelKind::Daniell: return "daniell";
    case KernelKind::ModifiedDaniell: return "modified-daniell";
    case KernelKind::Bartlett: return "bartlett-window";
  }
  return "unknown";
}

Kernel Kernel::parse(const std::string& name, std::size_t half_width) {
  if (name == "daniell") return {KernelKind::Daniell, half_width};
  if (name == "modified-daniell") return {KernelKind::ModifiedDaniell, half_width};
  if (name == "bartlett-window" || name == "bartlett") return {KernelKind::Bartlett, half_width};
  fail(ErrorCode::InvalidParams, "unknown kernel '" + name + "' (daniell | modified-daniell | bartlett-window)");
}

std::size_t default_bandwidth(std::size_t n) {
  return static_cast<std::size_t>(std::ceil(std::pow(static_cast<double>(n), 0.4)));
}

Kernel default_kernel(std::size_t n) { return {KernelKind::ModifiedDaniell, default_bandwidth(n)}; }

namespace {

void check_bandwidth(const Kernel& kernel, std::size_t n) {
  if (2 * kernel.half_width >= n) {
    fail(ErrorCode::BandwidthTooLarge, "kernel half-width " + std::to_string(kernel.half_width) +
                                           " must be below n/2 (n=" + std::to_string(n) + ")");
  }
}

void check_pairs(const LagPairSet& pairs) {
  if (pairs.empty()) fail(ErrorCode::EmptyLagSet, "no station pairs at |h|=" + std::to_string(norm(pairs.lag)));
}

std::size_t wrap(long index, std::size_t n) {
  const long len = static_cast<long>(n);
  return static_cast<std::size_t>(((index % len) + len) % len);
}

// Smoothing that leaves out the k = 0 ordinate and renormalises the
// remaining weights; out[0] is unused.
std::vector<double> smooth_excluding_zero(const std::vector<double>& raw, const Kernel& kernel) {
  const std::size_t n = raw.size();
  const auto w = kernel.weights();
  const long b = static_cast<long>(kernel.half_width);
  std::vector<double> out(n, 0.0);
  for (std::size_t k = 1; k < n; ++k) {
    double acc = 0.0;
    double mass = 0.0;
    for (long r = -b; r <= b; ++r) {
      const std::size_t idx = wrap(static_cast<long>(k) + r, n);
      if (idx == 0) continue;
      acc += w[static_cast<std::size_t>(r + b)] * raw[idx];
      mass += w[static_cast<std::size_t>(r + b)];
    }
    out[k] = acc / mass;
  }
  return out;
}

}  // namespace

std::vector<double> raw_fv(const SpectralPanel& spec, const LagPairSet& pairs) {
  check_pairs(pairs);
  const std::size_t n = spec.n();
  std::vector<double> out(n, 0.0);
  for (const auto& [i, j] : pairs.pairs) {
    if (i >= spec.m() || j >= spec.m()) fail(ErrorCode::IndexOutOfRange, "pair index outside the spectral panel");
    for (std::size_t k = 0; k < n; ++k) out[k] += std::norm(spec.coeffs(i, k) - spec.coeffs(j, k));
  }
  const double inv = 1.0 / static_cast<double>(pairs.count());
  for (double& x : out) x *= inv;
  return out;
}

std::vector<double> smooth_fv(const std::vector<double>& raw, const Kernel& kernel) {
  const std::size_t n = raw.size();
  check_bandwidth(kernel, n);
  const auto w = kernel.weights();
  const long b = static_cast<long>(kernel.half_width);
  std::vector<double> out(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    double acc = 0.0;
    for (long r = -b; r <= b; ++r) acc += w[static_cast<std::size_t>(r + b)] * raw[wrap(static_cast<long>(k) + r, n)];
    out[k] = acc;
  }
  return out;
}

std::vector<double> fv_variance(const SpectralPanel& spec, const LagPairSet& pairs, const Kernel& kernel) {
  check_pairs(pairs);
  const std::size_t n = spec.n();
  check_bandwidth(kernel, n);
  const auto w = kernel.weights();
  const long b = static_cast<long>(kernel.half_width);
  const std::size_t width = 2 * kernel.half_width + 1;
  const std::size_t npairs = pairs.count();

  // Increment DFTs, one row per frequency so inner products are contiguous.
  ComplexMatrix x(n, npairs);
  for (std::size_t p = 0; p < npairs; ++p) {
    const auto [i, j] = pairs.pairs[p];
    for (std::size_t k = 0; k < n; ++k) x(k, p) = spec.coeffs(i, k) - spec.coeffs(j, k);
  }

  // gram[a][d] = |<x_a, x_{a+d}>|^2 for d = 0..2b.
  std::vector<double> gram(n * width);
  parallel_for(n, [&](std::size_t a) {
    for (std::size_t d = 0; d < width; ++d) {
      const std::size_t c = (a + d) % n;
      gram[a * width + d] = std::norm(x.row(a).dot(x.row(c)));
    }
  });
  auto gram_at = [&](long a, long d) {
    if (d < 0) {
      a += d;
      d = -d;
    }
    return gram[wrap(a, n) * width + static_cast<std::size_t>(d)];
  };

  double c = 0.0;
  for (double wr : w) c += wr * wr;

  // F(j) = sum_{p,q} |g_pq(w_j)|^2, debiased.
  std::vector<double> frob(n);
  parallel_for(n, [&](std::size_t j) {
    double sum_sq = 0.0;
    double trace = 0.0;
    for (long r = -b; r <= b; ++r) {
      const double wr = w[static_cast<std::size_t>(r + b)];
      trace += wr * std::sqrt(gram_at(static_cast<long>(j) + r, 0));
      for (long s = -b; s <= b; ++s) {
        sum_sq += wr * w[static_cast<std::size_t>(s + b)] * gram_at(static_cast<long>(j) + r, s - r);
      }
    }
    // With a single ordinate (c = 1) the two moments coincide; fall back to
    // the one-pair exact form sum_sq / 2.
    frob[j] = c < 1.0 ? std::max(0.0, (sum_sq - c * trace * trace) / (1.0 - c * c)) : sum_sq / (1.0 + c);
  });

  const double norm2 = static_cast<double>(npairs) * static_cast<double>(npairs);
  std::vector<double> out(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    double acc = 0.0;
    for (long r = -b; r <= b; ++r) {
      const double wr = w[static_cast<std::size_t>(r + b)];
      acc += wr * wr * frob[wrap(static_cast<long>(k) + r, n)];
    }
    out[k] = acc / norm2;
  }
  return out;
}

FrequencyVariogram estimate_fv(const SpectralPanel& spec, const LagPairSet& pairs, const Kernel& kernel) {
  FrequencyVariogram fv;
  fv.lag = pairs.lag;
  fv.tolerance = pairs.tolerance;
  fv.count = pairs.count();
  fv.kernel = kernel;
  fv.raw = raw_fv(spec, pairs);
  fv.smoothed = smooth_fv(fv.raw, kernel);
  fv.variance = fv_variance(spec, pairs, kernel);
  fv.freqs.resize(spec.n());
  for (std::size_t k = 0; k < spec.n(); ++k) fv.freqs[k] = fourier_frequency(k, spec.n());
  return fv;
}

double integrate_spectrum(const std::vector<double>& values) {
  double sum = 0.0;
  for (double v : values) sum += v;
  return 2.0 * std::numbers::pi * sum / static_cast<double>(values.size());
}

NuggetScan nugget_scan(const SpectralPanel& spec, const StationSet& stations, const std::vector<Coords>& lags,
                       double tolerance, const Kernel& kernel) {
  const std::size_t n = spec.n();
  check_bandwidth(kernel, n);
  NuggetScan scan;
  for (const Coords& h : lags) {
    const LagPairSet pairs = build_lag_pairs(stations, h, tolerance);
    if (pairs.empty()) {
      warn("nugget scan: no station pairs at |h|=" + format_double(norm(h)) + ", lag skipped");
      continue;
    }
    const auto raw = raw_fv(spec, pairs);
    NuggetRow row;
    row.h_norm = norm(h);
    row.h = h;
    row.count = pairs.count();
    row.integrated_fv = integrate_spectrum(smooth_fv(raw, kernel));
    const auto nz = smooth_excluding_zero(raw, kernel);
    row.integrated_fv_nonzero =
        2.0 * std::numbers::pi * std::accumulate(nz.begin() + 1, nz.end(), 0.0) / static_cast<double>(n - 1);
    scan.rows.push_back(std::move(row));
  }
  std::stable_sort(scan.rows.begin(), scan.rows.end(),
                   [](const NuggetRow& a, const NuggetRow& b) { return a.h_norm < b.h_norm; });

  // Average rows sharing a norm, then fit through the two smallest nonzero norms.
  std::vector<std::pair<double, double>> points;
  std::size_t i = 0;
  while (i < scan.rows.size()) {
    std::size_t j = i;
    double sum = 0.0;
    while (j < scan.rows.size() && std::abs(scan.rows[j].h_norm - scan.rows[i].h_norm) <= 1e-12 * (1.0 + scan.rows[i].h_norm)) {
      sum += scan.rows[j].integrated_fv_nonzero;
      ++j;
    }
    if (scan.rows[i].h_norm > 0.0) points.emplace_back(scan.rows[i].h_norm, sum / static_cast<double>(j - i));
    i = j;
  }
  if (points.size() < 2) {
    fail(ErrorCode::InsufficientLags, "nugget scan needs at least two distinct nonzero lag norms with pairs");
  }
  const auto [r1, y1] = points[0];
  const auto [r2, y2] = points[1];
  scan.slope = (y2 - y1) / (r2 - r1);
  scan.intercept = y1 - scan.slope * r1;
  return scan;
}

NuggetScan nugget_scan(const Panel& panel, const std::vector<Coords>& lags, double tolerance, const Kernel& kernel) {
  return nugget_scan(dft_all(panel), panel.stations(), lags, tolerance, kernel);
}

Eigen::MatrixXd fv_matrix(const SpectralPanel& spec, const Kernel& kernel, std::size_t k) {
  const std::size_t n = spec.n();
  const std::size_t m = spec.m();
  check_bandwidth(kernel, n);
  if (k >= n) fail(ErrorCode::IndexOutOfRange, "frequency index out of range");
  const auto w = kernel.weights();
  const long b = static_cast<long>(kernel.half_width);
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(m, m);
  for (long r = -b; r <= b; ++r) {
    const std::size_t idx = wrap(static_cast<long>(k) + r, n);
    const double wr = w[static_cast<std::size_t>(r + b)];
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = i + 1; j < m; ++j) {
        const double v = wr * std::norm(spec.coeffs(i, idx) - spec.coeffs(j, idx));
        g(i, j) += v;
        g(j, i) += v;
      }
    }
  }
  return g;
}

double cnd_form(const Eigen::MatrixXd& g, const Eigen::VectorXcd& a) {
  if (g.rows() != a.size() || g.cols() != a.size()) fail(ErrorCode::DimensionMismatch, "weight vector length differs from matrix size");
  return (a.transpose() * g.cast<Complex>() * a.conjugate()).value().real();
}

}  // namespace stfreq
