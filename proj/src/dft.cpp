#include "stfreq/dft.hpp"

#include <cmath>
#include <mutex>
#include <numbers>
#include <string>

#include <fftw3.h>

#include "stfreq/error.hpp"
#include "stfreq/parallel.hpp"

namespace stfreq {

namespace {

// fftw planning is not thread-safe; execution on a plan is.
std::mutex planner_mutex;

struct RealPlan {
  std::size_t n;
  double* in = nullptr;
  fftw_complex* out = nullptr;
  fftw_plan plan = nullptr;

  explicit RealPlan(std::size_t len) : n(len) {
    std::lock_guard lock(planner_mutex);
    in = fftw_alloc_real(n);
    out = fftw_alloc_complex(n / 2 + 1);
    plan = fftw_plan_dft_r2c_1d(static_cast<int>(n), in, out, FFTW_ESTIMATE);
  }
  ~RealPlan() {
    std::lock_guard lock(planner_mutex);
    fftw_destroy_plan(plan);
    fftw_free(in);
    fftw_free(out);
  }
  RealPlan(const RealPlan&) = delete;
  RealPlan& operator=(const RealPlan&) = delete;
};

void check_index(const SpectralPanel& spec, std::size_t i) {
  if (i >= spec.m()) {
    fail(ErrorCode::IndexOutOfRange,
         "station index " + std::to_string(i) + " out of range for m=" + std::to_string(spec.m()));
  }
}

// Transforms one series into out[0..n), applying the t = 1..n phase and the
// (2 pi n)^{-1/2} scale, then mirrors the upper half by conjugation.
void transform_into(RealPlan& plan, const double* series, Complex* out) {
  const std::size_t n = plan.n;
  std::copy(series, series + n, plan.in);
  fftw_execute(plan.plan);
  const double scale = 1.0 / std::sqrt(2.0 * std::numbers::pi * static_cast<double>(n));
  for (std::size_t k = 0; k <= n / 2; ++k) {
    const Complex raw(plan.out[k][0], plan.out[k][1]);
    const Complex phase = std::polar(1.0, -fourier_frequency(k, n));
    out[k] = raw * phase * scale;
  }
  // w = pi for even n: the phase is exactly -1 and the value is real.
  if (n % 2 == 0) out[n / 2] = Complex(-plan.out[n / 2][0] * scale, 0.0);
  for (std::size_t k = n / 2 + 1; k < n; ++k) out[k] = std::conj(out[n - k]);
}

}  // namespace

double fourier_frequency(std::size_t k, std::size_t n) {
  return 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
}

std::vector<Complex> dft(const double* series, std::size_t n) {
  if (n == 0) return {};
  RealPlan plan(n);
  std::vector<Complex> out(n);
  transform_into(plan, series, out.data());
  return out;
}

SpectralPanel dft_all(const Panel& panel) {
  const std::size_t m = panel.m();
  const std::size_t n = panel.n();
  if (n < 2) fail(ErrorCode::TooFewObservations, "dft requires n >= 2");
  SpectralPanel spec{ComplexMatrix(m, n)};
  parallel_for(m, [&](std::size_t i) {
    RealPlan plan(n);
    transform_into(plan, panel.values().row(i).data(), spec.coeffs.row(i).data());
  });
  return spec;
}

std::vector<double> periodogram(const SpectralPanel& spec, std::size_t i) {
  check_index(spec, i);
  std::vector<double> out(spec.n());
  for (std::size_t k = 0; k < spec.n(); ++k) out[k] = std::norm(spec.coeffs(i, k));
  return out;
}

std::vector<Complex> cross_periodogram(const SpectralPanel& spec, std::size_t i, std::size_t j) {
  check_index(spec, i);
  check_index(spec, j);
  std::vector<Complex> out(spec.n());
  for (std::size_t k = 0; k < spec.n(); ++k) {
    out[k] = i == j ? Complex(std::norm(spec.coeffs(i, k)), 0.0) : spec.coeffs(i, k) * std::conj(spec.coeffs(j, k));
  }
  return out;
}

std::vector<Complex> increment_dft(const SpectralPanel& spec, std::size_t i, std::size_t j) {
  check_index(spec, i);
  check_index(spec, j);
  std::vector<Complex> out(spec.n());
  for (std::size_t k = 0; k < spec.n(); ++k) out[k] = spec.coeffs(i, k) - spec.coeffs(j, k);
  return out;
}

}  // namespace stfreq
