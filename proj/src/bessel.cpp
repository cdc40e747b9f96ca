#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "stfreq/error.hpp"
#include "stfreq/special.hpp"

namespace stfreq {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr int kMaxIterations = 100000;

// gam1 = (1/G(1-mu) - 1/G(1+mu)) / (2 mu), gam2 = (1/G(1-mu) + 1/G(1+mu)) / 2.
// Near mu = 0 the difference cancels, so use the Taylor coefficients of
// 1/G(1+z) = 1 + g z + b2 z^2 + b3 z^3 + ...
void temme_gammas(double mu, double& gam1, double& gam2, double& gampl, double& gammi) {
  gampl = 1.0 / std::tgamma(1.0 + mu);
  gammi = 1.0 / std::tgamma(1.0 - mu);
  if (std::abs(mu) < 1e-3) {
    constexpr double b1 = std::numbers::egamma;
    constexpr double b2 = -0.6558780715202538;
    constexpr double b3 = -0.0420026350340952;
    constexpr double b4 = 0.1665386113822915;
    const double mu2 = mu * mu;
    gam1 = -(b1 + b3 * mu2);
    gam2 = 1.0 + b2 * mu2 + b4 * mu2 * mu2;
  } else {
    gam1 = (gammi - gampl) / (2.0 * mu);
    gam2 = (gammi + gampl) / 2.0;
  }
}

// K_mu(x), K_{mu+1}(x) for |mu| <= 1/2, x < 2.
void temme_series(double mu, double x, double& kmu, double& kmu1) {
  const double x2 = 0.5 * x;
  const double pimu = std::numbers::pi * mu;
  const double fact = std::abs(pimu) < kEps ? 1.0 : pimu / std::sin(pimu);
  double d = -std::log(x2);
  double e = mu * d;
  const double fact2 = std::abs(e) < kEps ? 1.0 : std::sinh(e) / e;
  double gam1, gam2, gampl, gammi;
  temme_gammas(mu, gam1, gam2, gampl, gammi);
  double ff = fact * (gam1 * std::cosh(e) + gam2 * fact2 * d);
  double sum = ff;
  e = std::exp(e);
  double p = 0.5 * e / gampl;
  double q = 0.5 / (e * gammi);
  double c = 1.0;
  d = x2 * x2;
  double sum1 = p;
  const double mu2 = mu * mu;
  for (int i = 1; i <= kMaxIterations; ++i) {
    const double di = static_cast<double>(i);
    ff = (di * ff + p + q) / (di * di - mu2);
    c *= d / di;
    p /= di - mu;
    q /= di + mu;
    const double del = c * ff;
    sum += del;
    sum1 += c * (p - di * ff);
    if (std::abs(del) < std::abs(sum) * kEps) break;
  }
  kmu = sum;
  kmu1 = sum1 * 2.0 / x;
}

// Steed's method for the second continued fraction, x >= 2.
void steed_cf2(double mu, double x, double& kmu, double& kmu1) {
  double b = 2.0 * (1.0 + x);
  double d = 1.0 / b;
  double h = d;
  double delh = d;
  double q1 = 0.0;
  double q2 = 1.0;
  const double a1 = 0.25 - mu * mu;
  double q = a1;
  double c = a1;
  double a = -a1;
  double s = 1.0 + q * delh;
  for (int i = 2; i <= kMaxIterations; ++i) {
    const double di = static_cast<double>(i);
    a -= 2.0 * (di - 1.0);
    c = -a * c / di;
    const double qnew = (q1 - b * q2) / a;
    q1 = q2;
    q2 = qnew;
    q += c * qnew;
    b += 2.0;
    d = 1.0 / (b + a * d);
    delh = (b * d - 1.0) * delh;
    h += delh;
    const double dels = q * delh;
    s += dels;
    if (std::abs(dels / s) < kEps) break;
  }
  h *= a1;
  kmu = std::sqrt(std::numbers::pi / (2.0 * x)) * std::exp(-x) / s;
  kmu1 = kmu * (mu + x + 0.5 - h) / x;
}

}  // namespace

double bessel_k(double nu, double x) {
  if (!(x > 0.0) || !std::isfinite(x)) fail(ErrorCode::DomainError, "bessel_k requires x > 0, got " + std::to_string(x));
  if (!std::isfinite(nu)) fail(ErrorCode::DomainError, "bessel_k requires a finite order");
  nu = std::abs(nu);
  const int steps = static_cast<int>(nu + 0.5);
  const double mu = nu - steps;
  double kmu, kmu1;
  if (x < 2.0) {
    temme_series(mu, x, kmu, kmu1);
  } else {
    steed_cf2(mu, x, kmu, kmu1);
  }
  for (int i = 1; i <= steps; ++i) {
    const double next = (mu + i) * (2.0 / x) * kmu1 + kmu;
    kmu = kmu1;
    kmu1 = next;
  }
  return kmu;
}

}  // namespace stfreq
