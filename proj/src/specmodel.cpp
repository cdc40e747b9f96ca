#include "stfreq/specmodel.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "stfreq/error.hpp"
#include "stfreq/special.hpp"

namespace stfreq {

namespace {

constexpr double kPi = std::numbers::pi;

void check_lag(const Coords& h, const SpectrumParams& params) {
  if (h.size() != params.d) {
    fail(ErrorCode::DimensionMismatch,
         "lag has " + std::to_string(h.size()) + " components, model has d=" + std::to_string(params.d));
  }
}

double sphere_area(std::size_t d) {
  const double half = 0.5 * static_cast<double>(d);
  return 2.0 * std::pow(kPi, half) / std::tgamma(half);
}

}  // namespace

void SpectrumParams::validate() const {
  if (d < 1 || d > 3) fail(ErrorCode::InvalidParams, "space dimension must be 1, 2 or 3");
  if (!(sigma_eta2 > 0.0) || !std::isfinite(sigma_eta2)) fail(ErrorCode::InvalidParams, "sigma_eta2 must be positive");
  if (!(nu > 0.0) || !std::isfinite(nu)) fail(ErrorCode::InvalidParams, "nu must be positive");
  if (!(4.0 * nu > static_cast<double>(d))) fail(ErrorCode::InvalidParams, "need 4 nu > d for an integrable spectrum");
  for (double c : {poly.a0, poly.a1, poly.c1, poly.c2, poly.c3}) {
    if (!std::isfinite(c)) fail(ErrorCode::InvalidParams, "polynomial coefficients must be finite");
  }
}

double poly_c0(const Coords& h, const SpectrumParams& params) {
  check_lag(h, params);
  const double r = norm(h);
  const double c0 = params.poly.a1 == 0.0 ? params.poly.a0 : params.poly.a0 * std::pow(r, params.poly.a1);
  if (!(c0 > 0.0) || !std::isfinite(c0)) {
    fail(ErrorCode::InvalidParams, "c0(h) = a0 |h|^a1 must be positive (|h|=" + std::to_string(r) + ")");
  }
  return c0;
}

double poly_modsq(const Coords& h, double omega, const SpectrumParams& params) {
  const double c0 = poly_c0(h, params);
  const double w2 = omega * omega;
  const double re = c0 - params.poly.c2 * w2;
  const double im = omega * (params.poly.c1 - params.poly.c3 * w2);
  const double value = re * re + im * im;
  if (!(value > 0.0)) fail(ErrorCode::InvalidParams, "|P_h(w)|^2 vanishes at w=" + std::to_string(omega));
  return value;
}

double spectrum_st(const Coords& lambda, double omega, const SpectrumParams& params, const Coords& h) {
  params.validate();
  if (lambda.size() != params.d) fail(ErrorCode::DimensionMismatch, "wave number must have d components");
  const double p2 = poly_modsq(h, omega, params);
  double l2 = 0.0;
  for (double x : lambda) l2 += x * x;
  const double dd = static_cast<double>(params.d);
  return params.sigma_eta2 / std::pow(2.0 * kPi, dd + 1.0) * std::pow(l2 + p2, -2.0 * params.nu);
}

double cross_spectrum(const CrossSpectrumQuery& query, const Coords& h, SpectrumConstants constants) {
  const SpectrumParams& params = query.params;
  params.validate();
  if (query.separation.size() != params.d) fail(ErrorCode::DimensionMismatch, "separation must have d components");
  const double dist = norm(query.separation);
  if (!(dist > 0.0)) fail(ErrorCode::DomainError, "cross spectrum needs |L| > 0; use temporal_spectrum at L = 0");
  const double p = std::sqrt(poly_modsq(h, query.omega, params));
  const double dd = static_cast<double>(params.d);
  const double mu = 2.0 * params.nu - 0.5 * dd;
  const double two_pi_power = constants == SpectrumConstants::Consistent ? 0.5 * dd + 1.0 : dd;
  const double scale = params.sigma_eta2 /
                       (std::pow(2.0 * kPi, two_pi_power) * std::pow(2.0, 2.0 * params.nu - 1.0) * std::tgamma(2.0 * params.nu));
  return scale * std::pow(dist / p, mu) * bessel_k(mu, dist * p);
}

double temporal_spectrum(double omega, const SpectrumParams& params, const Coords& h, SpectrumConstants constants) {
  params.validate();
  const double p2 = poly_modsq(h, omega, params);
  const double dd = static_cast<double>(params.d);
  const double mu = 2.0 * params.nu - 0.5 * dd;
  const double two_pi_power = constants == SpectrumConstants::Consistent ? 0.5 * dd + 1.0 : 0.5 * dd;
  return params.sigma_eta2 * std::tgamma(mu) /
         (std::pow(2.0 * kPi, two_pi_power) * std::pow(2.0, 0.5 * dd) * std::tgamma(2.0 * params.nu)) *
         std::pow(p2, -mu);
}

double marginalize_oracle(double omega, const SpectrumParams& params, const Coords& h, const QuadratureGrid& grid) {
  params.validate();
  if (grid.intervals < 2 || grid.intervals % 2 != 0) fail(ErrorCode::InvalidParams, "Simpson needs an even interval count");
  const double p2 = poly_modsq(h, omega, params);
  const double c = std::sqrt(p2);
  const double dd = static_cast<double>(params.d);
  const double decay = 4.0 * params.nu - dd;
  const double amplitude = sphere_area(params.d) * params.sigma_eta2 / std::pow(2.0 * kPi, dd + 1.0);

  const double inner = grid.inner_fraction * c;
  const double outer = c * std::pow(grid.outer_ratio, -1.0 / decay);
  // integrand in u = ln(rho): A rho^d (rho^2 + c^2)^{-2 nu}
  auto integrand = [&](double u) {
    const double rho = std::exp(u);
    return amplitude * std::pow(rho, dd) * std::pow(rho * rho + p2, -2.0 * params.nu);
  };
  auto simpson = [&](std::size_t intervals) {
    const double a = std::log(inner);
    const double b = std::log(outer);
    const double step = (b - a) / static_cast<double>(intervals);
    double sum = integrand(a) + integrand(b);
    for (std::size_t i = 1; i < intervals; ++i) sum += (i % 2 == 1 ? 4.0 : 2.0) * integrand(a + step * static_cast<double>(i));
    return sum * step / 3.0;
  };
  const double coarse = simpson(grid.intervals);
  const double fine = simpson(2 * grid.intervals);
  const double error = std::abs(fine - coarse) / 15.0;

  const double disc = amplitude * std::pow(p2, -2.0 * params.nu) * std::pow(inner, dd) / dd;
  const double tail = amplitude * std::pow(outer, -decay) / decay;
  const double total = fine + (fine - coarse) / 15.0 + disc + tail;
  if (error > grid.tolerance * std::abs(total)) {
    fail(ErrorCode::GridTooCoarse, "radial quadrature error estimate " + std::to_string(error / std::abs(total)) +
                                       " exceeds tolerance " + std::to_string(grid.tolerance));
  }
  return total;
}

void to_json(nlohmann::json& j, const SpectrumParams& p) {
  j = nlohmann::json{{"sigma_eta2", p.sigma_eta2},
                     {"nu", p.nu},
                     {"d", p.d},
                     {"poly", {{"a0", p.poly.a0}, {"a1", p.poly.a1}, {"c1", p.poly.c1}}}};
  if (p.poly.c2 != 0.0) j["poly"]["c2"] = p.poly.c2;
  if (p.poly.c3 != 0.0) j["poly"]["c3"] = p.poly.c3;
}

void from_json(const nlohmann::json& j, SpectrumParams& p) {
  p = SpectrumParams{};
  p.sigma_eta2 = j.value("sigma_eta2", p.sigma_eta2);
  p.nu = j.value("nu", p.nu);
  p.d = j.value("d", p.d);
  if (j.contains("poly")) {
    const auto& poly = j.at("poly");
    p.poly.a0 = poly.value("a0", p.poly.a0);
    p.poly.a1 = poly.value("a1", p.poly.a1);
    p.poly.c1 = poly.value("c1", p.poly.c1);
    p.poly.c2 = poly.value("c2", p.poly.c2);
    p.poly.c3 = poly.value("c3", p.poly.c3);
  }
}

}  // namespace stfreq
