#pragma once

#include <cstddef>

#include <json.hpp>

#include "stfreq/panel.hpp"

namespace stfreq {

/// Coefficients of P_h(w) = c0(h) + c1 (iw) + c2 (iw)^2 + c3 (iw)^3 with
/// c0(h) = a0 |h|^a1. The default family uses c2 = c3 = 0.
struct PolySpec {
  double a0 = 1.0;
  double a1 = 0.0;
  double c1 = 0.0;
  double c2 = 0.0;
  double c3 = 0.0;
};

/// Laplacian-model parameters: noise level, smoothness nu, space dimension d
/// (1..3) and the polynomial. Valid when sigma_eta2 > 0, nu > 0, 4 nu > d.
struct SpectrumParams {
  double sigma_eta2 = 1.0;
  double nu = 1.0;
  std::size_t d = 2;
  PolySpec poly;

  void validate() const;
};

/// Normalising constants for the temporal and cross spectra.
///   Consistent: constants implied by the space-time spectrum itself, so the
///               wave-number marginal, the |L| -> 0 limit of the cross
///               spectrum and the closed-form temporal spectrum agree.
///   Paper:      the alternative temporal-spectrum constant
///               (2 pi)^{d/2} 2^{d/2} and cross-spectrum constant (2 pi)^d,
///               kept for side-by-side comparison output.
enum class SpectrumConstants { Consistent, Paper };

double poly_c0(const Coords& h, const SpectrumParams& params);

/// |P_h(w)|^2; InvalidParams when c0(h) <= 0 or the modulus vanishes.
double poly_modsq(const Coords& h, double omega, const SpectrumParams& params);

/// sigma^2 / (2 pi)^{d+1} * (|lambda|^2 + |P_h(w)|^2)^{-2 nu}.
double spectrum_st(const Coords& lambda, double omega, const SpectrumParams& params, const Coords& h);

struct CrossSpectrumQuery {
  Coords separation;  // L
  double omega = 0.0;
  SpectrumParams params;
};

/// Covariance of increment DFTs at stations separated by L:
///   C sigma^2 (|L| / |P|)^mu K_mu(|L| |P|),  mu = 2 nu - d/2,
/// with C = 1 / ((2 pi)^{d/2+1} 2^{2nu-1} Gamma(2nu)) (Consistent) or
/// 1 / ((2 pi)^d 2^{2nu-1} Gamma(2nu)) (Paper); the two coincide for d = 2.
/// DomainError for |L| = 0.
double cross_spectrum(const CrossSpectrumQuery& query, const Coords& h,
                      SpectrumConstants constants = SpectrumConstants::Consistent);

/// Temporal spectrum g0 of the increment process, the |L| -> 0 limit of the
/// cross spectrum:
///   sigma^2 Gamma(mu) / (D 2^{d/2} Gamma(2nu)) |P|^{-2 mu},
/// D = (2 pi)^{d/2+1} (Consistent) or (2 pi)^{d/2} (Paper).
double temporal_spectrum(double omega, const SpectrumParams& params, const Coords& h,
                         SpectrumConstants constants = SpectrumConstants::Consistent);

struct QuadratureGrid {
  std::size_t intervals = 2048;  // Simpson intervals on log-radius; doubled once for the error estimate
  double tolerance = 1e-9;       // relative Richardson error allowed
  double inner_fraction = 1e-6;  // inner radius as a fraction of |P|
  double outer_ratio = 1e-12;    // integrand / peak at the outer radius
};

/// Test oracle: integral of spectrum_st over lambda in R^d by radial
/// quadrature on a log grid, closed-form inner disc and outer tail.
/// GridTooCoarse when the Richardson error estimate exceeds the tolerance.
double marginalize_oracle(double omega, const SpectrumParams& params, const Coords& h,
                          const QuadratureGrid& grid = {});

void to_json(nlohmann::json& j, const SpectrumParams& p);
void from_json(const nlohmann::json& j, SpectrumParams& p);

}  // namespace stfreq
