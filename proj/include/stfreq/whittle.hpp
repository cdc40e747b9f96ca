#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "stfreq/dft.hpp"
#include "stfreq/panel.hpp"
#include "stfreq/specmodel.hpp"

namespace stfreq {

/// Model parameters in a fixed order. psi vectors in this module always hold
/// all seven; the template's mask decides which ones move.
enum class Param : std::size_t { SigmaEta2, A0, A1, C1, C2, C3, Nu };
inline constexpr std::size_t kParamCount = 7;
inline constexpr std::array<const char*, kParamCount> kParamNames = {"sigma_eta2", "a0", "a1", "c1", "c2", "c3", "nu"};

using ParamVector = std::array<double, kParamCount>;

ParamVector pack(const SpectrumParams& params);
SpectrumParams unpack(const ParamVector& values, std::size_t d);

/// Starting values, free/fixed mask and box bounds. By default sigma_eta2,
/// a0, a1 and c1 are free; c2, c3 and nu are fixed.
struct ModelTemplate {
  SpectrumParams init;
  std::array<bool, kParamCount> free = {true, true, true, true, false, false, false};
  ParamVector lower = {1e-12, 1e-12, -10.0, -1e6, -1e6, -1e6, 1e-6};
  ParamVector upper = {1e12, 1e12, 10.0, 1e6, 1e6, 1e6, 50.0};
  SpectrumConstants constants = SpectrumConstants::Consistent;

  std::vector<std::size_t> free_indices() const;
  /// InvalidParams unless lower <= value <= upper for every free parameter.
  void check_bounds(const ParamVector& values) const;
};

void to_json(nlohmann::json& j, const ModelTemplate& t);
/// Reads {"params": {...}, "free": [names], "bounds": {name: [lo, hi]},
/// "constants": "consistent" | "paper"}.
void from_json(const nlohmann::json& j, ModelTemplate& t);

/// Increment periodograms |J_i - J_j|^2 of every pair matched to one lag, on
/// the full Fourier grid.
struct LagPeriodograms {
  Coords h;
  std::vector<std::vector<double>> pairs;  // pairs[p][k], k = 0..n-1
};

struct WhittleProblem {
  std::size_t n = 0;
  std::vector<LagPeriodograms> lags;
  std::vector<std::size_t> freqs;  // Fourier indices entering the criterion
  ModelTemplate model;

  /// EmptyLagSet for a lag without pairs, DimensionMismatch for ragged input.
  void validate() const;
};

/// k = 1..floor((n-1)/2): drops w = 0 and, for even n, w = pi.
std::vector<std::size_t> default_frequency_subset(std::size_t n);

WhittleProblem make_problem(const SpectralPanel& spec, const StationSet& stations, const std::vector<Coords>& lags,
                            double tolerance, const ModelTemplate& model);
WhittleProblem make_problem(std::size_t n, std::vector<LagPeriodograms> lags, const ModelTemplate& model);

/// Q = sum_{k in freqs} [ln g0(w_k) + I(w_k) / g0(w_k)].
double whittle_single(const std::vector<double>& periodogram, const Coords& h, const SpectrumParams& psi,
                      const std::vector<std::size_t>& freqs,
                      SpectrumConstants constants = SpectrumConstants::Consistent);

/// (1/H) sum_l (1/|N(h_l)|) sum_i Q_i^{(h_l)}.
double whittle_pooled(const WhittleProblem& problem, const SpectrumParams& psi);

/// Contribution of each frequency in problem.freqs to whittle_pooled.
std::vector<double> whittle_terms(const WhittleProblem& problem, const SpectrumParams& psi);

/// Central-difference gradient of whittle_pooled over the free parameters.
Eigen::VectorXd criterion_gradient(const WhittleProblem& problem, const SpectrumParams& psi);

struct SandwichResult {
  Eigen::MatrixXd hessian;
  Eigen::MatrixXd score_outer;  // V = sum_k s_k s_k^T
  Eigen::MatrixXd covariance;   // H^{-1} V H^{-1}
};

/// Sandwich covariance of the free parameters. SingularHessian when the
/// Hessian, scaled to unit diagonal, has an eigenvalue below the threshold.
SandwichResult sandwich_cov(const WhittleProblem& problem, const SpectrumParams& psi_hat);

struct FitOptions {
  std::size_t max_iterations = 20000;
  double tolerance = 1e-8;
  bool covariance = true;
};

struct FitResult {
  SpectrumParams psi_hat;
  std::vector<std::size_t> free;        // parameter indices in covariance order
  double criterion_value = 0.0;
  bool converged = false;
  std::size_t iterations = 0;
  double gradient_norm = 0.0;
  std::optional<Eigen::MatrixXd> covariance;
  std::string covariance_status = "ok";  // or the reason it is missing
  std::vector<double> trace;

  std::vector<double> std_errors() const;  // empty without covariance
};

/// Minimises whittle_pooled from the template's starting point by simplex
/// search on log-transformed positive parameters. A run that hits the
/// iteration cap returns the best point with converged = false.
FitResult fit(const WhittleProblem& problem, const FitOptions& options = {});

nlohmann::json to_json(const FitResult& result);

}  // namespace stfreq
