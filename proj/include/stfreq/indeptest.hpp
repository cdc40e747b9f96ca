#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "stfreq/dft.hpp"
#include "stfreq/panel.hpp"

namespace stfreq {

/// Block-averaged cross-periodogram matrices. Block l (1-based) is centred at
/// Fourier index j_l = (l-1)(2k+1) + (k+1) and averages the 2k+1 ordinates
/// j_l - k .. j_l + k.
struct SpectralMatrixSeries {
  std::vector<Eigen::MatrixXcd> matrices;
  std::vector<std::size_t> centers;
  std::size_t k = 0;
  std::size_t n = 0;

  std::size_t blocks() const { return matrices.size(); }
};

/// Requires odd n (InvalidParams otherwise), k >= 1 and 2k+1 >= m
/// (RankDeficientSmoother). Uses M1 = floor((n-1) / (4(k+1))) blocks
/// (TooFewObservations when zero).
SpectralMatrixSeries smoothed_spectral_matrices(const SpectralPanel& spec, std::size_t k);

/// lambda_l = det F_l / prod_j F_l[j][j] from a Cholesky factorisation.
/// SingularMatrix names the block whose matrix is not positive definite.
std::vector<double> lambda_stats(const SpectralMatrixSeries& series);

/// Null mean and variance of Lambda for m stations, k' = 2k+1 and M1 blocks:
///   E = sum_{j=1}^{m-1} (m-j)/(k'-j),  Var = (1/M1) sum_{j=1}^{m-1} (m-j)/(k'-j)^2.
struct LambdaMoments {
  double mean = 0.0;
  double variance = 0.0;
};
LambdaMoments lambda_moments(std::size_t m, std::size_t k, std::size_t blocks);

struct IndependenceReport {
  std::vector<double> lambda_ls;
  double Lambda = 0.0;
  double mean = 0.0;
  double variance = 0.0;
  double S = 0.0;
  double p_value = 1.0;
  double alpha = 0.05;
  bool reject = false;
  std::size_t m = 0;
  std::size_t n_used = 0;
  std::size_t k = 0;
};

/// Lambda = -(1/M1) sum ln lambda_l, S = (Lambda - E) / sqrt(Var) and the
/// upper-tail normal p-value. An even-length panel loses its last
/// observation, with a warning.
IndependenceReport independence_test(const Panel& panel, std::size_t k, double alpha);

nlohmann::json to_json(const IndependenceReport& report);

}  // namespace stfreq
