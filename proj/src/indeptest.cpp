#include "stfreq/indeptest.hpp"

#include <cmath>
#include <string>

#include "stfreq/error.hpp"
#include "stfreq/parallel.hpp"

namespace stfreq {

SpectralMatrixSeries smoothed_spectral_matrices(const SpectralPanel& spec, std::size_t k) {
  const std::size_t n = spec.n();
  const std::size_t m = spec.m();
  if (n % 2 == 0) fail(ErrorCode::InvalidParams, "block smoothing needs an odd series length, got n=" + std::to_string(n));
  if (k == 0) fail(ErrorCode::InvalidSmoother, "smoothing half-width k must be at least 1");
  const std::size_t width = 2 * k + 1;
  if (width < m) {
    fail(ErrorCode::RankDeficientSmoother,
         "2k+1 = " + std::to_string(width) + " ordinates cannot give full rank for m = " + std::to_string(m));
  }
  const std::size_t blocks = (n - 1) / (4 * (k + 1));
  if (blocks == 0) fail(ErrorCode::TooFewObservations, "n=" + std::to_string(n) + " leaves no complete block for k=" + std::to_string(k));

  SpectralMatrixSeries out;
  out.k = k;
  out.n = n;
  out.matrices.resize(blocks);
  out.centers.resize(blocks);
  parallel_for(blocks, [&](std::size_t l) {
    const std::size_t centre = l * width + k + 1;
    Eigen::MatrixXcd f = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
    for (std::size_t j = centre - k; j <= centre + k; ++j) {
      const Eigen::VectorXcd col = spec.coeffs.col(static_cast<Eigen::Index>(j));
      f.noalias() += col * col.adjoint();
    }
    f /= static_cast<double>(width);
    // exact Hermitian symmetry and a real diagonal
    for (Eigen::Index i = 0; i < f.rows(); ++i) {
      f(i, i) = f(i, i).real();
      for (Eigen::Index c = 0; c < i; ++c) f(c, i) = std::conj(f(i, c));
    }
    out.matrices[l] = std::move(f);
    out.centers[l] = centre;
  });
  return out;
}

std::vector<double> lambda_stats(const SpectralMatrixSeries& series) {
  std::vector<double> out(series.blocks());
  for (std::size_t l = 0; l < series.blocks(); ++l) {
    const Eigen::MatrixXcd& f = series.matrices[l];
    Eigen::LLT<Eigen::MatrixXcd> llt(f);
    if (llt.info() != Eigen::Success) {
      fail(ErrorCode::SingularMatrix, "spectral matrix of block " + std::to_string(l + 1) + " (centre index " +
                                          std::to_string(series.centers[l]) + ") is not positive definite");
    }
    double log_ratio = 0.0;
    const Eigen::MatrixXcd lower = llt.matrixL();
    for (Eigen::Index i = 0; i < f.rows(); ++i) {
      log_ratio += 2.0 * std::log(lower(i, i).real()) - std::log(f(i, i).real());
    }
    // Hadamard: the ratio never exceeds one
    out[l] = std::exp(std::min(log_ratio, 0.0));
  }
  return out;
}

LambdaMoments lambda_moments(std::size_t m, std::size_t k, std::size_t blocks) {
  const double kp = static_cast<double>(2 * k + 1);
  if (m < 2) fail(ErrorCode::DegenerateTest, "independence needs at least two stations");
  if (!(kp > static_cast<double>(m - 1))) fail(ErrorCode::InvalidSmoother, "need 2k+1 > m-1");
  if (blocks == 0) fail(ErrorCode::TooFewObservations, "no blocks");
  LambdaMoments out;
  for (std::size_t j = 1; j < m; ++j) {
    const double num = static_cast<double>(m - j);
    const double den = kp - static_cast<double>(j);
    out.mean += num / den;
    out.variance += num / (den * den);
  }
  out.variance /= static_cast<double>(blocks);
  return out;
}

IndependenceReport independence_test(const Panel& panel, std::size_t k, double alpha) {
  const std::size_t m = panel.m();
  if (m < 2) fail(ErrorCode::DegenerateTest, "independence test needs at least two stations");
  if (k == 0) fail(ErrorCode::InvalidSmoother, "smoothing half-width k must be at least 1");
  if (2 * k + 1 <= m - 1) {
    fail(ErrorCode::InvalidSmoother, "k' = 2k+1 = " + std::to_string(2 * k + 1) + " must exceed m-1 = " + std::to_string(m - 1));
  }
  if (!(alpha > 0.0 && alpha < 1.0)) fail(ErrorCode::InvalidParams, "alpha must lie in (0, 1)");

  const bool drop = panel.n() % 2 == 0;
  if (drop) warn("even series length " + std::to_string(panel.n()) + ": dropping the last observation for the independence test");
  const SpectralPanel spec = dft_all(drop ? panel.drop_last() : panel);
  const SpectralMatrixSeries series = smoothed_spectral_matrices(spec, k);

  IndependenceReport report;
  report.lambda_ls = lambda_stats(series);
  double sum = 0.0;
  for (double lam : report.lambda_ls) sum += std::log(lam);
  report.Lambda = -sum / static_cast<double>(series.blocks());
  const LambdaMoments moments = lambda_moments(m, k, series.blocks());
  report.mean = moments.mean;
  report.variance = moments.variance;
  report.S = (report.Lambda - report.mean) / std::sqrt(report.variance);
  report.p_value = 0.5 * std::erfc(report.S / std::sqrt(2.0));
  report.alpha = alpha;
  report.reject = report.p_value < alpha;
  report.m = m;
  report.n_used = spec.n();
  report.k = k;
  return report;
}

nlohmann::json to_json(const IndependenceReport& r) {
  return nlohmann::json{{"lambda_ls", r.lambda_ls}, {"Lambda", r.Lambda}, {"mean", r.mean},
                        {"variance", r.variance},   {"S", r.S},           {"p_value", r.p_value},
                        {"alpha", r.alpha},         {"reject", r.reject}, {"m", r.m},
                        {"n_used", r.n_used},       {"k", r.k},           {"blocks", r.lambda_ls.size()}};
}

}  // namespace stfreq
