#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "stfreq/dft.hpp"
#include "stfreq/panel.hpp"

namespace stfreq {

enum class KernelKind { Daniell, ModifiedDaniell, Bartlett };

/// Discrete smoothing kernel over 2b+1 Fourier ordinates. Weights are
/// nonnegative, symmetric and sum to one; b = 0 is the identity.
struct Kernel {
  KernelKind kind = KernelKind::ModifiedDaniell;
  std::size_t half_width = 0;

  /// weights()[r + b] is the weight of offset r, r = -b..b.
  std::vector<double> weights() const;
  std::string name() const;

  static Kernel parse(const std::string& name, std::size_t half_width);
};

/// ceil(n^0.4), the default half-width.
std::size_t default_bandwidth(std::size_t n);
Kernel default_kernel(std::size_t n);

/// G_raw(w_k) = (1/|N(h)|) sum_{(i,j)} |J_i(w_k) - J_j(w_k)|^2, k = 0..n-1.
std::vector<double> raw_fv(const SpectralPanel& spec, const LagPairSet& pairs);

/// Circular kernel smoothing: out_k = sum_r w_r raw_{(k+r) mod n}.
std::vector<double> smooth_fv(const std::vector<double>& raw, const Kernel& kernel);

/// Plug-in variance of the smoothed FV at each Fourier frequency,
///
///   Var(g_h(w_k)) ~ (1/|N|^2) sum_r w_r^2 sum_{p,q in N(h)} |g_pq(w_{k+r})|^2,
///
/// where g_pq is the cross-spectrum of the increment series of pairs p and q,
/// estimated by smoothed increment cross-periodograms. The Gaussian bias of
/// |g_pq|^2 (the sum_r w_r^2 g_pp g_qq term) is removed before use.
std::vector<double> fv_variance(const SpectralPanel& spec, const LagPairSet& pairs, const Kernel& kernel);

struct FrequencyVariogram {
  Coords lag;
  double tolerance = 0.0;
  std::size_t count = 0;
  Kernel kernel;
  std::vector<double> freqs;
  std::vector<double> raw;
  std::vector<double> smoothed;
  std::vector<double> variance;
};

FrequencyVariogram estimate_fv(const SpectralPanel& spec, const LagPairSet& pairs, const Kernel& kernel);

/// (2 pi / n) sum_k values[k].
double integrate_spectrum(const std::vector<double>& values);

struct NuggetRow {
  double h_norm = 0.0;
  Coords h;
  std::size_t count = 0;
  double integrated_fv = 0.0;          // (2 pi / n) sum over all k of the smoothed FV
  double integrated_fv_nonzero = 0.0;  // same with the k = 0 ordinate left out
};

struct NuggetScan {
  std::vector<NuggetRow> rows;  // sorted by h_norm
  double intercept = 0.0;       // linear extrapolation to |h| = 0
  double slope = 0.0;
};

/// Integrated FV per lag and the nugget intercept from a straight line
/// through the two smallest nonzero lag norms (k = 0 excluded). Lags with no
/// pairs are skipped with a warning.
NuggetScan nugget_scan(const SpectralPanel& spec, const StationSet& stations, const std::vector<Coords>& lags,
                       double tolerance, const Kernel& kernel);
NuggetScan nugget_scan(const Panel& panel, const std::vector<Coords>& lags, double tolerance, const Kernel& kernel);

/// m x m matrix of smoothed E|J_i - J_j|^2 estimates at Fourier index k.
Eigen::MatrixXd fv_matrix(const SpectralPanel& spec, const Kernel& kernel, std::size_t k);

/// sum_i sum_j a_i conj(a_j) G_ij for real symmetric G; nonpositive whenever
/// sum_i a_i = 0 and G is a (smoothed) frequency variogram matrix.
double cnd_form(const Eigen::MatrixXd& g, const Eigen::VectorXcd& a);

}  // namespace stfreq
