#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "stfreq/panel.hpp"

namespace stfreq {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// DFTs of every station series on the full Fourier grid w_k = 2 pi k / n,
/// k = 0..n-1:
///
///   J_i(w_k) = (2 pi n)^{-1/2} sum_{t=1}^{n} Y_t(s_i) exp(-i t w_k).
///
/// No mean removal or tapering is applied. For real input the columns satisfy
/// J(w_{n-k}) = conj(J(w_k)) exactly.
struct SpectralPanel {
  ComplexMatrix coeffs;  // m x n

  std::size_t m() const { return static_cast<std::size_t>(coeffs.rows()); }
  std::size_t n() const { return static_cast<std::size_t>(coeffs.cols()); }
};

double fourier_frequency(std::size_t k, std::size_t n);

/// DFT of a single real series with the convention above, via FFT.
std::vector<Complex> dft(const double* series, std::size_t n);

SpectralPanel dft_all(const Panel& panel);

std::vector<double> periodogram(const SpectralPanel& spec, std::size_t i);
std::vector<Complex> cross_periodogram(const SpectralPanel& spec, std::size_t i, std::size_t j);

/// DFT of the increment series Y(s_i) - Y(s_j), taken as J_i - J_j.
std::vector<Complex> increment_dft(const SpectralPanel& spec, std::size_t i, std::size_t j);

}  // namespace stfreq
