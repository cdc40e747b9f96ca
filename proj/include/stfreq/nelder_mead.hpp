#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace stfreq {

struct NelderMeadOptions {
  double initial_step = 0.1;        // absolute for |x_i| < 1, relative otherwise
  double tolerance = 1e-8;          // simplex diameter relative to 1 + |x_best|
  std::size_t max_iterations = 20000;
  std::size_t max_restarts = 5;     // fresh simplex around the best point after convergence
};

struct NelderMeadResult {
  std::vector<double> x;
  double value = 0.0;
  bool converged = false;
  std::size_t iterations = 0;
  std::vector<double> trace;  // best value after each iteration; nonincreasing
};

/// Unconstrained simplex minimiser (reflection 1, expansion 2, contraction
/// and shrink 1/2). The objective may return +inf to reject a point.
NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& objective,
                             std::vector<double> start, const NelderMeadOptions& options = {});

}  // namespace stfreq
