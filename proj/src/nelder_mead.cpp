#include "stfreq/nelder_mead.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "stfreq/error.hpp"

namespace stfreq {

namespace {

struct Simplex {
  std::vector<std::vector<double>> points;
  std::vector<double> values;

  void sort() {
    std::vector<std::size_t> order(points.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<std::vector<double>> p;
    std::vector<double> v;
    for (std::size_t i : order) {
      p.push_back(std::move(points[i]));
      v.push_back(values[i]);
    }
    points = std::move(p);
    values = std::move(v);
  }

  double diameter() const {
    double d = 0.0;
    for (std::size_t i = 1; i < points.size(); ++i) {
      for (std::size_t j = 0; j < points[0].size(); ++j) d = std::max(d, std::abs(points[i][j] - points[0][j]));
    }
    return d;
  }
};

double inf_norm(const std::vector<double>& x) {
  double r = 0.0;
  for (double v : x) r = std::max(r, std::abs(v));
  return r;
}

}  // namespace

NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& objective,
                             std::vector<double> start, const NelderMeadOptions& options) {
  const std::size_t dim = start.size();
  NelderMeadResult result;
  result.x = start;
  result.value = objective(start);
  if (!std::isfinite(result.value)) fail(ErrorCode::InvalidParams, "objective is not finite at the starting point");
  if (dim == 0) {
    result.converged = true;
    return result;
  }

  auto combine = [dim](const std::vector<double>& a, const std::vector<double>& b, double t) {
    // a + t (b - a)
    std::vector<double> out(dim);
    for (std::size_t j = 0; j < dim; ++j) out[j] = a[j] + t * (b[j] - a[j]);
    return out;
  };

  for (std::size_t restart = 0; restart <= options.max_restarts; ++restart) {
    Simplex s;
    s.points.push_back(result.x);
    s.values.push_back(result.value);
    for (std::size_t j = 0; j < dim; ++j) {
      std::vector<double> p = result.x;
      const double step = std::abs(p[j]) < 1.0 ? options.initial_step : options.initial_step * std::abs(p[j]);
      p[j] += step;
      double v = objective(p);
      if (!std::isfinite(v)) {
        p[j] = result.x[j] - step;
        v = objective(p);
      }
      s.points.push_back(std::move(p));
      s.values.push_back(v);
    }
    s.sort();
    const double value_before = result.value;
    bool converged = false;

    while (result.iterations < options.max_iterations) {
      if (s.diameter() < options.tolerance * (1.0 + inf_norm(s.points[0]))) {
        converged = true;
        break;
      }
      ++result.iterations;
      std::vector<double> centroid(dim, 0.0);
      for (std::size_t i = 0; i < dim; ++i) {
        for (std::size_t j = 0; j < dim; ++j) centroid[j] += s.points[i][j] / static_cast<double>(dim);
      }
      const std::vector<double>& worst = s.points[dim];
      const double f_worst = s.values[dim];
      const double f_best = s.values[0];
      const double f_second = s.values[dim - 1];

      std::vector<double> reflected = combine(centroid, worst, -1.0);
      const double f_r = objective(reflected);
      if (f_r < f_best) {
        std::vector<double> expanded = combine(centroid, worst, -2.0);
        const double f_e = objective(expanded);
        if (f_e < f_r) {
          s.points[dim] = std::move(expanded);
          s.values[dim] = f_e;
        } else {
          s.points[dim] = std::move(reflected);
          s.values[dim] = f_r;
        }
      } else if (f_r < f_second) {
        s.points[dim] = std::move(reflected);
        s.values[dim] = f_r;
      } else {
        const bool outside = f_r < f_worst;
        std::vector<double> contracted = outside ? combine(centroid, reflected, 0.5) : combine(centroid, worst, 0.5);
        const double f_c = objective(contracted);
        if (f_c < (outside ? f_r : f_worst)) {
          s.points[dim] = std::move(contracted);
          s.values[dim] = f_c;
        } else {
          for (std::size_t i = 1; i <= dim; ++i) {
            s.points[i] = combine(s.points[0], s.points[i], 0.5);
            s.values[i] = objective(s.points[i]);
          }
        }
      }
      s.sort();
      if (s.values[0] < result.value) {
        result.value = s.values[0];
        result.x = s.points[0];
      }
      result.trace.push_back(result.value);
    }

    result.converged = converged;
    if (!converged) break;
    // a restart that finds nothing better confirms the minimum
    if (restart > 0 && !(result.value < value_before - 1e-14 * (1.0 + std::abs(value_before)))) break;
  }
  return result;
}

}  // namespace stfreq
