#include "stfreq/whittle.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "stfreq/error.hpp"
#include "stfreq/nelder_mead.hpp"

namespace stfreq {

namespace {

// Smallest eigenvalue allowed for the unit-diagonal scaled Hessian. An exact
// ridge measures about 3e-5 here (finite-difference noise), while weakly
// identified but genuine fits sit near 1e-1.
constexpr double kSingularThreshold = 1e-3;
constexpr double kFdStep = 1e-5;

bool log_scaled(std::size_t index) {
  return index == static_cast<std::size_t>(Param::SigmaEta2) || index == static_cast<std::size_t>(Param::A0) ||
         index == static_cast<std::size_t>(Param::Nu);
}

std::size_t param_index(const std::string& name) {
  for (std::size_t i = 0; i < kParamCount; ++i) {
    if (name == kParamNames[i]) return i;
  }
  fail(ErrorCode::InvalidParams, "unknown parameter name '" + name + "'");
}

double fd_step(double value) { return value == 0.0 ? kFdStep : kFdStep * std::abs(value); }

std::vector<double> model_spectrum(const Coords& h, const SpectrumParams& psi, const std::vector<std::size_t>& freqs,
                                   std::size_t n, SpectrumConstants constants) {
  std::vector<double> g(freqs.size());
  for (std::size_t q = 0; q < freqs.size(); ++q) {
    g[q] = temporal_spectrum(fourier_frequency(freqs[q], n), psi, h, constants);
    if (!(g[q] > 0.0) || !std::isfinite(g[q])) fail(ErrorCode::InvalidParams, "model spectrum is not positive");
  }
  return g;
}

double single_from_model(const std::vector<double>& periodogram, const std::vector<double>& g,
                         const std::vector<std::size_t>& freqs) {
  double q = 0.0;
  for (std::size_t idx = 0; idx < freqs.size(); ++idx) q += std::log(g[idx]) + periodogram[freqs[idx]] / g[idx];
  return q;
}

}  // namespace

ParamVector pack(const SpectrumParams& p) {
  return {p.sigma_eta2, p.poly.a0, p.poly.a1, p.poly.c1, p.poly.c2, p.poly.c3, p.nu};
}

SpectrumParams unpack(const ParamVector& v, std::size_t d) {
  SpectrumParams p;
  p.sigma_eta2 = v[0];
  p.poly = {v[1], v[2], v[3], v[4], v[5]};
  p.nu = v[6];
  p.d = d;
  return p;
}

std::vector<std::size_t> ModelTemplate::free_indices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < kParamCount; ++i) {
    if (free[i]) out.push_back(i);
  }
  return out;
}

void ModelTemplate::check_bounds(const ParamVector& values) const {
  for (std::size_t i : free_indices()) {
    if (!(lower[i] <= values[i] && values[i] <= upper[i])) {
      fail(ErrorCode::InvalidParams, std::string("parameter ") + kParamNames[i] + " = " + std::to_string(values[i]) +
                                         " lies outside [" + std::to_string(lower[i]) + ", " +
                                         std::to_string(upper[i]) + "]");
    }
    if (log_scaled(i) && !(lower[i] > 0.0)) {
      fail(ErrorCode::InvalidParams, std::string("lower bound of ") + kParamNames[i] + " must be positive");
    }
  }
}

void to_json(nlohmann::json& j, const ModelTemplate& t) {
  j = nlohmann::json::object();
  j["params"] = t.init;
  j["free"] = nlohmann::json::array();
  for (std::size_t i : t.free_indices()) j["free"].push_back(kParamNames[i]);
  for (std::size_t i = 0; i < kParamCount; ++i) j["bounds"][kParamNames[i]] = {t.lower[i], t.upper[i]};
  j["constants"] = t.constants == SpectrumConstants::Paper ? "paper" : "consistent";
}

void from_json(const nlohmann::json& j, ModelTemplate& t) {
  t = ModelTemplate{};
  if (j.contains("params")) t.init = j.at("params").get<SpectrumParams>();
  if (j.contains("free")) {
    t.free.fill(false);
    for (const auto& name : j.at("free")) t.free[param_index(name.get<std::string>())] = true;
  }
  if (j.contains("bounds")) {
    for (const auto& [name, range] : j.at("bounds").items()) {
      const std::size_t i = param_index(name);
      if (!range.is_array() || range.size() != 2) fail(ErrorCode::InvalidParams, "bounds must be [lower, upper]");
      t.lower[i] = range[0].get<double>();
      t.upper[i] = range[1].get<double>();
    }
  }
  if (j.contains("constants")) {
    const auto c = j.at("constants").get<std::string>();
    if (c == "paper") {
      t.constants = SpectrumConstants::Paper;
    } else if (c == "consistent") {
      t.constants = SpectrumConstants::Consistent;
    } else {
      fail(ErrorCode::InvalidParams, "constants must be 'consistent' or 'paper'");
    }
  }
}

void WhittleProblem::validate() const {
  if (n < 2) fail(ErrorCode::TooFewObservations, "need at least two time points");
  if (lags.empty()) fail(ErrorCode::EmptyLagSet, "no lags in the Whittle problem");
  if (freqs.empty()) fail(ErrorCode::InvalidParams, "empty frequency subset");
  for (std::size_t k : freqs) {
    if (k >= n) fail(ErrorCode::IndexOutOfRange, "frequency index " + std::to_string(k) + " >= n");
  }
  for (const auto& lag : lags) {
    if (lag.h.size() != model.init.d) fail(ErrorCode::DimensionMismatch, "lag dimension differs from model d");
    if (lag.pairs.empty()) fail(ErrorCode::EmptyLagSet, "a lag has no station pairs");
    for (const auto& p : lag.pairs) {
      if (p.size() != n) fail(ErrorCode::DimensionMismatch, "periodogram length differs from n");
    }
  }
}

std::vector<std::size_t> default_frequency_subset(std::size_t n) {
  std::vector<std::size_t> out;
  for (std::size_t k = 1; 2 * k < n; ++k) out.push_back(k);
  return out;
}

WhittleProblem make_problem(std::size_t n, std::vector<LagPeriodograms> lags, const ModelTemplate& model) {
  WhittleProblem problem;
  problem.n = n;
  problem.lags = std::move(lags);
  problem.freqs = default_frequency_subset(n);
  problem.model = model;
  problem.validate();
  return problem;
}

WhittleProblem make_problem(const SpectralPanel& spec, const StationSet& stations, const std::vector<Coords>& lags,
                            double tolerance, const ModelTemplate& model) {
  if (stations.size() != spec.m()) fail(ErrorCode::DimensionMismatch, "station count differs from spectral panel rows");
  std::vector<LagPeriodograms> data;
  for (const auto& h : lags) {
    const LagPairSet set = build_lag_pairs(stations, h, tolerance);
    if (set.empty()) fail(ErrorCode::EmptyLagSet, "no station pairs match lag of norm " + std::to_string(norm(h)));
    LagPeriodograms lp{h, {}};
    for (const auto& [i, j] : set.pairs) {
      const auto inc = increment_dft(spec, i, j);
      std::vector<double> p(inc.size());
      for (std::size_t k = 0; k < inc.size(); ++k) p[k] = std::norm(inc[k]);
      lp.pairs.push_back(std::move(p));
    }
    data.push_back(std::move(lp));
  }
  return make_problem(spec.n(), std::move(data), model);
}

double whittle_single(const std::vector<double>& periodogram, const Coords& h, const SpectrumParams& psi,
                      const std::vector<std::size_t>& freqs, SpectrumConstants constants) {
  const std::size_t n = periodogram.size();
  for (std::size_t k : freqs) {
    if (k >= n) fail(ErrorCode::IndexOutOfRange, "frequency index beyond periodogram length");
  }
  return single_from_model(periodogram, model_spectrum(h, psi, freqs, n, constants), freqs);
}

double whittle_pooled(const WhittleProblem& problem, const SpectrumParams& psi) {
  double total = 0.0;
  for (const auto& lag : problem.lags) {
    const auto g = model_spectrum(lag.h, psi, problem.freqs, problem.n, problem.model.constants);
    double lag_sum = 0.0;
    for (const auto& p : lag.pairs) lag_sum += single_from_model(p, g, problem.freqs);
    total += lag_sum / static_cast<double>(lag.pairs.size());
  }
  return total / static_cast<double>(problem.lags.size());
}

std::vector<double> whittle_terms(const WhittleProblem& problem, const SpectrumParams& psi) {
  std::vector<double> terms(problem.freqs.size(), 0.0);
  const double lag_weight = 1.0 / static_cast<double>(problem.lags.size());
  for (const auto& lag : problem.lags) {
    const auto g = model_spectrum(lag.h, psi, problem.freqs, problem.n, problem.model.constants);
    const double pair_weight = 1.0 / static_cast<double>(lag.pairs.size());
    for (std::size_t q = 0; q < problem.freqs.size(); ++q) {
      double mean_i = 0.0;
      for (const auto& p : lag.pairs) mean_i += p[problem.freqs[q]];
      terms[q] += lag_weight * (std::log(g[q]) + pair_weight * mean_i / g[q]);
    }
  }
  return terms;
}

Eigen::VectorXd criterion_gradient(const WhittleProblem& problem, const SpectrumParams& psi) {
  const auto free = problem.model.free_indices();
  const ParamVector base = pack(psi);
  Eigen::VectorXd grad(static_cast<Eigen::Index>(free.size()));
  for (std::size_t a = 0; a < free.size(); ++a) {
    const double step = fd_step(base[free[a]]);
    ParamVector plus = base, minus = base;
    plus[free[a]] += step;
    minus[free[a]] -= step;
    grad[static_cast<Eigen::Index>(a)] =
        (whittle_pooled(problem, unpack(plus, psi.d)) - whittle_pooled(problem, unpack(minus, psi.d))) / (2.0 * step);
  }
  return grad;
}

SandwichResult sandwich_cov(const WhittleProblem& problem, const SpectrumParams& psi_hat) {
  const auto free = problem.model.free_indices();
  const auto p = static_cast<Eigen::Index>(free.size());
  const std::size_t d = psi_hat.d;
  const ParamVector base = pack(psi_hat);
  std::vector<double> steps(free.size());
  for (std::size_t a = 0; a < free.size(); ++a) steps[a] = fd_step(base[free[a]]);

  auto shifted = [&](std::initializer_list<std::pair<std::size_t, double>> moves) {
    ParamVector v = base;
    for (const auto& [a, sign] : moves) v[free[a]] += sign * steps[a];
    return unpack(v, d);
  };

  SandwichResult out;
  out.hessian = Eigen::MatrixXd::Zero(p, p);
  Eigen::MatrixXd scores(static_cast<Eigen::Index>(problem.freqs.size()), p);
  const double centre = whittle_pooled(problem, psi_hat);
  for (std::size_t a = 0; a < free.size(); ++a) {
    const auto ia = static_cast<Eigen::Index>(a);
    const auto tp = whittle_terms(problem, shifted({{a, 1.0}}));
    const auto tm = whittle_terms(problem, shifted({{a, -1.0}}));
    double qp = 0.0, qm = 0.0;
    for (std::size_t q = 0; q < tp.size(); ++q) {
      scores(static_cast<Eigen::Index>(q), ia) = (tp[q] - tm[q]) / (2.0 * steps[a]);
      qp += tp[q];
      qm += tm[q];
    }
    out.hessian(ia, ia) = (qp - 2.0 * centre + qm) / (steps[a] * steps[a]);
    for (std::size_t b = 0; b < a; ++b) {
      const auto ib = static_cast<Eigen::Index>(b);
      const double fpp = whittle_pooled(problem, shifted({{a, 1.0}, {b, 1.0}}));
      const double fpm = whittle_pooled(problem, shifted({{a, 1.0}, {b, -1.0}}));
      const double fmp = whittle_pooled(problem, shifted({{a, -1.0}, {b, 1.0}}));
      const double fmm = whittle_pooled(problem, shifted({{a, -1.0}, {b, -1.0}}));
      out.hessian(ia, ib) = out.hessian(ib, ia) = (fpp - fpm - fmp + fmm) / (4.0 * steps[a] * steps[b]);
    }
  }
  out.score_outer = scores.transpose() * scores;

  Eigen::VectorXd scale(p);
  for (Eigen::Index a = 0; a < p; ++a) {
    if (!(out.hessian(a, a) > 0.0)) {
      fail(ErrorCode::SingularHessian,
           std::string("Hessian diagonal is not positive for ") + kParamNames[free[static_cast<std::size_t>(a)]]);
    }
    scale[a] = 1.0 / std::sqrt(out.hessian(a, a));
  }
  const Eigen::MatrixXd scaled = scale.asDiagonal() * out.hessian * scale.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(scaled);
  const double smallest = eig.eigenvalues().minCoeff();
  if (!(smallest > kSingularThreshold)) {
    fail(ErrorCode::SingularHessian, "scaled Hessian has eigenvalue " + std::to_string(smallest) +
                                         "; the free parameters are not jointly identifiable");
  }
  const Eigen::MatrixXd inv = out.hessian.inverse();
  Eigen::MatrixXd cov = inv * out.score_outer * inv;
  out.covariance = 0.5 * (cov + cov.transpose());
  return out;
}

std::vector<double> FitResult::std_errors() const {
  std::vector<double> out;
  if (!covariance) return out;
  for (Eigen::Index a = 0; a < covariance->rows(); ++a) out.push_back(std::sqrt(std::max(0.0, (*covariance)(a, a))));
  return out;
}

FitResult fit(const WhittleProblem& problem, const FitOptions& options) {
  problem.validate();
  const ModelTemplate& model = problem.model;
  const auto free = model.free_indices();
  const std::size_t d = model.init.d;
  const ParamVector start = pack(model.init);
  model.check_bounds(start);
  model.init.validate();
  whittle_pooled(problem, model.init);  // surfaces InvalidParams at the start

  auto to_natural = [&](const std::vector<double>& z) {
    ParamVector v = start;
    for (std::size_t a = 0; a < free.size(); ++a) v[free[a]] = log_scaled(free[a]) ? std::exp(z[a]) : z[a];
    return v;
  };
  auto objective = [&](const std::vector<double>& z) {
    const ParamVector v = to_natural(z);
    for (std::size_t i : free) {
      if (!(model.lower[i] <= v[i] && v[i] <= model.upper[i])) return std::numeric_limits<double>::infinity();
    }
    try {
      const double q = whittle_pooled(problem, unpack(v, d));
      return std::isfinite(q) ? q : std::numeric_limits<double>::infinity();
    } catch (const Error&) {
      return std::numeric_limits<double>::infinity();
    }
  };

  std::vector<double> z0(free.size());
  for (std::size_t a = 0; a < free.size(); ++a) z0[a] = log_scaled(free[a]) ? std::log(start[free[a]]) : start[free[a]];

  NelderMeadOptions nm;
  nm.max_iterations = options.max_iterations;
  nm.tolerance = options.tolerance;
  const NelderMeadResult search = nelder_mead(objective, z0, nm);

  ParamVector best = to_natural(search.x);
  // P and its conjugate give the same modulus: report c1 >= 0
  const auto c1 = static_cast<std::size_t>(Param::C1);
  const auto c3 = static_cast<std::size_t>(Param::C3);
  if (best[c1] < 0.0 && (best[c3] == 0.0 || model.free[c3])) {
    ParamVector flipped = best;
    flipped[c1] = -best[c1];
    flipped[c3] = -best[c3];
    bool inside = true;
    for (std::size_t i : free) inside = inside && model.lower[i] <= flipped[i] && flipped[i] <= model.upper[i];
    if (inside) best = flipped;
  }

  FitResult result;
  result.psi_hat = unpack(best, d);
  result.free = free;
  result.criterion_value = whittle_pooled(problem, result.psi_hat);
  result.converged = search.converged;
  result.iterations = search.iterations;
  result.trace = search.trace;
  if (!result.converged) warn("simplex search stopped at the iteration cap before converging");
  if (free.empty()) return result;
  result.gradient_norm = criterion_gradient(problem, result.psi_hat).norm();
  if (options.covariance) {
    try {
      result.covariance = sandwich_cov(problem, result.psi_hat).covariance;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::SingularHessian) throw;
      result.covariance_status = e.what();
    }
  } else {
    result.covariance_status = "not requested";
  }
  return result;
}

nlohmann::json to_json(const FitResult& result) {
  nlohmann::json j;
  j["psi_hat"] = result.psi_hat;
  j["free"] = nlohmann::json::array();
  for (std::size_t i : result.free) j["free"].push_back(kParamNames[i]);
  j["criterion_value"] = result.criterion_value;
  j["converged"] = result.converged;
  j["iterations"] = result.iterations;
  j["gradient_norm"] = result.gradient_norm;
  j["covariance_status"] = result.covariance_status;
  if (result.covariance) {
    const auto se = result.std_errors();
    for (std::size_t a = 0; a < result.free.size(); ++a) j["std_errors"][kParamNames[result.free[a]]] = se[a];
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index a = 0; a < result.covariance->rows(); ++a) {
      nlohmann::json row = nlohmann::json::array();
      for (Eigen::Index b = 0; b < result.covariance->cols(); ++b) row.push_back((*result.covariance)(a, b));
      rows.push_back(row);
    }
    j["covariance"] = rows;
  } else {
    j["covariance"] = nullptr;
  }
  return j;
}

}  // namespace stfreq
