#include "stfreq/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "stfreq/dft.hpp"
#include "stfreq/error.hpp"
#include "stfreq/fv.hpp"
#include "stfreq/indeptest.hpp"
#include "stfreq/moments.hpp"
#include "stfreq/panel.hpp"
#include "stfreq/parallel.hpp"
#include "stfreq/simulate.hpp"
#include "stfreq/special.hpp"
#include "stfreq/specmodel.hpp"
#include "stfreq/whittle.hpp"

namespace stfreq::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitReject = 3;
constexpr int kExitNumerical = 4;

const std::vector<std::string> kCommands = {"variogram", "fv", "fit", "test-indep", "simulate", "oracle-check"};

struct Options {
  unsigned threads = 0;
  bool paper_constants = false;
  std::string config;

  std::string panel;
  std::string stations;
  std::string out_dir = ".";
  std::vector<std::string> lags;
  std::vector<long> time_lags{0};
  double delta = 0.0;
  std::string kernel = "modified-daniell";
  std::optional<std::size_t> bandwidth;
  std::string model;
  std::size_t max_iter = 20000;
  std::size_t k = 2;
  double alpha = 0.05;
  std::string spec;
  std::string out = "panel.csv";
  std::string stations_out;
};

Coords parse_lag(const std::string& text) {
  Coords out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    double v = 0.0;
    const char* first = item.data();
    const char* last = item.data() + item.size();
    while (first < last && *first == ' ') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last) fail(ErrorCode::InvalidParams, "lag '" + text + "' is not a comma-separated vector");
    out.push_back(v);
  }
  if (out.empty()) fail(ErrorCode::InvalidParams, "empty lag");
  return out;
}

std::vector<Coords> parse_lags(const std::vector<std::string>& texts) {
  std::vector<Coords> out;
  for (const auto& t : texts) out.push_back(parse_lag(t));
  return out;
}

std::string join(const Coords& h, char sep) {
  std::string out;
  for (std::size_t i = 0; i < h.size(); ++i) {
    if (i > 0) out += sep;
    out += format_double(h[i]);
  }
  return out;
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::Io, "cannot write '" + path.string() + "'");
  return out;
}

fs::path output_dir(const Options& opt) {
  fs::path dir(opt.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(ErrorCode::Io, "cannot create output directory '" + dir.string() + "': " + ec.message());
  return dir;
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    fail(ErrorCode::InvalidParams, path.string() + ": " + e.what());
  }
}

std::string config_value(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  if (v.is_number()) return format_double(v.get<double>());
  if (v.is_array()) {
    // a lag written as [1, 0]
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i > 0) out += ',';
      out += config_value(v[i]);
    }
    return out;
  }
  fail(ErrorCode::InvalidParams, "unsupported config value " + v.dump());
}

bool has_flag(const std::vector<std::string>& args, const std::string& flag) {
  return std::any_of(args.begin(), args.end(), [&](const std::string& a) { return a == flag || a.rfind(flag + "=", 0) == 0; });
}

// Flags from --config fill in whatever the command line left out.
std::vector<std::string> merge_config(std::vector<std::string> args) {
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  if (path.empty()) return args;
  const json config = read_json(path);
  if (!config.is_object()) fail(ErrorCode::InvalidParams, path + ": config must be a JSON object");

  const bool has_command = std::any_of(args.begin(), args.end(), [](const std::string& a) {
    return std::find(kCommands.begin(), kCommands.end(), a) != kCommands.end();
  });
  if (!has_command && config.contains("command")) args.insert(args.begin(), config.at("command").get<std::string>());

  for (const auto& [key, value] : config.items()) {
    if (key == "command" || key == "config") continue;
    const std::string flag = "--" + key;
    if (has_flag(args, flag)) continue;
    if (value.is_boolean()) {
      if (value.get<bool>()) args.push_back(flag);
    } else if (value.is_array() && !value.empty() && (value[0].is_array() || value[0].is_string())) {
      for (const auto& item : value) {
        args.push_back(flag);
        args.push_back(config_value(item));
      }
    } else if (value.is_array() && key != "h") {
      for (const auto& item : value) {
        args.push_back(flag);
        args.push_back(config_value(item));
      }
    } else {
      args.push_back(flag);
      args.push_back(config_value(value));
    }
  }
  return args;
}

SpectrumConstants constants_of(const Options& opt) {
  return opt.paper_constants ? SpectrumConstants::Paper : SpectrumConstants::Consistent;
}

int cmd_variogram(const Options& opt) {
  const Panel panel = load_panel(opt.stations, opt.panel);
  const auto lags = parse_lags(opt.lags);
  const fs::path path = output_dir(opt) / "variogram.csv";
  std::ofstream out = open_output(path);
  out << "h,h_norm,u,count,gamma_hat,c_hat\n";
  for (const auto& h : lags) {
    for (long u : opt.time_lags) {
      const SpaceTimeLag lag{h, u, opt.delta};
      const MomentEstimate gamma = matheron_variogram(panel, lag);
      const MomentEstimate cov = sample_covariance(panel, lag);
      out << join(h, ';') << ',' << format_double(norm(h)) << ',' << u << ',' << gamma.count << ','
          << format_double(gamma.value) << ',' << format_double(cov.value) << '\n';
    }
  }
  std::cout << "wrote " << path.string() << '\n';
  return kExitOk;
}

int cmd_fv(const Options& opt) {
  const Panel panel = load_panel(opt.stations, opt.panel);
  const auto lags = parse_lags(opt.lags);
  const SpectralPanel spec = dft_all(panel);
  const std::size_t n = spec.n();
  const Kernel kernel = Kernel::parse(opt.kernel, opt.bandwidth.value_or(default_bandwidth(n)));
  const fs::path dir = output_dir(opt);

  json summary{{"n", n}, {"m", spec.m()}, {"kernel", kernel.name()}, {"bandwidth", kernel.half_width},
               {"tolerance", opt.delta}, {"lags", json::array()}};
  for (const auto& h : lags) {
    const LagPairSet pairs = build_lag_pairs(panel.stations(), h, opt.delta);
    const FrequencyVariogram fv = estimate_fv(spec, pairs, kernel);
    const std::string name = "fv_h" + join(h, '.') + ".csv";
    std::ofstream out = open_output(dir / name);
    out << "omega,raw,smoothed,var\n";
    for (std::size_t k = 0; k <= n / 2; ++k) {
      out << format_double(fv.freqs[k]) << ',' << format_double(fv.raw[k]) << ',' << format_double(fv.smoothed[k])
          << ',' << format_double(fv.variance[k]) << '\n';
    }
    summary["lags"].push_back({{"h", h}, {"h_norm", norm(h)}, {"count", fv.count}, {"file", name},
                               {"integrated_raw", integrate_spectrum(fv.raw)},
                               {"integrated_smoothed", integrate_spectrum(fv.smoothed)}});
    std::cout << "wrote " << (dir / name).string() << '\n';
  }
  try {
    const NuggetScan scan = nugget_scan(spec, panel.stations(), lags, opt.delta, kernel);
    summary["nugget"] = {{"intercept", scan.intercept}, {"slope", scan.slope}};
  } catch (const Error& e) {
    if (e.code() != ErrorCode::InsufficientLags) throw;
    summary["nugget"] = nullptr;
    summary["nugget_status"] = e.what();
  }
  std::ofstream out = open_output(dir / "fv_summary.json");
  out << summary.dump(2) << '\n';
  return kExitOk;
}

int cmd_fit(const Options& opt) {
  const Panel panel = load_panel(opt.stations, opt.panel);
  const json model_json = read_json(opt.model);
  ModelTemplate model = model_json.get<ModelTemplate>();
  if (opt.paper_constants) model.constants = SpectrumConstants::Paper;
  std::vector<Coords> lags = parse_lags(opt.lags);
  if (lags.empty() && model_json.contains("lags")) lags = model_json.at("lags").get<std::vector<Coords>>();
  if (lags.empty()) fail(ErrorCode::EmptyLagSet, "fit needs lags from --h or the model template");

  const WhittleProblem problem = make_problem(dft_all(panel), panel.stations(), lags, opt.delta, model);
  FitOptions fo;
  fo.max_iterations = opt.max_iter;
  const FitResult result = fit(problem, fo);

  const fs::path dir = output_dir(opt);
  {
    std::ofstream trace = open_output(dir / "fit_trace.csv");
    trace << "iteration,criterion\n";
    for (std::size_t i = 0; i < result.trace.size(); ++i) trace << i + 1 << ',' << format_double(result.trace[i]) << '\n';
  }
  json j = to_json(result);
  j["trace_path"] = (dir / "fit_trace.csv").string();
  j["constants"] = model.constants == SpectrumConstants::Paper ? "paper" : "consistent";
  std::ofstream out = open_output(dir / "fit_result.json");
  out << j.dump(2) << '\n';
  std::cout << "wrote " << (dir / "fit_result.json").string() << '\n';
  return kExitOk;
}

int cmd_test_indep(const Options& opt) {
  const Panel panel = load_panel(opt.stations, opt.panel);
  const IndependenceReport report = independence_test(panel, opt.k, opt.alpha);
  std::cout << to_json(report).dump(2) << '\n';
  return report.reject ? kExitReject : kExitOk;
}

int cmd_simulate(const Options& opt) {
  const SimSpec spec = parse_sim_spec(read_json(opt.spec));
  const fs::path out_path(opt.out);
  if (out_path.has_parent_path()) fs::create_directories(out_path.parent_path());

  if (spec.kind == SimKind::WhittlePeriodogram) {
    const auto data = simulate_whittle_periodograms(spec.params, spec.lags, spec.pairs_per_lag, spec.n, spec.seed,
                                                    constants_of(opt));
    std::ofstream out = open_output(out_path);
    out << "h,pair,k,omega,periodogram\n";
    for (const auto& lag : data) {
      for (std::size_t p = 0; p < lag.pairs.size(); ++p) {
        for (std::size_t k = 0; k < spec.n; ++k) {
          out << join(lag.h, ';') << ',' << p << ',' << k << ',' << format_double(fourier_frequency(k, spec.n)) << ','
              << format_double(lag.pairs[p][k]) << '\n';
        }
      }
    }
    std::cout << "wrote " << out_path.string() << '\n';
    return kExitOk;
  }

  const Panel panel = spec.kind == SimKind::White
                          ? simulate_white(spec.stations, spec.n, spec.sigmas, spec.seed)
                          : simulate_separable(spec.stations, spec.n, spec.spatial, spec.rho, spec.seed, spec.nugget);
  const fs::path stations_path =
      opt.stations_out.empty() ? out_path.parent_path() / "stations.csv" : fs::path(opt.stations_out);
  write_panel(panel, out_path);
  write_stations(panel.stations(), stations_path);
  std::cout << "wrote " << out_path.string() << " and " << stations_path.string() << '\n';
  return kExitOk;
}

// Integral representation K_nu(x) = int_0^inf exp(-x cosh t) cosh(nu t) dt
// by the trapezoid rule, which converges geometrically here.
double bessel_k_quadrature(double nu, double x) {
  const double step = 1.0 / 64.0;
  double sum = 0.5 * std::exp(-x);
  for (int i = 1;; ++i) {
    const double t = step * i;
    const double term = std::exp(-x * std::cosh(t) + nu * t) * 0.5 * (1.0 + std::exp(-2.0 * nu * t));
    sum += term;
    if (term < 1e-300 || (term < 1e-18 * sum && t > 1.0)) break;
  }
  return sum * step;
}

int cmd_oracle_check(const Options& opt) {
  const SpectrumConstants constants = constants_of(opt);
  int failures = 0;
  auto report = [&](const std::string& name, double a, double b, double tol) {
    const double rel = std::abs(a - b) / std::abs(b);
    const bool ok = rel <= tol;
    if (!ok) ++failures;
    std::cout << (ok ? "PASS " : "FAIL ") << name << ": " << format_double(a) << " vs " << format_double(b)
              << " (rel " << format_double(rel) << ", tol " << format_double(tol) << ")\n";
  };

  report("bessel K_1(1) vs quadrature", bessel_k(1.0, 1.0), bessel_k_quadrature(1.0, 1.0), 1e-8);
  report("bessel K_2.5(0.5) vs quadrature", bessel_k(2.5, 0.5), bessel_k_quadrature(2.5, 0.5), 1e-8);

  const Coords h{1.0, 0.0};
  SpectrumParams unit;
  unit.poly = {1.0, 0.0, 0.0, 0.0, 0.0};
  const double pi = std::numbers::pi;
  report("cross spectrum at unit parameters vs K_1(1)/(8 pi^2)",
         cross_spectrum({{1.0, 0.0}, 0.0, unit}, h, constants), bessel_k(1.0, 1.0) / (8.0 * pi * pi), 1e-10);

  for (double nu : {1.0, 1.5, 2.0}) {
    SpectrumParams p;
    p.nu = nu;
    p.sigma_eta2 = 1.3;
    p.poly = {0.8, 0.5, 0.7, 0.0, 0.0};
    const double omega = 0.9;
    const double marginal = marginalize_oracle(omega, p, h);
    const double temporal = temporal_spectrum(omega, p, h, constants);
    const double limit = cross_spectrum({{1e-6, 0.0}, omega, p}, h, constants);
    const std::string tag = "nu=" + format_double(nu) + ": ";
    report(tag + "temporal spectrum vs lambda-marginal", temporal, marginal, 1e-4);
    report(tag + "cross spectrum at |L|=1e-6 vs temporal spectrum", limit, temporal, 1e-4);
    report(tag + "cross spectrum at |L|=1e-6 vs lambda-marginal", limit, marginal, 1e-4);
  }
  std::cout << (failures == 0 ? "all oracle checks passed\n" : std::to_string(failures) + " oracle check(s) failed\n");
  return failures == 0 ? kExitOk : kExitNumerical;
}

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"Frequency-domain tools for spatio-temporal panels"};
  app.name("stfreq");
  app.set_help_flag("--help", "Print this help message and exit");
  app.require_subcommand(1);
  app.fallthrough();

  Options opt;
  app.add_option("--threads", opt.threads, "Worker threads (default: STFREQ_THREADS or logical cores)");
  app.add_flag("--paper-constants", opt.paper_constants, "Use the alternative (2 pi)^{d/2} temporal and (2 pi)^d cross-spectrum constants");
  app.add_option("--config", opt.config, "JSON file supplying defaults for any flag");

  auto add_inputs = [&](CLI::App* sub) {
    sub->set_help_flag("--help", "Print this help message and exit");
    sub->add_option("--panel", opt.panel, "Panel CSV (t,<station ids>)")->required();
    sub->add_option("--stations", opt.stations, "Stations CSV (station_id,x1,...,xd)")->required();
  };
  auto add_lags = [&](CLI::App* sub, bool required) {
    auto* o = sub->add_option("--h", opt.lags, "Spatial lag as comma-separated components; repeatable");
    if (required) o->required();
    sub->add_option("--delta", opt.delta, "Lag tolerance")->check(CLI::NonNegativeNumber);
    sub->add_option("--out-dir", opt.out_dir, "Output directory");
  };

  auto* variogram = app.add_subcommand("variogram", "Matheron variogram and covariance estimates");
  add_inputs(variogram);
  add_lags(variogram, true);
  variogram->add_option("--u", opt.time_lags, "Time lags; repeatable (default 0)");

  auto* fv = app.add_subcommand("fv", "Smoothed frequency variogram per lag and nugget summary");
  add_inputs(fv);
  add_lags(fv, true);
  fv->add_option("--kernel", opt.kernel, "daniell | modified-daniell | bartlett-window");
  fv->add_option("--bandwidth", opt.bandwidth, "Kernel half-width (default ceil(n^0.4))");

  auto* fit_cmd = app.add_subcommand("fit", "Pooled Whittle fit of the Laplacian spectrum");
  add_inputs(fit_cmd);
  add_lags(fit_cmd, false);
  fit_cmd->add_option("--model", opt.model, "Model template JSON")->required();
  fit_cmd->add_option("--max-iter", opt.max_iter, "Simplex iteration cap");

  auto* indep = app.add_subcommand("test-indep", "Spatial independence test");
  add_inputs(indep);
  indep->add_option("--k", opt.k, "Smoothing half-width")->check(CLI::PositiveNumber);
  indep->add_option("--alpha", opt.alpha, "Test level")->check(CLI::Range(0.0, 1.0));

  auto* sim = app.add_subcommand("simulate", "Synthetic panels and periodograms");
  sim->set_help_flag("--help", "Print this help message and exit");
  sim->add_option("--spec", opt.spec, "Simulation spec JSON")->required();
  sim->add_option("--out", opt.out, "Output CSV");
  sim->add_option("--stations-out", opt.stations_out, "Stations CSV (default: stations.csv next to --out)");

  auto* oracle = app.add_subcommand("oracle-check", "Spectrum consistency and Bessel accuracy checks");
  oracle->set_help_flag("--help", "Print this help message and exit");

  try {
    std::vector<std::string> args(argv + 1, argv + argc);
    args = merge_config(std::move(args));
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    std::cout << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    std::cout << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (opt.threads > 0) set_default_threads(opt.threads);
    if (variogram->parsed()) return cmd_variogram(opt);
    if (fv->parsed()) return cmd_fv(opt);
    if (fit_cmd->parsed()) return cmd_fit(opt);
    if (indep->parsed()) return cmd_test_indep(opt);
    if (sim->parsed()) return cmd_simulate(opt);
    if (oracle->parsed()) return cmd_oracle_check(opt);
  } catch (const Error& e) {
    std::cerr << "error [" << to_string(e.code()) << "]: " << e.what() << '\n';
    return is_numerical(e.code()) ? kExitNumerical : kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace stfreq::cli
