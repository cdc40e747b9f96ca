#include "stfreq/panel.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "stfreq/error.hpp"

namespace stfreq {

StationSet::StationSet(std::vector<Station> stations) : stations_(std::move(stations)) {
  if (stations_.empty()) return;
  dim_ = stations_.front().coords.size();
  if (dim_ == 0) fail(ErrorCode::DimensionMismatch, "station coordinates must have d >= 1");
  std::unordered_map<std::string, std::size_t> seen;
  for (std::size_t i = 0; i < stations_.size(); ++i) {
    const Station& s = stations_[i];
    if (s.coords.size() != dim_) {
      fail(ErrorCode::DimensionMismatch,
           "station '" + s.id + "' has " + std::to_string(s.coords.size()) +
               " coordinates, expected " + std::to_string(dim_));
    }
    for (double c : s.coords) {
      if (!std::isfinite(c)) fail(ErrorCode::NonNumericValue, "station '" + s.id + "' has a non-finite coordinate");
    }
    if (!seen.emplace(s.id, i).second) fail(ErrorCode::DuplicateStation, "duplicate station id '" + s.id + "'");
  }
  for (std::size_t i = 0; i < stations_.size(); ++i) {
    for (std::size_t j = i + 1; j < stations_.size(); ++j) {
      if (stations_[i].coords == stations_[j].coords) {
        warn("stations '" + stations_[i].id + "' and '" + stations_[j].id +
             "' share coordinates; they form zero-lag pairs");
      }
    }
  }
}

std::size_t StationSet::find(const std::string& id) const {
  for (std::size_t i = 0; i < stations_.size(); ++i) {
    if (stations_[i].id == id) return i;
  }
  return stations_.size();
}

Panel::Panel(StationSet stations, RealMatrix values)
    : stations_(std::move(stations)), values_(std::move(values)) {
  if (static_cast<std::size_t>(values_.rows()) != stations_.size()) {
    fail(ErrorCode::DimensionMismatch, "panel has " + std::to_string(values_.rows()) + " rows for " +
                                           std::to_string(stations_.size()) + " stations");
  }
  if (values_.cols() < 1) fail(ErrorCode::EmptyPanel, "panel has no time points");
  if (!values_.allFinite()) fail(ErrorCode::NonNumericValue, "panel contains non-finite values");
}

Panel Panel::drop_last() const {
  if (n() < 2) fail(ErrorCode::TooFewObservations, "cannot drop the only time point");
  return Panel(stations_, values_.leftCols(values_.cols() - 1));
}

double norm(const Coords& v) {
  double sum = 0.0;
  for (double x : v) sum += x * x;
  return std::sqrt(sum);
}

bool lag_matches(const Coords& a, const Coords& b, const Coords& h, double tolerance) {
  double dist2 = 0.0;
  double scale = 0.0;
  for (std::size_t k = 0; k < h.size(); ++k) {
    const double r = (a[k] - b[k]) - h[k];
    dist2 += r * r;
    scale += std::abs(a[k]) + std::abs(b[k]) + std::abs(h[k]);
  }
  const double slack = 64.0 * std::numeric_limits<double>::epsilon() * scale;
  const double bound = tolerance + slack;
  return dist2 <= bound * bound;
}

LagPairSet build_lag_pairs(const StationSet& stations, const Coords& h, double tolerance) {
  if (h.size() != stations.dim()) {
    fail(ErrorCode::DimensionMismatch, "lag has " + std::to_string(h.size()) + " components, stations have d=" +
                                           std::to_string(stations.dim()));
  }
  if (!(tolerance >= 0.0)) fail(ErrorCode::InvalidParams, "tolerance must be nonnegative");

  LagPairSet out{h, tolerance, {}};
  const std::size_t m = stations.size();
  if (m == 0) return out;

  // Sweep on the first coordinate: coords(i)[0] must lie within
  // tolerance (+ slack) of coords(j)[0] + h[0].
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  auto first = [&](std::size_t i) { return stations[i].coords[0]; };
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return first(x) < first(y); });

  double max_abs = 0.0;
  for (const Station& s : stations.stations()) {
    for (double c : s.coords) max_abs = std::max(max_abs, std::abs(c));
  }
  const double window =
      tolerance + 64.0 * std::numeric_limits<double>::epsilon() * (2.0 * max_abs + norm(h)) * stations.dim() + 1e-300;

  for (std::size_t j = 0; j < m; ++j) {
    const double target = first(j) + h[0];
    auto lo = std::lower_bound(order.begin(), order.end(), target - window,
                               [&](std::size_t i, double v) { return first(i) < v; });
    for (auto it = lo; it != order.end() && first(*it) <= target + window; ++it) {
      if (lag_matches(stations[*it].coords, stations[j].coords, h, tolerance)) out.pairs.emplace_back(*it, j);
    }
  }
  std::sort(out.pairs.begin(), out.pairs.end());
  return out;
}

namespace {

struct CsvLine {
  std::size_t number;
  std::vector<std::string> fields;
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<CsvLine> read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open '" + path.string() + "'");
  std::vector<CsvLine> lines;
  std::string raw;
  std::size_t number = 0;
  while (std::getline(in, raw)) {
    ++number;
    if (number == 1 && raw.rfind("\xEF\xBB\xBF", 0) == 0) raw.erase(0, 3);
    const std::string line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    CsvLine parsed{number, {}};
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) parsed.fields.push_back(trim(field));
    if (line.back() == ',') parsed.fields.emplace_back();
    lines.push_back(std::move(parsed));
  }
  return lines;
}

std::string where(const std::filesystem::path& path, std::size_t line) {
  return path.string() + ":" + std::to_string(line);
}

double parse_number(const std::string& text, const std::filesystem::path& path, std::size_t line) {
  double value = 0.0;
  const char* begin = text.data();
  const char* end = begin + text.size();
  if (!text.empty() && *begin == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (text.empty() || ec != std::errc() || ptr != end || !std::isfinite(value)) {
    fail(ErrorCode::NonNumericValue, where(path, line) + ": '" + text + "' is not a finite number");
  }
  return value;
}

}  // namespace

StationSet load_stations(const std::filesystem::path& stations_file) {
  const auto lines = read_csv(stations_file);
  if (lines.empty()) fail(ErrorCode::MissingHeader, stations_file.string() + ": empty file, expected 'station_id,x1,...'");
  const auto& header = lines.front();
  if (header.fields.size() < 2 || header.fields.front() != "station_id") {
    fail(ErrorCode::MissingHeader, where(stations_file, header.number) + ": expected header 'station_id,x1,...,xd'");
  }
  const std::size_t d = header.fields.size() - 1;
  std::vector<Station> stations;
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const auto& row = lines[r];
    if (row.fields.size() != d + 1) {
      fail(ErrorCode::RaggedRows, where(stations_file, row.number) + ": expected " + std::to_string(d + 1) +
                                      " fields, found " + std::to_string(row.fields.size()));
    }
    Station s{row.fields[0], Coords(d)};
    for (std::size_t k = 0; k < d; ++k) s.coords[k] = parse_number(row.fields[k + 1], stations_file, row.number);
    stations.push_back(std::move(s));
  }
  return StationSet(std::move(stations));
}

Panel load_panel(const std::filesystem::path& stations_file, const std::filesystem::path& panel_file) {
  const StationSet all = load_stations(stations_file);
  const auto lines = read_csv(panel_file);
  if (lines.empty()) fail(ErrorCode::MissingHeader, panel_file.string() + ": empty file, expected 't,<id1>,...'");
  const auto& header = lines.front();
  if (header.fields.size() < 2 || header.fields.front() != "t") {
    fail(ErrorCode::MissingHeader, where(panel_file, header.number) + ": expected header 't,<id1>,...,<idm>'");
  }

  std::vector<Station> ordered;
  for (std::size_t c = 1; c < header.fields.size(); ++c) {
    const std::string& id = header.fields[c];
    const std::size_t idx = all.find(id);
    if (idx == all.size()) {
      fail(ErrorCode::UnknownStationColumn, where(panel_file, header.number) + ": column '" + id +
                                                "' is not listed in " + stations_file.string());
    }
    for (const Station& s : ordered) {
      if (s.id == id) fail(ErrorCode::UnknownStationColumn, where(panel_file, header.number) + ": duplicate column '" + id + "'");
    }
    ordered.push_back(all[idx]);
  }

  const std::size_t m = ordered.size();
  const std::size_t n = lines.size() - 1;
  if (n == 0) fail(ErrorCode::EmptyPanel, panel_file.string() + ": no data rows");
  RealMatrix values(m, n);
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const auto& row = lines[r];
    if (row.fields.size() != m + 1) {
      fail(ErrorCode::RaggedRows, where(panel_file, row.number) + ": expected " + std::to_string(m + 1) +
                                      " fields, found " + std::to_string(row.fields.size()));
    }
    parse_number(row.fields[0], panel_file, row.number);
    for (std::size_t i = 0; i < m; ++i) values(i, r - 1) = parse_number(row.fields[i + 1], panel_file, row.number);
  }
  return Panel(StationSet(std::move(ordered)), std::move(values));
}

std::string format_double(double value) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ec == std::errc() ? ptr : buf);
}

void write_stations(const StationSet& stations, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::Io, "cannot write '" + path.string() + "'");
  out << "station_id";
  for (std::size_t k = 0; k < stations.dim(); ++k) out << ",x" << (k + 1);
  out << '\n';
  for (const Station& s : stations.stations()) {
    out << s.id;
    for (double c : s.coords) out << ',' << format_double(c);
    out << '\n';
  }
}

void write_panel(const Panel& panel, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::Io, "cannot write '" + path.string() + "'");
  out << 't';
  for (const Station& s : panel.stations().stations()) out << ',' << s.id;
  out << '\n';
  for (std::size_t t = 0; t < panel.n(); ++t) {
    out << (t + 1);
    for (std::size_t i = 0; i < panel.m(); ++i) out << ',' << format_double(panel.values()(i, t));
    out << '\n';
  }
}

}  // namespace stfreq
