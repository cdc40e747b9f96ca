#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace stfreq {

using RealMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Coords = std::vector<double>;

struct Station {
  std::string id;
  Coords coords;
};

/// Station identifiers with coordinates in R^d. Ids are unique and every
/// coordinate vector has the same length d >= 1. Duplicate coordinates are
/// accepted with a warning since they produce zero-lag pairs.
class StationSet {
 public:
  StationSet() = default;
  explicit StationSet(std::vector<Station> stations);

  std::size_t size() const { return stations_.size(); }
  std::size_t dim() const { return dim_; }
  const Station& operator[](std::size_t i) const { return stations_[i]; }
  const std::vector<Station>& stations() const { return stations_; }

  /// Index of the station with this id, or size() if absent.
  std::size_t find(const std::string& id) const;

 private:
  std::vector<Station> stations_;
  std::size_t dim_ = 0;
};

/// m stations x n equally spaced time points; row i holds station i.
class Panel {
 public:
  Panel(StationSet stations, RealMatrix values);

  const StationSet& stations() const { return stations_; }
  const RealMatrix& values() const { return values_; }
  std::size_t m() const { return static_cast<std::size_t>(values_.rows()); }
  std::size_t n() const { return static_cast<std::size_t>(values_.cols()); }

  /// Copy without the final time point (used when an odd length is required).
  Panel drop_last() const;

 private:
  StationSet stations_;
  RealMatrix values_;
};

/// Directed station pairs (i, j) with coords(i) - coords(j) within the
/// tolerance ball around the lag h, sorted by (i, j).
struct LagPairSet {
  Coords lag;
  double tolerance = 0.0;
  std::vector<std::pair<std::size_t, std::size_t>> pairs;

  std::size_t count() const { return pairs.size(); }
  bool empty() const { return pairs.empty(); }
};

/// The matching predicate behind LagPairSet: ||(a - b) - h|| <= tolerance,
/// with a few ulps of slack so exact-lag grids match at tolerance 0.
bool lag_matches(const Coords& a, const Coords& b, const Coords& h, double tolerance);

LagPairSet build_lag_pairs(const StationSet& stations, const Coords& h, double tolerance = 0.0);

double norm(const Coords& v);

StationSet load_stations(const std::filesystem::path& stations_file);
Panel load_panel(const std::filesystem::path& stations_file, const std::filesystem::path& panel_file);

void write_stations(const StationSet& stations, const std::filesystem::path& path);
void write_panel(const Panel& panel, const std::filesystem::path& path);

/// Shortest round-trip decimal representation used by every writer.
std::string format_double(double value);

}  // namespace stfreq
