#include <gtest/gtest.h>

#include <fstream>
#include <random>

#include "oracles.hpp"
#include "stfreq/error.hpp"
#include "stfreq/panel.hpp"

using namespace stfreq;

namespace {

void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an stfreq::Error";
  return ErrorCode::Io;
}

StationSet unit_grid() {
  return StationSet({{"a", {0, 0}}, {"b", {1, 0}}, {"c", {0, 1}}, {"d", {1, 1}}});
}

}  // namespace

TEST(StationSet, RejectsDuplicateIdsAndRaggedCoords) {
  EXPECT_EQ(code_of([] { StationSet({{"a", {0, 0}}, {"a", {1, 0}}}); }), ErrorCode::DuplicateStation);
  EXPECT_EQ(code_of([] { StationSet({{"a", {0, 0}}, {"b", {1}}}); }), ErrorCode::DimensionMismatch);
}

TEST(StationSet, WarnsOnDuplicateCoordinates) {
  std::vector<std::string> seen;
  auto previous = set_warning_handler([&](const std::string& m) { seen.push_back(m); });
  StationSet s({{"a", {0, 0}}, {"b", {0, 0}}});
  set_warning_handler(previous);
  EXPECT_EQ(s.size(), 2u);
  ASSERT_EQ(seen.size(), 1u);
  EXPECT_NE(seen[0].find("a"), std::string::npos);
}

TEST(LoadPanel, EmptyPanelFileIsMissingHeader) {
  oracle::TempDir dir("panel");
  write_file(dir / "s.csv", "station_id,x1,x2\na,0,0\n");
  write_file(dir / "p.csv", "");
  EXPECT_EQ(code_of([&] { load_panel(dir / "s.csv", dir / "p.csv"); }), ErrorCode::MissingHeader);
}

TEST(LoadPanel, MinimalPanel) {
  oracle::TempDir dir("panel");
  write_file(dir / "s.csv", "station_id,x1,x2\na,0,0\n");
  write_file(dir / "p.csv", "# comment line\nt,a\n1,1\n2,2\n3,3\n4,4\n");
  const Panel p = load_panel(dir / "s.csv", dir / "p.csv");
  EXPECT_EQ(p.m(), 1u);
  EXPECT_EQ(p.n(), 4u);
  EXPECT_EQ(p.values()(0, 3), 4.0);
}

TEST(LoadPanel, ColumnOrderDefinesStationOrder) {
  oracle::TempDir dir("panel");
  write_file(dir / "s.csv", "station_id,x1\na,0\nb,1\n");
  write_file(dir / "p.csv", "t,b,a\n1,10,20\n2,11,21\n");
  const Panel p = load_panel(dir / "s.csv", dir / "p.csv");
  EXPECT_EQ(p.stations()[0].id, "b");
  EXPECT_EQ(p.stations()[0].coords[0], 1.0);
  EXPECT_EQ(p.values()(1, 1), 21.0);
}

TEST(LoadPanel, ErrorsNameFileAndLine) {
  oracle::TempDir dir("panel");
  write_file(dir / "s.csv", "station_id,x1\na,0\nb,1\n");
  write_file(dir / "unknown.csv", "t,a,zz\n1,1,2\n");
  write_file(dir / "nonnum.csv", "t,a,b\n1,1,2\n2,x,3\n");
  write_file(dir / "ragged.csv", "t,a,b\n1,1,2\n2,3\n");
  EXPECT_EQ(code_of([&] { load_panel(dir / "s.csv", dir / "unknown.csv"); }), ErrorCode::UnknownStationColumn);
  EXPECT_EQ(code_of([&] { load_panel(dir / "s.csv", dir / "ragged.csv"); }), ErrorCode::RaggedRows);
  try {
    load_panel(dir / "s.csv", dir / "nonnum.csv");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonNumericValue);
    EXPECT_NE(std::string(e.what()).find("nonnum.csv:3"), std::string::npos) << e.what();
  }
}

TEST(LoadPanel, RoundTripReproducesValues) {
  oracle::TempDir dir("panel");
  std::mt19937_64 rng(7);
  const Panel original = oracle::random_panel(rng, 5, 17);
  write_stations(original.stations(), dir / "s.csv");
  write_panel(original, dir / "p.csv");
  const Panel back = load_panel(dir / "s.csv", dir / "p.csv");
  ASSERT_EQ(back.m(), original.m());
  EXPECT_TRUE(back.values() == original.values());
  for (std::size_t i = 0; i < back.m(); ++i) EXPECT_EQ(back.stations()[i].coords, original.stations()[i].coords);
}

TEST(LagPairs, UnitGridHasTwoPairsPerAxisLag) {
  const auto pairs = build_lag_pairs(unit_grid(), {1, 0}, 0.0);
  EXPECT_EQ(pairs.count(), 2u);
  for (const auto& [i, j] : pairs.pairs) {
    EXPECT_EQ(unit_grid()[i].coords[0] - unit_grid()[j].coords[0], 1.0);
  }
}

TEST(LagPairs, LagBeyondDiameterIsEmpty) { EXPECT_TRUE(build_lag_pairs(unit_grid(), {5, 5}, 0.0).empty()); }

TEST(LagPairs, DimensionMismatch) {
  EXPECT_EQ(code_of([] { build_lag_pairs(unit_grid(), {1, 0, 0}, 0.0); }), ErrorCode::DimensionMismatch);
}

TEST(LagPairs, MatchesBruteForceOnRandomCloud) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 3.0);
  std::vector<Station> s;
  for (int i = 0; i < 20; ++i) s.push_back({"p" + std::to_string(i), {u(rng), u(rng)}});
  const StationSet set(s);
  for (int trial = 0; trial < 20; ++trial) {
    const Coords h{u(rng) - 1.5, u(rng) - 1.5};
    EXPECT_EQ(build_lag_pairs(set, h, 0.1).pairs, oracle::brute_pairs(set, h, 0.1));
  }
  // lags taken from actual differences must find at least that pair
  const Coords h{s[3].coords[0] - s[7].coords[0], s[3].coords[1] - s[7].coords[1]};
  const auto pairs = build_lag_pairs(set, h, 0.1);
  EXPECT_NE(std::find(pairs.pairs.begin(), pairs.pairs.end(), std::pair<std::size_t, std::size_t>{3, 7}),
            pairs.pairs.end());
}

TEST(LagPairs, NegatedLagReversesPairs) {
  std::mt19937_64 rng(5);
  const Panel p = oracle::random_panel(rng, 12, 2);
  const auto fwd = build_lag_pairs(p.stations(), {1, 2}, 0.5);
  const auto back = build_lag_pairs(p.stations(), {-1, -2}, 0.5);
  ASSERT_EQ(fwd.count(), back.count());
  std::vector<std::pair<std::size_t, std::size_t>> swapped;
  for (const auto& [i, j] : back.pairs) swapped.emplace_back(j, i);
  std::sort(swapped.begin(), swapped.end());
  EXPECT_EQ(fwd.pairs, swapped);
}

TEST(LagPairs, MonotoneInTolerance) {
  std::mt19937_64 rng(9);
  const Panel p = oracle::random_panel(rng, 14, 2, 5);
  std::size_t last = 0;
  for (double tol : {0.0, 0.1, 0.5, 1.0, 1.5, 3.0}) {
    const std::size_t c = build_lag_pairs(p.stations(), {1, 1}, tol).count();
    EXPECT_GE(c, last);
    last = c;
  }
}

TEST(LagPairs, NegativeToleranceRejected) {
  EXPECT_EQ(code_of([] { build_lag_pairs(unit_grid(), {1, 0}, -0.1); }), ErrorCode::InvalidParams);
}

TEST(LagPairs, ExactGridMatchesDespiteRounding) {
  // 0.3 - 0.1 != 0.2 in binary; the tolerance slack still admits the pair
  const StationSet s({{"a", {0.1, 0}}, {"b", {0.3, 0}}});
  EXPECT_EQ(build_lag_pairs(s, {0.2, 0}, 0.0).count(), 1u);
}

TEST(Format, ShortestRoundTrip) {
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(1.0), "1");
  const double x = 1.0 / 3.0;
  EXPECT_EQ(std::stod(format_double(x)), x);
}
