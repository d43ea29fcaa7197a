#include <chrono>
#include <cmath>
#include <numeric>

#include "doctest.h"
#include "test_data.hpp"
#include "volest/error.hpp"
#include "volest/features.hpp"

using namespace volest;
using namespace std::chrono;

namespace {

double block_sum(const FeatureVector& fv, std::size_t start, std::size_t len) {
  return std::accumulate(fv.values.begin() + static_cast<long>(start),
                         fv.values.begin() + static_cast<long>(start + len), 0.0);
}

}  // namespace

TEST_CASE("weather encoding") {
  const auto cats = weather_categories();
  REQUIRE(cats.size() == 33);
  CHECK(cats.front() == "Clear");
  CHECK(cats.back() == "Light Ice Pellets");

  SUBCASE("known category") {
    const auto w = encode_weather(70, 10, 0, "Clear");
    CHECK(w[0] == 70);
    CHECK(w[1] == 10);
    CHECK(w[2] == 0);
    CHECK(w[3] == 1.0);
    CHECK(std::accumulate(w.begin() + 3, w.end(), 0.0) == 1.0);
  }
  SUBCASE("unrecognized text falls back to Unknown") {
    const auto w = encode_weather(30, 1, 0.2, "Volcanic Ash");
    CHECK(w[3 + unknown_weather_slot()] == 1.0);
    CHECK(cats[unknown_weather_slot()] == "Unknown");
    CHECK(std::accumulate(w.begin() + 3, w.end(), 0.0) == 1.0);
  }
  SUBCASE("every category hits its own slot") {
    for (std::size_t i = 0; i < cats.size(); ++i) {
      const auto w = encode_weather(0, 0, 0, cats[i]);
      CHECK(w[3 + i] == 1.0);
      CHECK(std::accumulate(w.begin() + 3, w.end(), 0.0) == 1.0);
    }
  }
}

TEST_CASE("temporal encoding") {
  HolidayCalendar holidays{{sys_days{year{2016} / July / 4}, Holiday::IndependenceDay},
                           {sys_days{year{2016} / October / 10}, Holiday::ColumbusDay}};
  SUBCASE("Tuesday afternoon") {
    const auto t = encode_temporal({sys_days{year{2016} / July / 5}, 14}, holidays);
    CHECK(t[14] == 1.0);
    CHECK(std::accumulate(t.begin(), t.begin() + 24, 0.0) == 1.0);
    for (std::size_t i = 24; i < 29; ++i) CHECK(t[i] == 0.0);
  }
  SUBCASE("Independence Day") {
    const auto t = encode_temporal({sys_days{year{2016} / July / 4}, 9}, holidays);
    CHECK(t[27] == 1.0);
    CHECK(t[26] == 0.0);
    CHECK(t[28] == 0.0);
  }
  SUBCASE("Saturday midnight") {
    const auto t = encode_temporal({sys_days{year{2016} / July / 2}, 0}, holidays);
    CHECK(t[0] == 1.0);
    CHECK(t[24] == 1.0);
    CHECK(t[25] == 0.0);
  }
  SUBCASE("Sunday") {
    const auto t = encode_temporal({sys_days{year{2016} / July / 3}, 23}, holidays);
    CHECK(t[23] == 1.0);
    CHECK(t[25] == 1.0);
  }
}

TEST_CASE("infrastructure encoding") {
  StationMeta m;
  m.lanes = 3;
  m.speed_limit = 65;
  m.road_class = RoadClass::Motorway;
  m.road_type = RoadType::Interstate;
  CHECK(encode_infrastructure(m) == std::array<double, 7>{3, 65, 1, 0, 1, 0, 0});
  m.lanes = 1;
  m.speed_limit = 45;
  m.road_class = RoadClass::Trunk;
  m.road_type = RoadType::MD;
  CHECK(encode_infrastructure(m) == std::array<double, 7>{1, 45, 0, 1, 0, 0, 1});
}

TEST_CASE("assemble layout") {
  std::mt19937_64 rng(11);
  const auto meta = testdata::random_meta(rng);
  auto obs = testdata::random_observation(rng, meta);
  obs.probe_counts = {1, 2, 3, 4, 5, 6, 7, 8, 9};
  obs.profile_estimate = 1234.5;
  const auto fv = assemble(obs, meta, {});
  CHECK(fv.values.size() == 84);
  for (std::size_t i = 0; i < 9; ++i) CHECK(fv.values[i] == static_cast<double>(i + 1));
  CHECK(fv.values[layout::kProfile] == 1234.5);
  CHECK(fv.values[83] == 1234.5);
  CHECK(fv.target == obs.target_volume);
  CHECK(fv.values[layout::kSpeed] == obs.avg_speed);
  CHECK(layout::column_names().size() == 84);
  CHECK(layout::column_names()[83] == "profile_estimate");

  SUBCASE("probe slot is class-major") {
    CHECK(probe_slot(0, 2) == 2);
    CHECK(probe_slot(2, 0) == 6);
    CHECK(obs.probes_in_hour() == 1 + 2 + 4 + 5 + 7 + 8);
  }
  SUBCASE("carriageway mismatch") {
    auto other = meta;
    other.direction = Direction::B;
    CHECK_THROWS_AS(assemble(obs, other, {}), StructuralError);
  }
}

TEST_CASE("block sums hold on random observations") {
  std::mt19937_64 rng(2718);
  HolidayCalendar holidays{{sys_days{year{2016} / July / 4}, Holiday::IndependenceDay}};
  for (int i = 0; i < 10000; ++i) {
    const auto meta = testdata::random_meta(rng);
    const auto obs = testdata::random_observation(rng, meta);
    const auto fv = assemble(obs, meta, holidays);
    REQUIRE(fv.values.size() == 84);
    CHECK(block_sum(fv, layout::kWeatherOneHot, 33) == 1.0);
    CHECK(block_sum(fv, layout::kTemporal, 24) == 1.0);
    CHECK(block_sum(fv, layout::kInfrastructure + 2, 2) == 1.0);
    CHECK(block_sum(fv, layout::kInfrastructure + 4, 3) == 1.0);
    // same inputs, same outputs
    CHECK(assemble(obs, meta, holidays).values == fv.values);
  }
}

TEST_CASE("standardizer") {
  std::mt19937_64 rng(5);
  std::vector<FeatureVector> rows;
  for (int i = 0; i < 500; ++i) {
    const auto meta = testdata::random_meta(rng);
    auto fv = assemble(testdata::random_observation(rng, meta), meta, {});
    fv.values[layout::kWeatherNumeric + 2] = 0.25;  // constant column
    rows.push_back(fv);
  }
  const auto st = Standardizer::fit(rows);
  const auto indicators = layout::indicator_columns();

  SUBCASE("constant column maps to zero") {
    CHECK(st.stds()[layout::kWeatherNumeric + 2] == 1.0);
    CHECK(st.apply(rows[3]).values[layout::kWeatherNumeric + 2] == 0.0);
  }
  SUBCASE("continuous columns have mean 0, sd 1 after scaling") {
    RowMatrix m(static_cast<Eigen::Index>(rows.size()), 84);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      const auto s = st.apply(rows[r]);
      for (std::size_t c = 0; c < 84; ++c) m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = s.values[c];
    }
    for (std::size_t c = 0; c < 84; ++c) {
      if (std::find(indicators.begin(), indicators.end(), c) != indicators.end()) continue;
      if (c == layout::kWeatherNumeric + 2) continue;
      const auto col = m.col(static_cast<Eigen::Index>(c));
      const double mean = col.mean();
      const double sd = std::sqrt((col.array() - mean).square().mean());
      CHECK(std::abs(mean) < 1e-9);
      CHECK(sd == doctest::Approx(1.0).epsilon(1e-9));
    }
  }
  SUBCASE("indicator columns pass through and inputs are not mutated") {
    const auto original = rows[7];
    const auto scaled = st.apply(rows[7]);
    CHECK(rows[7].values == original.values);
    for (auto c : indicators) CHECK(scaled.values[c] == original.values[c]);
  }
  SUBCASE("matrix apply matches row apply") {
    RowMatrix m(2, 84);
    for (std::size_t c = 0; c < 84; ++c) {
      m(0, static_cast<Eigen::Index>(c)) = rows[0].values[c];
      m(1, static_cast<Eigen::Index>(c)) = rows[1].values[c];
    }
    const RowMatrix s = st.apply(m);
    const auto r1 = st.apply(rows[1]);
    for (std::size_t c = 0; c < 84; ++c) CHECK(s(1, static_cast<Eigen::Index>(c)) == r1.values[c]);
  }
  SUBCASE("held-out outliers cannot reach a standardizer fitted on training rows") {
    std::vector<FeatureVector> train(rows.begin(), rows.begin() + 400);
    std::vector<FeatureVector> test(rows.begin() + 400, rows.end());
    const auto before = Standardizer::fit(train);
    test[0].values[0] = 1e9;
    const auto after = Standardizer::fit(train);
    CHECK(before == after);
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(Standardizer::fit(std::span<const FeatureVector>{}), DataError);
    CHECK_THROWS_AS(st.apply(std::vector<double>(3, 0.0)), StructuralError);
  }
}
