#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "test_data.hpp"
#include "volest/dataset.hpp"
#include "volest/error.hpp"

using namespace volest;
using namespace std::chrono;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / "volest_test_dataset";
  fs::create_directories(dir);
  return dir / name;
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream(p) << text;
}

std::string obs_header(bool with_target = true) {
  std::string h = "station_id,direction,timestamp";
  for (const char* c : {"light", "medium", "heavy"})
    for (const char* w : {"first", "second", "prev"}) h += std::string(",probe_") + c + "_" + w;
  h += ",avg_speed,free_flow_speed,temperature,visibility,precipitation,weather,profile_estimate";
  if (with_target) h += ",target_volume";
  return h;
}

}  // namespace

TEST_CASE("timestamps") {
  const auto t = Timestamp::parse("2016-07-04 13:00");
  CHECK(t.to_string() == "2016-07-04 13:00");
  CHECK(t.day_index() == 0);  // Monday
  CHECK(t.plus_hours(11).to_string() == "2016-07-05 00:00");
  CHECK(t.plus_hours(-14).to_string() == "2016-07-03 23:00");
  CHECK_THROWS_AS(Timestamp::parse("2016-07-04 24:00"), DataError);
  CHECK_THROWS_AS(Timestamp::parse("2016-02-30 01:00"), DataError);
  CHECK_THROWS_AS(Timestamp::parse("2016-07-04 13:30"), DataError);
  CHECK_THROWS_AS(Timestamp::parse("garbage"), DataError);
}

TEST_CASE("observation round trip") {
  std::mt19937_64 rng(3);
  const auto meta = testdata::random_meta(rng, "24007");
  std::vector<HourlyObservation> rows;
  for (int i = 0; i < 50; ++i) rows.push_back(testdata::random_observation(rng, meta));
  const auto path = scratch("obs.csv").string();
  write_observations(path, rows);
  const auto back = read_observations(path);
  REQUIRE(back.size() == rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(back[i].station_id == rows[i].station_id);
    CHECK(back[i].timestamp == rows[i].timestamp);
    CHECK(back[i].probe_counts == rows[i].probe_counts);
    CHECK(back[i].avg_speed == rows[i].avg_speed);
    CHECK(back[i].weather == rows[i].weather);
    CHECK(back[i].profile_estimate == rows[i].profile_estimate);
    CHECK(back[i].target_volume == rows[i].target_volume);
  }

  SUBCASE("target column is optional") {
    write_observations(path, rows, false);
    const auto unlabeled = read_observations(path);
    REQUIRE(unlabeled.size() == rows.size());
    CHECK_FALSE(unlabeled[0].target_volume.has_value());
  }
}

TEST_CASE("observation schema errors") {
  const auto path = scratch("bad.csv");
  const std::string row = "S1,A,2016-07-04 13:00,1,2,3,4,5,6,7,8,9,60,65,70,10,0,Clear,500";

  SUBCASE("columns in any order") {
    // move station_id to the end
    auto header = obs_header(false).substr(std::string("station_id,").size()) + ",station_id";
    write_file(path, header + "\n" + row.substr(3) + ",S1\n");
    const auto rows = read_observations(path.string());
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].station_id == "S1");
    CHECK(rows[0].probe_counts[8] == 9);
  }
  SUBCASE("unknown column") {
    write_file(path, obs_header(false) + ",extra\n" + row + ",1\n");
    CHECK_THROWS_AS(read_observations(path.string()), DataError);
  }
  SUBCASE("missing column") {
    auto header = obs_header(false);
    header = header.substr(0, header.rfind(','));
    write_file(path, header + "\n" + row.substr(0, row.rfind(',')) + "\n");
    CHECK_THROWS_AS(read_observations(path.string()), DataError);
  }
  SUBCASE("ragged row") {
    write_file(path, obs_header(false) + "\n" + row + ",7\n");
    CHECK_THROWS_AS(read_observations(path.string()), DataError);
  }
  SUBCASE("negative probe count") {
    write_file(path, obs_header(false) + "\nS1,A,2016-07-04 13:00,-1,2,3,4,5,6,7,8,9,60,65,70,10,0,Clear,500\n");
    CHECK_THROWS_AS(read_observations(path.string()), DataError);
  }
  SUBCASE("missing file") {
    CHECK_THROWS_AS(read_observations((path.parent_path() / "nope.csv").string()), IoError);
  }
}

TEST_CASE("stations and holidays") {
  std::mt19937_64 rng(8);
  std::vector<StationMeta> stations{testdata::random_meta(rng, "S1", Direction::A),
                                    testdata::random_meta(rng, "S1", Direction::B)};
  const auto spath = scratch("stations.csv").string();
  write_stations(spath, stations);
  const auto back = read_stations(spath);
  REQUIRE(back.size() == 2);
  CHECK(back[1].direction == Direction::B);
  CHECK(back[0].lanes == stations[0].lanes);
  CHECK(back[0].aadt == stations[0].aadt);
  CHECK(back[0].road_type == stations[0].road_type);

  SUBCASE("invalid lanes") {
    write_file(spath, "station_id,direction,road_type,road_class,lanes,speed_limit,aadt,latitude,longitude\n"
                      "S1,A,US,Trunk,0,55,1000,39,-76\n");
    CHECK_THROWS_AS(read_stations(spath), DataError);
  }

  const auto hpath = scratch("holidays.txt");
  write_file(hpath, "# comment\n2016-07-04,Independence Day\n\n2016-10-10,Columbus Day  # trailing\n");
  const auto cal = read_holidays(hpath.string());
  REQUIRE(cal.size() == 2);
  CHECK(cal.at(sys_days{year{2016} / July / 4}) == Holiday::IndependenceDay);
  write_holidays(hpath.string(), cal);
  CHECK(read_holidays(hpath.string()) == cal);

  write_file(hpath, "2016-12-25,Christmas Day\n");
  CHECK_THROWS_AS(read_holidays(hpath.string()), DataError);
}

TEST_CASE("dataset validation") {
  std::mt19937_64 rng(9);
  Dataset ds;
  ds.stations.push_back(testdata::random_meta(rng, "S1"));
  auto o = testdata::random_observation(rng, ds.stations[0]);
  ds.observations.push_back(o);
  CHECK_NOTHROW(ds.validate());
  CHECK(ds.station_ids() == std::vector<std::string>{"S1"});

  SUBCASE("duplicate hour") {
    ds.observations.push_back(o);
    CHECK_THROWS_AS(ds.validate(), DataError);
  }
  SUBCASE("missing metadata") {
    o.direction = Direction::B;
    ds.observations.push_back(o);
    CHECK_THROWS_AS(ds.validate(), DataError);
  }
}
