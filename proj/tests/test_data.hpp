#pragma once

// Random but valid observations and station metadata for property tests.

#include <random>
#include <string>

#include "volest/features.hpp"

namespace testdata {

inline volest::StationMeta random_meta(std::mt19937_64& rng, const std::string& id = "S1",
                                       volest::Direction dir = volest::Direction::A) {
  std::uniform_int_distribution<int> lanes(1, 5), type(0, 2), cls(0, 1), limit(5, 15);
  std::uniform_real_distribution<double> aadt(500.0, 90000.0);
  volest::StationMeta m;
  m.station_id = id;
  m.direction = dir;
  m.road_type = static_cast<volest::RoadType>(type(rng));
  m.road_class = static_cast<volest::RoadClass>(cls(rng));
  m.lanes = lanes(rng);
  m.speed_limit = 5.0 * limit(rng);
  m.aadt = aadt(rng);
  return m;
}

inline volest::HourlyObservation random_observation(std::mt19937_64& rng, const volest::StationMeta& meta) {
  using namespace std::chrono;
  std::uniform_int_distribution<int> count(0, 200), day(0, 1500), hour(0, 23);
  std::uniform_real_distribution<double> ffs(40.0, 75.0), frac(0.2, 1.15), temp(-10.0, 100.0),
      vis(0.1, 10.0), precip(0.0, 1.0), vol(0.0, 6000.0);
  const auto cats = volest::weather_categories();
  std::uniform_int_distribution<std::size_t> weather(0, cats.size());  // one past the end -> garbage text
  volest::HourlyObservation o;
  o.station_id = meta.station_id;
  o.direction = meta.direction;
  o.timestamp = {sys_days{year{2015} / January / 1} + days{day(rng)}, hour(rng)};
  for (auto& c : o.probe_counts) c = count(rng);
  o.free_flow_speed = ffs(rng);
  o.avg_speed = o.free_flow_speed * frac(rng);
  o.temperature = temp(rng);
  o.visibility = vis(rng);
  o.precipitation = precip(rng);
  const auto w = weather(rng);
  o.weather = w < cats.size() ? std::string(cats[w]) : "Volcanic Ash";
  o.profile_estimate = vol(rng);
  o.target_volume = vol(rng);
  return o;
}

}  // namespace testdata
