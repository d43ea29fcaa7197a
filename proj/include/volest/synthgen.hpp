#pragma once

// Seeded generator of a synthetic road network with ground-truth hourly
// volumes and the probe, speed and weather observations derived from them.

#include <array>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "volest/dataset.hpp"

namespace volest::synth {

struct GeneratorConfig {
  int n_stations = 10;
  std::chrono::sys_days start_date{std::chrono::year{2016} / std::chrono::June / 1};
  int days = 90;
  std::uint64_t seed = 1;

  double penetration_min = 0.008;
  double penetration_max = 0.045;
  std::array<double, 3> class_shares{0.86, 0.05, 0.09};  // light, medium, heavy

  double aadt_error_sigma = 0.25;     // log-sd of the published AADT around the true one, US roads
  double daily_noise_sigma = 0.12;    // log-sd of day-to-day demand
  double daily_persistence = 0.6;     // lag-one correlation of day-to-day demand
  double hourly_noise_sigma = 0.12;   // log-sd of hour-to-hour demand
  double incident_rate = 0.10;        // chance per carriageway-day of a capacity-reducing incident
  double event_rate = 0.04;           // chance per carriageway-day of a demand surge
  double speed_noise_sd = 1.0;        // mi/h
  double weather_persistence = 0.92;  // chance the weather category carries over to the next hour
  double adverse_weather_min = 0.7;   // lowest weather volume multiplier
  double holiday_factor = 0.8;

  /// Throws ConfigError.
  void validate() const;
};

struct StationTruth {
  std::string station_id;
  Direction direction = Direction::A;
  double true_aadt = 0.0;
  double penetration = 0.0;
};

struct SyntheticWorld {
  Dataset dataset;                   // observations carry the true volume as target
  std::vector<StationTruth> truth;   // parallel to dataset.stations
};

SyntheticWorld generate_world(const GeneratorConfig& config);

/// Holidays the feature set knows about, for every year touching [first, last].
HolidayCalendar holidays_between(std::chrono::sys_days first, std::chrono::sys_days last);

/// Writes observations.csv, stations.csv, holidays.txt and truth.csv into `dir`.
void export_world(const SyntheticWorld& world, const std::filesystem::path& dir);

}  // namespace volest::synth
