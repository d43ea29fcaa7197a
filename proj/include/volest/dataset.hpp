#pragma once

// File contracts for observations, station metadata and holiday calendars.
//
// observations CSV: header row with exactly the names in observation_columns()
//   (any order; target_volume may be omitted), one row per carriageway-hour.
// stations CSV:     header row with exactly the names in station_columns(),
//   one row per carriageway (station_id + direction).
// holidays file:    one "YYYY-MM-DD,Name" per line; '#' starts a comment.

#include <compare>
#include <span>
#include <string>
#include <vector>

#include "volest/features.hpp"

namespace volest {

/// One direction of a station; the unit of evaluation.
struct Carriageway {
  std::string station_id;
  Direction direction = Direction::A;

  std::string label() const;
  auto operator<=>(const Carriageway&) const = default;
};

std::span<const std::string> observation_columns();
std::span<const std::string> station_columns();

std::vector<HourlyObservation> read_observations(const std::string& path);
void write_observations(const std::string& path, std::span<const HourlyObservation> rows,
                        bool include_target = true);

std::vector<StationMeta> read_stations(const std::string& path);
void write_stations(const std::string& path, std::span<const StationMeta> stations);

HolidayCalendar read_holidays(const std::string& path);
void write_holidays(const std::string& path, const HolidayCalendar& holidays);

struct Dataset {
  std::vector<StationMeta> stations;
  std::vector<HourlyObservation> observations;
  HolidayCalendar holidays;

  /// Throws DataError when the carriageway is not described.
  const StationMeta& meta(const std::string& station_id, Direction direction) const;
  /// Sorted, unique station ids that have observations.
  std::vector<std::string> station_ids() const;
  bool has_targets() const;
  /// Checks every row, unique carriageways and that each observation has metadata.
  void validate() const;
};

Dataset load_dataset(const std::string& observations_path, const std::string& stations_path,
                     const std::string& holidays_path);

}  // namespace volest
