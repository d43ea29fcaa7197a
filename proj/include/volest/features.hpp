#pragma once

// Encoding of one carriageway-hour into the fixed 84-wide input row, and
// z-score standardization fitted on training rows.

#include <array>
#include <chrono>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "volest/timestamp.hpp"

namespace volest {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class Direction { A, B };
enum class RoadType { Interstate, US, MD };
enum class RoadClass { Motorway, Trunk };

std::string_view to_string(Direction d);
std::string_view to_string(RoadType t);
std::string_view to_string(RoadClass c);
Direction parse_direction(std::string_view s);
RoadType parse_road_type(std::string_view s);
RoadClass parse_road_class(std::string_view s);

/// One carriageway (station + direction) of a count station.
struct StationMeta {
  std::string station_id;
  Direction direction = Direction::A;
  RoadType road_type = RoadType::Interstate;
  RoadClass road_class = RoadClass::Motorway;
  int lanes = 1;
  double speed_limit = 55.0;  // mi/h
  double aadt = 0.0;          // vehicles/day for this carriageway
  double latitude = 0.0;
  double longitude = 0.0;

  /// Throws DataError when lanes < 1, aadt <= 0 or the speed limit is outside [25, 75].
  void validate() const;
};

inline constexpr std::size_t kWeightClasses = 3;  // <14k lb, 14k-26k lb, >26k lb
inline constexpr std::size_t kProbeWindows = 3;   // first half hour, second half hour, half hour before
inline constexpr std::size_t kProbeCounts = kWeightClasses * kProbeWindows;

/// Index of (weight class, window) in the class-major probe block.
constexpr std::size_t probe_slot(std::size_t weight_class, std::size_t window) {
  return weight_class * kProbeWindows + window;
}

struct HourlyObservation {
  std::string station_id;
  Direction direction = Direction::A;
  Timestamp timestamp;
  std::array<int, kProbeCounts> probe_counts{};
  double avg_speed = 0.0;        // mi/h
  double free_flow_speed = 0.0;  // mi/h
  double temperature = 0.0;      // deg F
  double visibility = 0.0;       // mi
  double precipitation = 0.0;    // in
  std::string weather;
  double profile_estimate = 0.0;       // vehicles/hr
  std::optional<double> target_volume; // vehicles/hr; absent at deployment

  /// Probes observed within the hour itself (both half-hour windows, all classes).
  int probes_in_hour() const;
  void validate() const;
};

/// Weather description categories in their canonical one-hot order.
std::span<const std::string_view> weather_categories();
inline constexpr std::size_t kWeatherCategories = 33;
/// Slot of a description in weather_categories(); unrecognized text maps to "Unknown".
std::size_t weather_slot(std::string_view description);
std::size_t unknown_weather_slot();

enum class Holiday { WashingtonsBirthday, IndependenceDay, ColumbusDay };
std::string_view to_string(Holiday h);
/// Accepts the canonical names; throws DataError otherwise.
Holiday parse_holiday(std::string_view name);

using HolidayCalendar = std::map<std::chrono::sys_days, Holiday>;

/// Column layout of the encoded row.
namespace layout {
inline constexpr std::size_t kProbe = 0;             // 9 probe counts, class-major
inline constexpr std::size_t kSpeed = 9;             // average speed, free-flow speed
inline constexpr std::size_t kWeatherNumeric = 11;   // temperature, visibility, precipitation
inline constexpr std::size_t kWeatherOneHot = 14;    // 33 indicators
inline constexpr std::size_t kInfrastructure = 47;   // lanes, limit, motorway, trunk, Interstate, US, MD
inline constexpr std::size_t kTemporal = 54;         // 24 hours, Sat, Sun, 3 holidays
inline constexpr std::size_t kProfile = 83;
inline constexpr std::size_t kWidth = 84;

inline constexpr std::size_t kWeatherWidth = 3 + kWeatherCategories;
inline constexpr std::size_t kInfrastructureWidth = 7;
inline constexpr std::size_t kTemporalWidth = 29;

/// Indices of all one-hot indicator columns.
std::vector<std::size_t> indicator_columns();
/// Human-readable column names, kWidth entries.
std::span<const std::string> column_names();
}  // namespace layout

struct FeatureVector {
  std::array<double, layout::kWidth> values{};
  std::optional<double> target;
};

std::array<double, layout::kWeatherWidth> encode_weather(double temperature, double visibility,
                                                         double precipitation,
                                                         std::string_view description);
std::array<double, layout::kTemporalWidth> encode_temporal(const Timestamp& ts,
                                                           const HolidayCalendar& holidays);
std::array<double, layout::kInfrastructureWidth> encode_infrastructure(const StationMeta& meta);

/// Throws StructuralError when `obs` and `meta` describe different carriageways.
FeatureVector assemble(const HourlyObservation& obs, const StationMeta& meta,
                       const HolidayCalendar& holidays);

/// Per-column z-score scaling. Indicator columns pass through unchanged;
/// constant columns get std 1.
class Standardizer {
 public:
  Standardizer() = default;
  Standardizer(std::vector<double> means, std::vector<double> stds, std::vector<std::size_t> exempt);

  /// Fits on training rows only. Throws DataError on empty input.
  static Standardizer fit(const Eigen::Ref<const RowMatrix>& rows,
                          std::vector<std::size_t> exempt = layout::indicator_columns());
  static Standardizer fit(std::span<const FeatureVector> rows,
                          std::vector<std::size_t> exempt = layout::indicator_columns());

  std::vector<double> apply(std::span<const double> row) const;
  FeatureVector apply(const FeatureVector& row) const;
  RowMatrix apply(
      const Eigen::Ref<const RowMatrix>& rows) const;

  std::size_t width() const { return means_.size(); }
  const std::vector<double>& means() const { return means_; }
  const std::vector<double>& stds() const { return stds_; }
  const std::vector<std::size_t>& exempt() const { return exempt_; }

  friend bool operator==(const Standardizer&, const Standardizer&) = default;

 private:
  std::vector<double> means_;
  std::vector<double> stds_;  // 1 for exempt columns
  std::vector<std::size_t> exempt_;
};

}  // namespace volest
