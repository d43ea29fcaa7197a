#include "volest/features.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "volest/error.hpp"

namespace volest {

namespace {

constexpr std::array<std::string_view, kWeatherCategories> kWeather = {
    "Clear",
    "Mostly Cloudy",
    "Overcast",
    "Scattered Clouds",
    "Partly Cloudy",
    "Unknown",
    "Thunderstorm",
    "Light Rain",
    "Light Snow",
    "Light Drizzle",
    "Rain",
    "Heavy Rain",
    "Squalls",
    "Haze",
    "Freezing Rain",
    "Light Freezing Rain",
    "Drizzle",
    "Light Thunderstorms and Rain",
    "Heavy Thunderstorms and Rain",
    "Thunderstorms and Rain",
    "Mist",
    "Fog",
    "Light Freezing Drizzle",
    "Light Freezing Fog",
    "Heavy Drizzle",
    "Light Thunderstorms and Snow",
    "Snow",
    "Blowing Snow",
    "Heavy Snow",
    "Shallow Fog",
    "Ice Pellets",
    "Patches of Fog",
    "Light Ice Pellets",
};

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) == std::tolower(static_cast<unsigned char>(y));
         });
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string> build_column_names() {
  static constexpr std::array<std::string_view, kWeightClasses> classes = {"light", "medium", "heavy"};
  static constexpr std::array<std::string_view, kProbeWindows> windows = {"first", "second", "prev"};
  std::vector<std::string> names;
  for (auto c : classes)
    for (auto w : windows) names.push_back(fmt::format("probe_{}_{}", c, w));
  names.insert(names.end(), {"avg_speed", "free_flow_speed", "temperature", "visibility", "precipitation"});
  for (auto w : kWeather) names.push_back(fmt::format("weather[{}]", w));
  names.insert(names.end(), {"lanes", "speed_limit", "class_motorway", "class_trunk", "type_interstate",
                             "type_us", "type_md"});
  for (int h = 0; h < 24; ++h) names.push_back(fmt::format("hour_{:02d}", h));
  names.insert(names.end(), {"saturday", "sunday", "holiday_washingtons_birthday",
                             "holiday_independence_day", "holiday_columbus_day", "profile_estimate"});
  return names;
}

}  // namespace

std::string_view to_string(Direction d) { return d == Direction::A ? "A" : "B"; }

std::string_view to_string(RoadType t) {
  switch (t) {
    case RoadType::Interstate: return "Interstate";
    case RoadType::US: return "US";
    case RoadType::MD: return "MD";
  }
  return "?";
}

std::string_view to_string(RoadClass c) { return c == RoadClass::Motorway ? "Motorway" : "Trunk"; }

Direction parse_direction(std::string_view s) {
  s = trim(s);
  if (s == "A") return Direction::A;
  if (s == "B") return Direction::B;
  throw DataError(fmt::format("invalid direction '{}', expected A or B", s));
}

RoadType parse_road_type(std::string_view s) {
  s = trim(s);
  for (auto t : {RoadType::Interstate, RoadType::US, RoadType::MD})
    if (iequals(s, to_string(t))) return t;
  throw DataError(fmt::format("invalid road type '{}'", s));
}

RoadClass parse_road_class(std::string_view s) {
  s = trim(s);
  for (auto c : {RoadClass::Motorway, RoadClass::Trunk})
    if (iequals(s, to_string(c))) return c;
  throw DataError(fmt::format("invalid road class '{}'", s));
}

void StationMeta::validate() const {
  if (station_id.empty()) throw DataError("station: empty station_id");
  if (lanes < 1) throw DataError(fmt::format("station {}: lanes must be >= 1", station_id));
  if (!(aadt > 0.0)) throw DataError(fmt::format("station {}: aadt must be positive", station_id));
  if (!(speed_limit >= 25.0 && speed_limit <= 75.0))
    throw DataError(fmt::format("station {}: speed limit {} outside [25, 75]", station_id, speed_limit));
}

int HourlyObservation::probes_in_hour() const {
  int total = 0;
  for (std::size_t c = 0; c < kWeightClasses; ++c)
    total += probe_counts[probe_slot(c, 0)] + probe_counts[probe_slot(c, 1)];
  return total;
}

void HourlyObservation::validate() const {
  const auto where = [this] { return fmt::format("{} {} {}", station_id, to_string(direction), timestamp.to_string()); };
  for (int c : probe_counts)
    if (c < 0) throw DataError(fmt::format("observation {}: negative probe count", where()));
  if (!(avg_speed > 0.0) || !(free_flow_speed > 0.0) || avg_speed > free_flow_speed * 1.2)
    throw DataError(fmt::format("observation {}: speeds violate 0 < avg_speed <= 1.2 * free_flow_speed", where()));
  for (double v : {temperature, visibility, precipitation, profile_estimate})
    if (!std::isfinite(v)) throw DataError(fmt::format("observation {}: non-finite value", where()));
  if (target_volume && !(*target_volume >= 0.0))
    throw DataError(fmt::format("observation {}: target volume must be >= 0", where()));
}

std::span<const std::string_view> weather_categories() { return kWeather; }

std::size_t unknown_weather_slot() { return 5; }

std::size_t weather_slot(std::string_view description) {
  description = trim(description);
  for (std::size_t i = 0; i < kWeather.size(); ++i)
    if (iequals(description, kWeather[i])) return i;
  return unknown_weather_slot();
}

std::string_view to_string(Holiday h) {
  switch (h) {
    case Holiday::WashingtonsBirthday: return "Washington's Birthday";
    case Holiday::IndependenceDay: return "Independence Day";
    case Holiday::ColumbusDay: return "Columbus Day";
  }
  return "?";
}

Holiday parse_holiday(std::string_view name) {
  name = trim(name);
  for (auto h : {Holiday::WashingtonsBirthday, Holiday::IndependenceDay, Holiday::ColumbusDay})
    if (iequals(name, to_string(h))) return h;
  throw DataError(fmt::format("unrecognized holiday '{}'", name));
}

namespace layout {

std::vector<std::size_t> indicator_columns() {
  std::vector<std::size_t> cols;
  for (std::size_t i = 0; i < kWeatherCategories; ++i) cols.push_back(kWeatherOneHot + i);
  for (std::size_t i = 2; i < kInfrastructureWidth; ++i) cols.push_back(kInfrastructure + i);
  for (std::size_t i = 0; i < kTemporalWidth; ++i) cols.push_back(kTemporal + i);
  return cols;
}

std::span<const std::string> column_names() {
  static const std::vector<std::string> names = build_column_names();
  return names;
}

}  // namespace layout

std::array<double, layout::kWeatherWidth> encode_weather(double temperature, double visibility,
                                                         double precipitation,
                                                         std::string_view description) {
  std::array<double, layout::kWeatherWidth> out{};
  out[0] = temperature;
  out[1] = visibility;
  out[2] = precipitation;
  out[3 + weather_slot(description)] = 1.0;
  return out;
}

std::array<double, layout::kTemporalWidth> encode_temporal(const Timestamp& ts,
                                                           const HolidayCalendar& holidays) {
  std::array<double, layout::kTemporalWidth> out{};
  out[static_cast<std::size_t>(ts.hour)] = 1.0;
  const int day = ts.day_index();
  if (day == 5) out[24] = 1.0;
  if (day == 6) out[25] = 1.0;
  if (auto it = holidays.find(ts.day); it != holidays.end())
    out[26 + static_cast<std::size_t>(it->second)] = 1.0;
  return out;
}

std::array<double, layout::kInfrastructureWidth> encode_infrastructure(const StationMeta& meta) {
  return {static_cast<double>(meta.lanes),
          meta.speed_limit,
          meta.road_class == RoadClass::Motorway ? 1.0 : 0.0,
          meta.road_class == RoadClass::Trunk ? 1.0 : 0.0,
          meta.road_type == RoadType::Interstate ? 1.0 : 0.0,
          meta.road_type == RoadType::US ? 1.0 : 0.0,
          meta.road_type == RoadType::MD ? 1.0 : 0.0};
}

FeatureVector assemble(const HourlyObservation& obs, const StationMeta& meta,
                       const HolidayCalendar& holidays) {
  if (obs.station_id != meta.station_id || obs.direction != meta.direction)
    throw StructuralError(fmt::format("assemble: observation for {}/{} paired with station {}/{}",
                                      obs.station_id, to_string(obs.direction), meta.station_id,
                                      to_string(meta.direction)));
  FeatureVector fv;
  auto& v = fv.values;
  for (std::size_t i = 0; i < kProbeCounts; ++i) v[layout::kProbe + i] = obs.probe_counts[i];
  v[layout::kSpeed] = obs.avg_speed;
  v[layout::kSpeed + 1] = obs.free_flow_speed;
  const auto weather = encode_weather(obs.temperature, obs.visibility, obs.precipitation, obs.weather);
  std::copy(weather.begin(), weather.end(), v.begin() + layout::kWeatherNumeric);
  const auto infra = encode_infrastructure(meta);
  std::copy(infra.begin(), infra.end(), v.begin() + layout::kInfrastructure);
  const auto temporal = encode_temporal(obs.timestamp, holidays);
  std::copy(temporal.begin(), temporal.end(), v.begin() + layout::kTemporal);
  v[layout::kProfile] = obs.profile_estimate;
  fv.target = obs.target_volume;
  return fv;
}

Standardizer::Standardizer(std::vector<double> means, std::vector<double> stds,
                           std::vector<std::size_t> exempt)
    : means_(std::move(means)), stds_(std::move(stds)), exempt_(std::move(exempt)) {
  if (means_.size() != stds_.size()) throw StructuralError("standardizer: means/stds length mismatch");
  for (double s : stds_)
    if (!(s > 0.0) || !std::isfinite(s)) throw StructuralError("standardizer: stds must be positive");
  for (auto i : exempt_)
    if (i >= means_.size()) throw StructuralError("standardizer: exempt index out of range");
}

Standardizer Standardizer::fit(
    const Eigen::Ref<const RowMatrix>& rows,
    std::vector<std::size_t> exempt) {
  if (rows.rows() == 0) throw DataError("standardizer: cannot fit on zero rows");
  const auto width = static_cast<std::size_t>(rows.cols());
  std::vector<bool> skip(width, false);
  for (auto i : exempt) {
    if (i >= width) throw StructuralError("standardizer: exempt index out of range");
    skip[i] = true;
  }
  std::vector<double> means(width, 0.0), stds(width, 1.0);
  const double n = static_cast<double>(rows.rows());
  for (std::size_t c = 0; c < width; ++c) {
    if (skip[c]) continue;
    const auto col = rows.col(static_cast<Eigen::Index>(c));
    const double mean = col.sum() / n;
    const double var = (col.array() - mean).square().sum() / n;
    means[c] = mean;
    const double sd = std::sqrt(var);
    stds[c] = sd > 1e-12 * std::max(1.0, std::abs(mean)) ? sd : 1.0;
  }
  std::sort(exempt.begin(), exempt.end());
  exempt.erase(std::unique(exempt.begin(), exempt.end()), exempt.end());
  return Standardizer(std::move(means), std::move(stds), std::move(exempt));
}

Standardizer Standardizer::fit(std::span<const FeatureVector> rows, std::vector<std::size_t> exempt) {
  RowMatrix m(
      static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(layout::kWidth));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < layout::kWidth; ++c)
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r].values[c];
  return fit(m, std::move(exempt));
}

std::vector<double> Standardizer::apply(std::span<const double> row) const {
  if (row.size() != means_.size())
    throw StructuralError(fmt::format("standardizer: row has {} values, expected {}", row.size(), means_.size()));
  std::vector<double> out(row.size());
  for (std::size_t i = 0; i < row.size(); ++i) out[i] = (row[i] - means_[i]) / stds_[i];
  return out;
}

FeatureVector Standardizer::apply(const FeatureVector& row) const {
  const auto scaled = apply(std::span<const double>(row.values));
  FeatureVector out;
  std::copy(scaled.begin(), scaled.end(), out.values.begin());
  out.target = row.target;
  return out;
}

RowMatrix Standardizer::apply(
    const Eigen::Ref<const RowMatrix>& rows) const {
  if (static_cast<std::size_t>(rows.cols()) != means_.size())
    throw StructuralError("standardizer: matrix width does not match");
  const Eigen::Map<const Eigen::RowVectorXd> mean(means_.data(), static_cast<Eigen::Index>(means_.size()));
  const Eigen::Map<const Eigen::RowVectorXd> sd(stds_.data(), static_cast<Eigen::Index>(stds_.size()));
  RowMatrix out =
      (rows.rowwise() - mean).array().rowwise() / sd.array();
  return out;
}

}  // namespace volest
