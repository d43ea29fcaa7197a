#include "volest/dataset.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <unordered_map>

#include <fmt/format.h>

#include "volest/csv.hpp"
#include "volest/error.hpp"

namespace volest {

namespace {

std::vector<std::string> build_observation_columns() {
  std::vector<std::string> cols{"station_id", "direction", "timestamp"};
  for (const char* c : {"light", "medium", "heavy"})
    for (const char* w : {"first", "second", "prev"}) cols.push_back(fmt::format("probe_{}_{}", c, w));
  cols.insert(cols.end(), {"avg_speed", "free_flow_speed", "temperature", "visibility", "precipitation",
                           "weather", "profile_estimate", "target_volume"});
  return cols;
}

const std::string kTargetColumn = "target_volume";

// Maps canonical column names to their position in the file header.
std::vector<int> resolve_header(std::string_view header, std::span<const std::string> expected,
                                const std::string& optional, const std::string& path) {
  const auto names = csv::split(header);
  std::vector<int> position(expected.size(), -1);
  for (std::size_t i = 0; i < names.size(); ++i) {
    const auto it = std::find(expected.begin(), expected.end(), names[i]);
    if (it == expected.end())
      throw DataError(fmt::format("{}: unknown column '{}'", path, names[i]));
    auto& slot = position[static_cast<std::size_t>(it - expected.begin())];
    if (slot != -1) throw DataError(fmt::format("{}: duplicate column '{}'", path, names[i]));
    slot = static_cast<int>(i);
  }
  for (std::size_t c = 0; c < expected.size(); ++c)
    if (position[c] == -1 && expected[c] != optional)
      throw DataError(fmt::format("{}: missing column '{}'", path, expected[c]));
  return position;
}

std::string join(std::span<const std::string> parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

void check_field(std::string_view value, std::string_view what) {
  if (value.find(',') != std::string_view::npos || value.find('\n') != std::string_view::npos)
    throw DataError(fmt::format("{} '{}' cannot contain commas or newlines", what, value));
}

}  // namespace

std::string Carriageway::label() const { return fmt::format("{}-{}", station_id, to_string(direction)); }

std::span<const std::string> observation_columns() {
  static const std::vector<std::string> cols = build_observation_columns();
  return cols;
}

std::span<const std::string> station_columns() {
  static const std::vector<std::string> cols{"station_id", "direction", "road_type", "road_class", "lanes",
                                             "speed_limit", "aadt", "latitude", "longitude"};
  return cols;
}

std::vector<HourlyObservation> read_observations(const std::string& path) {
  const auto lines = csv::read_lines(path);
  if (lines.empty()) throw DataError(fmt::format("{}: empty file, expected a header", path));
  const auto cols = observation_columns();
  const auto pos = resolve_header(lines[0], cols, kTargetColumn, path);
  const std::size_t width = csv::split(lines[0]).size();

  std::vector<HourlyObservation> rows;
  rows.reserve(lines.size() - 1);
  for (std::size_t ln = 1; ln < lines.size(); ++ln) {
    if (lines[ln].empty()) continue;
    const auto f = csv::split(lines[ln]);
    if (f.size() != width)
      throw DataError(fmt::format("{}:{}: expected {} fields, found {}", path, ln + 1, width, f.size()));
    const auto get = [&](std::size_t c) { return f[static_cast<std::size_t>(pos[c])]; };
    try {
      HourlyObservation o;
      o.station_id = std::string(get(0));
      o.direction = parse_direction(get(1));
      o.timestamp = Timestamp::parse(get(2));
      for (std::size_t i = 0; i < kProbeCounts; ++i) {
        const long v = csv::parse_long(get(3 + i), cols[3 + i]);
        if (v < 0 || v > 1'000'000) throw DataError(fmt::format("probe count {} out of range", v));
        o.probe_counts[i] = static_cast<int>(v);
      }
      o.avg_speed = csv::parse_double(get(12), cols[12]);
      o.free_flow_speed = csv::parse_double(get(13), cols[13]);
      o.temperature = csv::parse_double(get(14), cols[14]);
      o.visibility = csv::parse_double(get(15), cols[15]);
      o.precipitation = csv::parse_double(get(16), cols[16]);
      o.weather = std::string(get(17));
      o.profile_estimate = csv::parse_double(get(18), cols[18]);
      if (pos[19] != -1 && !get(19).empty()) o.target_volume = csv::parse_double(get(19), cols[19]);
      o.validate();
      rows.push_back(std::move(o));
    } catch (const DataError& e) {
      throw DataError(fmt::format("{}:{}: {}", path, ln + 1, e.what()));
    }
  }
  return rows;
}

void write_observations(const std::string& path, std::span<const HourlyObservation> rows,
                        bool include_target) {
  auto cols = observation_columns();
  std::string out = join(include_target ? cols : cols.first(cols.size() - 1), ",");
  out += '\n';
  for (const auto& o : rows) {
    check_field(o.station_id, "station_id");
    check_field(o.weather, "weather");
    out += fmt::format("{},{},{}", o.station_id, to_string(o.direction), o.timestamp.to_string());
    for (int c : o.probe_counts) out += fmt::format(",{}", c);
    for (double v : {o.avg_speed, o.free_flow_speed, o.temperature, o.visibility, o.precipitation})
      out += "," + csv::format_double(v);
    out += "," + o.weather + "," + csv::format_double(o.profile_estimate);
    if (include_target) {
      if (!o.target_volume) throw DataError("write_observations: row without target_volume");
      out += "," + csv::format_double(*o.target_volume);
    }
    out += '\n';
  }
  csv::write_text(path, out);
}

std::vector<StationMeta> read_stations(const std::string& path) {
  const auto lines = csv::read_lines(path);
  if (lines.empty()) throw DataError(fmt::format("{}: empty file, expected a header", path));
  const auto cols = station_columns();
  const auto pos = resolve_header(lines[0], cols, "", path);
  const std::size_t width = csv::split(lines[0]).size();
  std::vector<StationMeta> out;
  for (std::size_t ln = 1; ln < lines.size(); ++ln) {
    if (lines[ln].empty()) continue;
    const auto f = csv::split(lines[ln]);
    if (f.size() != width)
      throw DataError(fmt::format("{}:{}: expected {} fields, found {}", path, ln + 1, width, f.size()));
    const auto get = [&](std::size_t c) { return f[static_cast<std::size_t>(pos[c])]; };
    try {
      StationMeta m;
      m.station_id = std::string(get(0));
      m.direction = parse_direction(get(1));
      m.road_type = parse_road_type(get(2));
      m.road_class = parse_road_class(get(3));
      m.lanes = static_cast<int>(csv::parse_long(get(4), "lanes"));
      m.speed_limit = csv::parse_double(get(5), "speed_limit");
      m.aadt = csv::parse_double(get(6), "aadt");
      m.latitude = csv::parse_double(get(7), "latitude");
      m.longitude = csv::parse_double(get(8), "longitude");
      m.validate();
      out.push_back(std::move(m));
    } catch (const DataError& e) {
      throw DataError(fmt::format("{}:{}: {}", path, ln + 1, e.what()));
    }
  }
  return out;
}

void write_stations(const std::string& path, std::span<const StationMeta> stations) {
  std::string out = join(station_columns(), ",") + "\n";
  for (const auto& m : stations) {
    check_field(m.station_id, "station_id");
    out += fmt::format("{},{},{},{},{},{},{},{},{}\n", m.station_id, to_string(m.direction),
                       to_string(m.road_type), to_string(m.road_class), m.lanes,
                       csv::format_double(m.speed_limit), csv::format_double(m.aadt),
                       csv::format_double(m.latitude), csv::format_double(m.longitude));
  }
  csv::write_text(path, out);
}

HolidayCalendar read_holidays(const std::string& path) {
  HolidayCalendar cal;
  const auto lines = csv::read_lines(path);
  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    std::string_view line = lines[ln];
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    while (!line.empty() && (line.back() == ' ' || line.back() == '\t')) line.remove_suffix(1);
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string_view::npos)
      throw DataError(fmt::format("{}:{}: expected 'YYYY-MM-DD,Name'", path, ln + 1));
    try {
      const auto day = Timestamp::parse_date(line.substr(0, comma));
      const auto holiday = parse_holiday(line.substr(comma + 1));
      if (!cal.emplace(day, holiday).second)
        throw DataError(fmt::format("duplicate date {}", format_date(day)));
    } catch (const DataError& e) {
      throw DataError(fmt::format("{}:{}: {}", path, ln + 1, e.what()));
    }
  }
  return cal;
}

void write_holidays(const std::string& path, const HolidayCalendar& holidays) {
  std::string out = "# date,holiday\n";
  for (const auto& [day, h] : holidays) out += fmt::format("{},{}\n", format_date(day), to_string(h));
  csv::write_text(path, out);
}

const StationMeta& Dataset::meta(const std::string& station_id, Direction direction) const {
  for (const auto& m : stations)
    if (m.station_id == station_id && m.direction == direction) return m;
  throw DataError(fmt::format("no station metadata for {}-{}", station_id, to_string(direction)));
}

std::vector<std::string> Dataset::station_ids() const {
  std::set<std::string> ids;
  for (const auto& o : observations) ids.insert(o.station_id);
  return {ids.begin(), ids.end()};
}

bool Dataset::has_targets() const {
  return std::all_of(observations.begin(), observations.end(),
                     [](const HourlyObservation& o) { return o.target_volume.has_value(); });
}

void Dataset::validate() const {
  std::set<Carriageway> described;
  for (const auto& m : stations) {
    m.validate();
    if (!described.insert({m.station_id, m.direction}).second)
      throw DataError(fmt::format("duplicate station metadata for {}-{}", m.station_id, to_string(m.direction)));
  }
  std::set<std::pair<Carriageway, Timestamp>> seen;
  for (const auto& o : observations) {
    o.validate();
    Carriageway cw{o.station_id, o.direction};
    if (!described.count(cw))
      throw DataError(fmt::format("observation for {} has no station metadata", cw.label()));
    if (!seen.emplace(cw, o.timestamp).second)
      throw DataError(fmt::format("duplicate observation {} {}", cw.label(), o.timestamp.to_string()));
  }
}

Dataset load_dataset(const std::string& observations_path, const std::string& stations_path,
                     const std::string& holidays_path) {
  Dataset ds;
  ds.stations = read_stations(stations_path);
  ds.observations = read_observations(observations_path);
  if (!holidays_path.empty()) ds.holidays = read_holidays(holidays_path);
  ds.validate();
  return ds;
}

}  // namespace volest
