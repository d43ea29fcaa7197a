#include "volest/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include <fmt/format.h>

#include "volest/csv.hpp"
#include "volest/error.hpp"
#include "volest/metrics.hpp"

namespace volest::synth {

namespace {

using namespace std::chrono;
using Rng = std::mt19937_64;

enum class Temp { Any, Warm, Cold };

struct WeatherKind {
  std::string_view name;
  double weight;      // relative frequency when the chain jumps
  double severity;    // 0 = no effect on demand, 1 = strongest
  double visibility;  // typical, mi
  double precip;      // typical, in/hr
  Temp temp;
};

// Order matches weather_categories().
constexpr std::array<WeatherKind, kWeatherCategories> kWeatherKinds{{
    {"Clear", 40, 0.0, 10, 0, Temp::Any},
    {"Mostly Cloudy", 12, 0.0, 10, 0, Temp::Any},
    {"Overcast", 12, 0.02, 9, 0, Temp::Any},
    {"Scattered Clouds", 10, 0.0, 10, 0, Temp::Any},
    {"Partly Cloudy", 10, 0.0, 10, 0, Temp::Any},
    {"Unknown", 1, 0.0, 8, 0, Temp::Any},
    {"Thunderstorm", 0.4, 0.4, 5, 0.15, Temp::Warm},
    {"Light Rain", 4, 0.15, 7, 0.03, Temp::Warm},
    {"Light Snow", 1, 0.4, 3, 0.02, Temp::Cold},
    {"Light Drizzle", 1, 0.08, 7, 0.01, Temp::Warm},
    {"Rain", 1.5, 0.3, 5, 0.12, Temp::Warm},
    {"Heavy Rain", 0.5, 0.6, 2, 0.4, Temp::Warm},
    {"Squalls", 0.05, 0.6, 3, 0.2, Temp::Any},
    {"Haze", 2, 0.05, 5, 0, Temp::Any},
    {"Freezing Rain", 0.1, 0.85, 3, 0.1, Temp::Cold},
    {"Light Freezing Rain", 0.2, 0.55, 4, 0.03, Temp::Cold},
    {"Drizzle", 0.3, 0.12, 5, 0.02, Temp::Warm},
    {"Light Thunderstorms and Rain", 0.5, 0.35, 5, 0.1, Temp::Warm},
    {"Heavy Thunderstorms and Rain", 0.2, 0.7, 2, 0.5, Temp::Warm},
    {"Thunderstorms and Rain", 0.3, 0.5, 3, 0.25, Temp::Warm},
    {"Mist", 0.5, 0.1, 4, 0, Temp::Any},
    {"Fog", 0.5, 0.3, 0.5, 0, Temp::Any},
    {"Light Freezing Drizzle", 0.1, 0.5, 4, 0.01, Temp::Cold},
    {"Light Freezing Fog", 0.1, 0.45, 0.8, 0, Temp::Cold},
    {"Heavy Drizzle", 0.05, 0.2, 3, 0.05, Temp::Warm},
    {"Light Thunderstorms and Snow", 0.02, 0.7, 2, 0.05, Temp::Cold},
    {"Snow", 0.4, 0.7, 1.5, 0.05, Temp::Cold},
    {"Blowing Snow", 0.05, 0.8, 0.5, 0.03, Temp::Cold},
    {"Heavy Snow", 0.1, 1.0, 0.4, 0.1, Temp::Cold},
    {"Shallow Fog", 0.2, 0.15, 2, 0, Temp::Any},
    {"Ice Pellets", 0.05, 0.7, 3, 0.04, Temp::Cold},
    {"Patches of Fog", 0.3, 0.15, 3, 0, Temp::Any},
    {"Light Ice Pellets", 0.05, 0.5, 4, 0.02, Temp::Cold},
}};

bool allowed(const WeatherKind& w, double temperature) {
  if (w.temp == Temp::Warm) return temperature > 31.0;
  if (w.temp == Temp::Cold) return temperature < 36.0;
  return true;
}

Rng stream(std::uint64_t seed, std::uint64_t station, std::uint64_t purpose) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(station), static_cast<std::uint32_t>(purpose)};
  return Rng(seq);
}

double lognormal_unit_mean(Rng& rng, double sigma) {
  if (sigma <= 0.0) return 1.0;
  return std::exp(std::normal_distribution<double>(-0.5 * sigma * sigma, sigma)(rng));
}

double round_to(double v, double step) { return std::round(v / step) * step; }

double bump(double x, double mu, double sd) { return std::exp(-0.5 * (x - mu) * (x - mu) / (sd * sd)); }

// Continuous diurnal intensity; hour h covers [h, h+1).
struct DiurnalShape {
  double am = 0.8, pm = 0.8, shift = 0.0;

  double weekday(double t) const {
    return 0.12 + 0.55 * bump(t, 13.0, 3.5) + am * bump(t, 7.5 + shift, 1.2) + pm * bump(t, 17.0 + shift, 1.6);
  }
  static double weekend(double t) { return 0.1 + 0.9 * bump(t, 13.5, 4.0); }
  double at(double t, bool weekend_like) const { return weekend_like ? weekend(t) : weekday(t); }

  // hourly shares of one day type, summing to 1
  std::array<double, 24> shares(bool weekend_like) const {
    std::array<double, 24> s{};
    for (int h = 0; h < 24; ++h) s[h] = at(h + 0.25, weekend_like) + at(h + 0.75, weekend_like);
    const double total = std::accumulate(s.begin(), s.end(), 0.0);
    for (auto& v : s) v /= total;
    return s;
  }
};

constexpr std::array<double, 7> kBaseDayFactors{1.0, 1.0, 1.02, 1.04, 1.1, 0.92, 0.82};

std::array<double, 7> normalized(std::array<double, 7> f) {
  const double total = std::accumulate(f.begin(), f.end(), 0.0);
  for (auto& v : f) v *= 7.0 / total;
  return f;
}

struct HourWeather {
  std::size_t kind;
  double temperature, visibility, precipitation;
};

std::vector<HourWeather> weather_series(const GeneratorConfig& cfg, Rng& rng, int hours, const Timestamp& first) {
  std::vector<double> weights;
  for (const auto& w : kWeatherKinds) weights.push_back(w.weight);
  std::normal_distribution<double> n01;
  std::uniform_real_distribution<double> u01;
  const double station_offset = 1.5 * n01(rng);
  double anomaly = 3.0 * n01(rng);

  std::vector<HourWeather> out;
  out.reserve(static_cast<std::size_t>(hours));
  std::size_t kind = 0;
  for (int i = 0; i < hours; ++i) {
    const Timestamp ts = first.plus_hours(i);
    if (ts.hour == 0) anomaly = 0.7 * anomaly + 4.0 * n01(rng);
    const auto ymd = year_month_day{ts.day};
    const double doy = static_cast<double>((ts.day - sys_days{ymd.year() / January / 1}).count());
    const double temperature = 55.0 + 22.0 * std::cos(2 * std::numbers::pi * (doy - 200.0) / 365.25) +
                               8.0 * std::cos(2 * std::numbers::pi * (ts.hour - 15.0) / 24.0) + anomaly +
                               station_offset + 1.0 * n01(rng);
    if (i == 0 || u01(rng) >= cfg.weather_persistence || !allowed(kWeatherKinds[kind], temperature)) {
      auto w = weights;
      for (std::size_t k = 0; k < w.size(); ++k)
        if (!allowed(kWeatherKinds[k], temperature)) w[k] = 0.0;
      kind = std::discrete_distribution<std::size_t>(w.begin(), w.end())(rng);
    }
    const auto& wk = kWeatherKinds[kind];
    const double vis = std::clamp(wk.visibility * std::exp(0.2 * n01(rng)), 0.1, 10.0);
    const double precip = wk.precip > 0 ? wk.precip * std::exp(0.5 * n01(rng)) : 0.0;
    out.push_back({kind, round_to(temperature, 0.1), round_to(vis, 0.1), round_to(precip, 0.01)});
  }
  return out;
}

struct StationDesign {
  std::string id;
  RoadType type;
  RoadClass road_class;
  int lanes;
  double limit, ffs, lat, lon, penetration, per_lane_aadt;
};

StationDesign design_station(const GeneratorConfig& cfg, int index, Rng& rng) {
  std::uniform_real_distribution<double> u01;
  std::normal_distribution<double> n01;
  StationDesign s;
  s.id = fmt::format("ATR{:03d}", index + 1);
  // stratified over the penetration range, low to high
  const double q = (index + u01(rng)) / cfg.n_stations;
  s.penetration = std::exp(std::log(cfg.penetration_min) + q * (std::log(cfg.penetration_max) - std::log(cfg.penetration_min)));
  s.type = q < 1.0 / 3 ? RoadType::MD : q < 2.0 / 3 ? RoadType::US : RoadType::Interstate;
  const auto pick = [&](std::initializer_list<double> options) {
    std::vector<double> v(options);
    return v[std::uniform_int_distribution<std::size_t>(0, v.size() - 1)(rng)];
  };
  switch (s.type) {
    case RoadType::Interstate:
      s.road_class = RoadClass::Motorway;
      s.lanes = static_cast<int>(pick({2, 3, 3, 4}));
      s.limit = pick({55, 65, 65, 70});
      s.per_lane_aadt = 15000;
      break;
    case RoadType::US:
      s.road_class = u01(rng) < 0.5 ? RoadClass::Motorway : RoadClass::Trunk;
      s.lanes = static_cast<int>(pick({2, 2, 3}));
      s.limit = s.road_class == RoadClass::Motorway ? pick({55, 60, 65}) : pick({45, 50, 55});
      s.per_lane_aadt = 11000;
      break;
    case RoadType::MD:
      s.road_class = u01(rng) < 0.2 ? RoadClass::Motorway : RoadClass::Trunk;
      s.lanes = static_cast<int>(pick({1, 2, 2}));
      s.limit = s.road_class == RoadClass::Motorway ? pick({55, 60}) : pick({40, 45, 50, 55});
      s.per_lane_aadt = 9000;
      break;
  }
  s.per_lane_aadt *= std::exp(0.3 * n01(rng));
  s.ffs = round_to(std::clamp(s.limit + 4.0 + 2.0 * n01(rng), s.limit - 2.0, s.limit + 10.0), 0.1);
  s.lat = round_to(38.0 + 1.7 * u01(rng), 1e-4);
  s.lon = round_to(-79.4 + 4.3 * u01(rng), 1e-4);
  return s;
}

// Published AADT is least reliable on minor roads, which get the fewest counts.
double aadt_error_scale(RoadType t) {
  switch (t) {
    case RoadType::Interstate: return 0.6;
    case RoadType::US: return 1.0;
    case RoadType::MD: return 1.4;
  }
  return 1.0;
}

double road_type_peaking(RoadType t) {
  switch (t) {
    case RoadType::Interstate: return 1.0;
    case RoadType::US: return 0.85;
    case RoadType::MD: return 0.7;
  }
  return 1.0;
}

// Demand level of one day plus an optional disruption window.
struct DayDemand {
  double level = 1.0;
  int from = 0, to = 0;  // disrupted hours [from, to)
  double factor = 1.0;

  double at(int hour) const { return level * (hour >= from && hour < to ? factor : 1.0); }
};

std::vector<DayDemand> daily_multipliers(const GeneratorConfig& cfg, Rng& rng) {
  std::normal_distribution<double> n01;
  std::uniform_real_distribution<double> u01;
  const double rho = cfg.daily_persistence, sigma = cfg.daily_noise_sigma;
  double z = sigma * n01(rng);
  std::vector<DayDemand> out(static_cast<std::size_t>(cfg.days));
  for (auto& d : out) {
    d.level = std::exp(z - 0.5 * sigma * sigma);
    z = rho * z + std::sqrt(1.0 - rho * rho) * sigma * n01(rng);
    const double u = u01(rng);
    if (u < cfg.incident_rate) {
      d.from = std::uniform_int_distribution<int>(6, 20)(rng);
      d.to = d.from + std::uniform_int_distribution<int>(1, 6)(rng);
      d.factor = 0.35 + 0.45 * u01(rng);
    } else if (u < cfg.incident_rate + cfg.event_rate) {
      d.from = std::uniform_int_distribution<int>(10, 19)(rng);
      d.to = d.from + std::uniform_int_distribution<int>(2, 5)(rng);
      d.factor = 1.2 + 0.5 * u01(rng);
    }
  }
  return out;
}

int binomial(Rng& rng, int n, double p) {
  if (n <= 0 || p <= 0.0) return 0;
  return std::binomial_distribution<int>(n, std::min(p, 1.0))(rng);
}

}  // namespace

void GeneratorConfig::validate() const {
  if (n_stations < 1) throw ConfigError("n_stations must be at least 1");
  if (days < 1) throw ConfigError("days must be at least 1");
  if (!(penetration_min > 0.0 && penetration_min <= penetration_max && penetration_max < 1.0))
    throw ConfigError("penetration range must satisfy 0 < min <= max < 1");
  double total = 0.0;
  for (double s : class_shares) {
    if (!(s >= 0.0)) throw ConfigError("class shares must be nonnegative");
    total += s;
  }
  if (std::abs(total - 1.0) > 1e-9) throw ConfigError("class shares must sum to 1");
  for (double s : {aadt_error_sigma, daily_noise_sigma, hourly_noise_sigma, speed_noise_sd})
    if (!(s >= 0.0 && s < 2.0)) throw ConfigError("noise levels must be in [0, 2)");
  if (!(daily_persistence >= 0.0 && daily_persistence < 1.0))
    throw ConfigError("daily persistence must be in [0, 1)");
  if (!(incident_rate >= 0.0 && event_rate >= 0.0 && incident_rate + event_rate <= 1.0))
    throw ConfigError("incident and event rates must be nonnegative and sum to at most 1");
  if (!(weather_persistence >= 0.0 && weather_persistence < 1.0))
    throw ConfigError("weather persistence must be in [0, 1)");
  if (!(adverse_weather_min > 0.0 && adverse_weather_min <= 1.0))
    throw ConfigError("adverse weather multiplier must be in (0, 1]");
  if (!(holiday_factor > 0.0 && holiday_factor <= 2.0)) throw ConfigError("holiday factor must be in (0, 2]");
}

HolidayCalendar holidays_between(sys_days first, sys_days last) {
  HolidayCalendar cal;
  for (int y = static_cast<int>(year_month_day{first}.year()); y <= static_cast<int>(year_month_day{last}.year()); ++y) {
    const year yr{y};
    const std::pair<sys_days, Holiday> all[] = {
        {sys_days{yr / February / Monday[3]}, Holiday::WashingtonsBirthday},
        {sys_days{yr / July / 4}, Holiday::IndependenceDay},
        {sys_days{yr / October / Monday[2]}, Holiday::ColumbusDay},
    };
    for (const auto& [day, h] : all)
      if (day >= first && day <= last) cal.emplace(day, h);
  }
  return cal;
}

SyntheticWorld generate_world(const GeneratorConfig& cfg) {
  cfg.validate();
  SyntheticWorld world;
  const sys_days last_day = cfg.start_date + days{cfg.days - 1};
  world.dataset.holidays = holidays_between(cfg.start_date, last_day);
  const auto& holidays = world.dataset.holidays;
  const int hours = cfg.days * 24;

  // the published profile every station would get from a generic typical week
  const DiurnalShape generic;
  const auto generic_days = normalized(kBaseDayFactors);
  const auto generic_weekday = generic.shares(false);
  const auto generic_weekend = generic.shares(true);

  for (int si = 0; si < cfg.n_stations; ++si) {
    auto rng = stream(cfg.seed, static_cast<std::uint64_t>(si), 0);
    const auto design = design_station(cfg, si, rng);
    auto wrng = stream(cfg.seed, static_cast<std::uint64_t>(si), 1);
    // one extra leading hour feeds the "half hour before" window of the first hour
    const auto weather = weather_series(cfg, wrng, hours + 1, Timestamp{cfg.start_date, 0}.plus_hours(-1));
    const double capacity = metrics::capacity_lookup(design.ffs, metrics::facility_for(design.road_class)) * design.lanes;

    std::normal_distribution<double> n01;

    for (Direction dir : {Direction::A, Direction::B}) {
      auto drng = stream(cfg.seed, static_cast<std::uint64_t>(si), dir == Direction::A ? 2 : 3);
      const double true_aadt = std::round(design.per_lane_aadt * design.lanes *
                                          (dir == Direction::A ? 1.0 : std::exp(0.05 * n01(drng))));
      const double peaking = road_type_peaking(design.type);
      DiurnalShape shape;
      const double strong = peaking * std::exp(0.25 * n01(drng));
      const double weak = 0.6 * peaking * std::exp(0.25 * n01(drng));
      shape.am = dir == Direction::A ? strong : weak;
      shape.pm = dir == Direction::A ? weak : strong;
      shape.shift = 0.4 * n01(drng);
      std::array<double, 7> day_factors = kBaseDayFactors;
      for (auto& f : day_factors) f *= std::exp(0.03 * n01(drng));
      day_factors = normalized(day_factors);
      const auto daily = daily_multipliers(cfg, drng);
      const auto weekday_shares = shape.shares(false);
      const auto weekend_shares = shape.shares(true);
      const double weekday_mean = std::accumulate(day_factors.begin(), day_factors.begin() + 5, 0.0) / 5.0;

      StationMeta meta;
      meta.station_id = design.id;
      meta.direction = dir;
      meta.road_type = design.type;
      meta.road_class = design.road_class;
      meta.lanes = design.lanes;
      meta.speed_limit = design.limit;
      meta.aadt = std::round(true_aadt * lognormal_unit_mean(drng, cfg.aadt_error_sigma * aadt_error_scale(design.type)));
      meta.latitude = design.lat;
      meta.longitude = design.lon;
      world.dataset.stations.push_back(meta);
      world.truth.push_back({design.id, dir, true_aadt, design.penetration});

      std::array<int, kWeightClasses> prev_second{};
      for (int i = 0; i <= hours; ++i) {
        const Timestamp ts = Timestamp{cfg.start_date, 0}.plus_hours(i - 1);
        const auto d = static_cast<std::size_t>(ts.day_index());
        const bool holiday = holidays.count(ts.day) > 0;
        const bool weekend_like = d >= 5 || holiday;
        const auto& shares = weekend_like ? weekend_shares : weekday_shares;
        const double day_factor = holiday ? weekday_mean * cfg.holiday_factor : day_factors[d];
        const auto& w = weather[static_cast<std::size_t>(i)];
        const double multiplier = 1.0 - kWeatherKinds[w.kind].severity * (1.0 - cfg.adverse_weather_min);
        const auto& day = daily[static_cast<std::size_t>(std::max(0, i - 1) / 24)];

        const double mean = true_aadt * day_factor * shares[static_cast<std::size_t>(ts.hour)] * multiplier *
                            day.at(ts.hour) * lognormal_unit_mean(drng, cfg.hourly_noise_sigma);
        const int volume = static_cast<int>(std::max(0.0, std::round(mean)));

        const double first_weight = shape.at(ts.hour + 0.25, weekend_like);
        const double second_weight = shape.at(ts.hour + 0.75, weekend_like);
        const int first_half = binomial(drng, volume, first_weight / (first_weight + second_weight));
        std::array<std::array<int, kWeightClasses>, 2> by_class{};
        for (int half = 0; half < 2; ++half) {
          int left = half == 0 ? first_half : volume - first_half;
          double share_left = 1.0;
          for (std::size_t c = 0; c + 1 < kWeightClasses; ++c) {
            by_class[half][c] = binomial(drng, left, cfg.class_shares[c] / share_left);
            left -= by_class[half][c];
            share_left -= cfg.class_shares[c];
          }
          by_class[half][kWeightClasses - 1] = left;
        }

        HourlyObservation o;
        o.station_id = design.id;
        o.direction = dir;
        o.timestamp = ts;
        for (std::size_t c = 0; c < kWeightClasses; ++c) {
          o.probe_counts[probe_slot(c, 0)] = binomial(drng, by_class[0][c], design.penetration);
          o.probe_counts[probe_slot(c, 1)] = binomial(drng, by_class[1][c], design.penetration);
          o.probe_counts[probe_slot(c, 2)] = prev_second[c];
          prev_second[c] = o.probe_counts[probe_slot(c, 1)];
        }
        if (i == 0) continue;

        const double x = volume / capacity;
        const double slowdown = 1.0 - 0.5 * (1.0 - multiplier);
        const double speed = design.ffs * (1.0 - 0.2 * x - 0.3 * x * x) * slowdown + cfg.speed_noise_sd * n01(drng);
        o.avg_speed = round_to(std::clamp(speed, 5.0, 1.2 * design.ffs), 0.1);
        o.free_flow_speed = design.ffs;
        o.temperature = w.temperature;
        o.visibility = w.visibility;
        o.precipitation = w.precipitation;
        o.weather = std::string(kWeatherKinds[w.kind].name);
        const auto& generic_shares = d >= 5 ? generic_weekend : generic_weekday;
        o.profile_estimate = round_to(meta.aadt * generic_days[d] * generic_shares[static_cast<std::size_t>(ts.hour)], 0.1);
        o.target_volume = volume;
        world.dataset.observations.push_back(std::move(o));
      }
    }
  }
  world.dataset.validate();
  return world;
}

void export_world(const SyntheticWorld& world, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError(fmt::format("cannot create {}: {}", dir.string(), ec.message()));
  write_observations((dir / "observations.csv").string(), world.dataset.observations);
  write_stations((dir / "stations.csv").string(), world.dataset.stations);
  write_holidays((dir / "holidays.txt").string(), world.dataset.holidays);

  std::string out = "station_id,direction,timestamp,true_volume,penetration_rate\n";
  for (const auto& o : world.dataset.observations) {
    const auto it = std::find_if(world.truth.begin(), world.truth.end(), [&](const StationTruth& t) {
      return t.station_id == o.station_id && t.direction == o.direction;
    });
    out += fmt::format("{},{},{},{},{}\n", o.station_id, to_string(o.direction), o.timestamp.to_string(),
                       csv::format_double(*o.target_volume), csv::format_double(it->penetration));
  }
  csv::write_text((dir / "truth.csv").string(), out);
}

}  // namespace volest::synth
