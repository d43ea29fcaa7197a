#include "volest/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "volest/csv.hpp"
#include "volest/error.hpp"

namespace volest::metrics {

namespace {

void check_pair(std::span<const double> actual, std::span<const double> predicted, const char* what) {
  if (actual.size() != predicted.size())
    throw DataError(fmt::format("{}: {} actual values but {} predictions", what, actual.size(), predicted.size()));
  if (actual.empty()) throw DataError(fmt::format("{}: no data points", what));
}

double mean_abs_error(std::span<const double> actual, std::span<const double> predicted) {
  double sum = 0.0;
  for (std::size_t i = 0; i < actual.size(); ++i) sum += std::abs(predicted[i] - actual[i]);
  return sum / static_cast<double>(actual.size());
}

}  // namespace

double r_squared(std::span<const double> actual, std::span<const double> predicted) {
  check_pair(actual, predicted, "r_squared");
  const double mean = std::accumulate(actual.begin(), actual.end(), 0.0) / static_cast<double>(actual.size());
  double sse = 0.0, sst = 0.0;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    sse += (actual[i] - predicted[i]) * (actual[i] - predicted[i]);
    sst += (actual[i] - mean) * (actual[i] - mean);
  }
  if (sst == 0.0) throw DataError("r_squared: actual values have zero variance");
  return 1.0 - sse / sst;
}

MapeResult mape(std::span<const double> actual, std::span<const double> predicted) {
  check_pair(actual, predicted, "mape");
  MapeResult r;
  double sum = 0.0;
  std::size_t used = 0;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    if (actual[i] == 0.0) {
      ++r.n_excluded;
      continue;
    }
    sum += std::abs((predicted[i] - actual[i]) / actual[i]);
    ++used;
  }
  if (used == 0) throw DataError("mape: every actual value is zero");
  r.percent = sum / static_cast<double>(used) * 100.0;
  return r;
}

double etcr(std::span<const double> actual, std::span<const double> predicted, double capacity_per_lane,
            int lanes) {
  check_pair(actual, predicted, "etcr");
  if (lanes < 1) throw DataError(fmt::format("etcr: lane count {} < 1", lanes));
  if (!(capacity_per_lane > 0.0)) throw DataError("etcr: capacity must be positive");
  return mean_abs_error(actual, predicted) / (capacity_per_lane * lanes) * 100.0;
}

double emfr(std::span<const double> actual, std::span<const double> predicted) {
  check_pair(actual, predicted, "emfr");
  const double y_max = *std::max_element(actual.begin(), actual.end());
  if (!(y_max > 0.0)) throw DataError("emfr: maximum actual volume is not positive");
  return mean_abs_error(actual, predicted) / y_max * 100.0;
}

Facility facility_for(RoadClass c) { return c == RoadClass::Motorway ? Facility::Freeway : Facility::Multilane; }

std::string_view to_string(Facility f) { return f == Facility::Freeway ? "Freeway" : "Multilane"; }

CapacityTable::CapacityTable(std::vector<Row> rows) : rows_(std::move(rows)) {
  std::sort(rows_.begin(), rows_.end(),
            [](const Row& a, const Row& b) { return a.free_flow_speed > b.free_flow_speed; });
  bool any_freeway = false, any_multilane = false;
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    const auto& r = rows_[i];
    if (!(r.free_flow_speed > 0.0)) throw ConfigError("capacity table: free-flow speed must be positive");
    if (i && r.free_flow_speed == rows_[i - 1].free_flow_speed)
      throw ConfigError(fmt::format("capacity table: duplicate speed {}", r.free_flow_speed));
    for (const auto& cell : {r.freeway, r.multilane})
      if (cell && !(*cell > 0.0)) throw ConfigError("capacity table: capacities must be positive");
    any_freeway |= r.freeway.has_value();
    any_multilane |= r.multilane.has_value();
  }
  if (!any_freeway || !any_multilane)
    throw ConfigError("capacity table needs at least one freeway and one multilane value");
}

const CapacityTable& CapacityTable::standard() {
  static const CapacityTable table({
      {75, 2400, std::nullopt},
      {70, 2400, 2300},
      {65, 2350, 2300},
      {60, 2300, 2200},
      {55, 2250, 2100},
      {50, std::nullopt, 2000},
      {45, std::nullopt, 1900},
  });
  return table;
}

CapacityTable CapacityTable::load(const std::string& path) {
  const auto lines = csv::read_lines(path);
  if (lines.empty() || lines[0] != "free_flow_speed,freeway,multilane")
    throw ConfigError(fmt::format("{}: expected header 'free_flow_speed,freeway,multilane'", path));
  std::vector<Row> rows;
  const auto cell = [](std::string_view s, const char* name) -> std::optional<double> {
    if (s == "NA") return std::nullopt;
    return csv::parse_double(s, name);
  };
  for (std::size_t ln = 1; ln < lines.size(); ++ln) {
    if (lines[ln].empty()) continue;
    const auto f = csv::split(lines[ln]);
    try {
      if (f.size() != 3) throw DataError("expected 3 fields");
      rows.push_back({csv::parse_double(f[0], "free_flow_speed"), cell(f[1], "freeway"), cell(f[2], "multilane")});
    } catch (const DataError& e) {
      throw ConfigError(fmt::format("{}:{}: {}", path, ln + 1, e.what()));
    }
  }
  return CapacityTable(std::move(rows));
}

double CapacityTable::lookup(double free_flow_speed, Facility facility) const {
  if (!(free_flow_speed > 0.0) || !std::isfinite(free_flow_speed))
    throw DataError(fmt::format("capacity lookup: invalid free-flow speed {}", free_flow_speed));
  const auto value = [&](const Row& r) { return facility == Facility::Freeway ? r.freeway : r.multilane; };
  double lo = 0.0, hi = 0.0;
  bool first = true;
  for (const auto& r : rows_) {
    if (!value(r)) continue;
    if (first) hi = r.free_flow_speed;
    lo = r.free_flow_speed;
    first = false;
  }
  const double speed = std::clamp(std::round(free_flow_speed / 5.0) * 5.0, lo, hi);
  for (const auto& r : rows_)
    if (r.free_flow_speed == speed && value(r)) return *value(r);
  throw ConfigError(fmt::format("capacity table has no {} value at {} mi/h", to_string(facility), speed));
}

MetricReport evaluate(std::span<const double> actual, std::span<const double> predicted,
                      double capacity_per_lane, int lanes) {
  MetricReport r;
  r.r_squared = r_squared(actual, predicted);
  const auto m = mape(actual, predicted);
  r.mape = m.percent;
  r.n_excluded_zero_targets = m.n_excluded;
  r.etcr = etcr(actual, predicted, capacity_per_lane, lanes);
  r.emfr = emfr(actual, predicted);
  r.n_points = actual.size();
  for (double v : {r.r_squared, r.mape, r.etcr, r.emfr})
    if (!std::isfinite(v)) throw NumericError("non-finite accuracy measure");
  return r;
}

WilcoxonResult wilcoxon_signed_rank(std::span<const double> differences, WilcoxonMethod method) {
  std::vector<double> d;
  for (double x : differences) {
    if (!std::isfinite(x)) throw DataError("wilcoxon: non-finite difference");
    if (x != 0.0) d.push_back(x);
  }
  const std::size_t n = d.size();
  if (n < kWilcoxonMinimum)
    throw DataError(fmt::format("wilcoxon: {} nonzero differences, need at least {}", n, kWilcoxonMinimum));

  // average ranks of |d|, kept doubled so ties stay integral
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return std::abs(d[a]) < std::abs(d[b]); });
  std::vector<long> rank2(n);
  double tie_term = 0.0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && std::abs(d[order[j + 1]]) == std::abs(d[order[i]])) ++j;
    const long doubled = static_cast<long>(i + 1 + j + 1);  // 2 * mean of ranks i+1..j+1
    for (std::size_t k = i; k <= j; ++k) rank2[order[k]] = doubled;
    const double t = static_cast<double>(j - i + 1);
    tie_term += t * t * t - t;
    i = j + 1;
  }

  long w2 = 0;
  for (std::size_t i = 0; i < n; ++i)
    if (d[i] > 0) w2 += rank2[i];

  WilcoxonResult r;
  r.n = n;
  r.statistic = static_cast<double>(w2) / 2.0;
  r.exact = method == WilcoxonMethod::Exact || (method == WilcoxonMethod::Auto && n <= kWilcoxonExactLimit);

  if (r.exact) {
    // distribution of doubled W+ over all 2^n sign assignments
    const long total = std::accumulate(rank2.begin(), rank2.end(), 0L);
    std::vector<double> ways(static_cast<std::size_t>(total) + 1, 0.0);
    ways[0] = 1.0;
    long reach = 0;
    for (long rk : rank2) {
      for (long s = reach; s >= 0; --s)
        if (ways[static_cast<std::size_t>(s)] != 0.0) ways[static_cast<std::size_t>(s + rk)] += ways[static_cast<std::size_t>(s)];
      reach += rk;
    }
    const double all = std::ldexp(1.0, static_cast<int>(n));
    double lower = 0.0, upper = 0.0;
    for (long s = 0; s <= total; ++s) {
      if (s <= w2) lower += ways[static_cast<std::size_t>(s)];
      if (s >= w2) upper += ways[static_cast<std::size_t>(s)];
    }
    r.p_value = std::min(1.0, 2.0 * std::min(lower, upper) / all);
  } else {
    const double nn = static_cast<double>(n);
    const double mean = nn * (nn + 1.0) / 4.0;
    const double var = nn * (nn + 1.0) * (2.0 * nn + 1.0) / 24.0 - tie_term / 48.0;
    const double z = std::max(0.0, std::abs(r.statistic - mean) - 0.5) / std::sqrt(var);
    r.p_value = std::min(1.0, std::erfc(z / std::sqrt(2.0)));
  }
  return r;
}

}  // namespace volest::metrics
