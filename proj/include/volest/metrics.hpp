#pragma once

// Accuracy measures, the HCM capacity lookup and the Wilcoxon signed-rank test.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "volest/features.hpp"

namespace volest::metrics {

double r_squared(std::span<const double> actual, std::span<const double> predicted);

struct MapeResult {
  double percent = 0.0;
  std::size_t n_excluded = 0;  // hours with zero actual volume
};
MapeResult mape(std::span<const double> actual, std::span<const double> predicted);

/// Mean absolute error over (capacity_per_lane * lanes), in percent.
double etcr(std::span<const double> actual, std::span<const double> predicted, double capacity_per_lane,
            int lanes);
/// Mean absolute error over the largest actual volume, in percent.
double emfr(std::span<const double> actual, std::span<const double> predicted);

enum class Facility { Freeway, Multilane };
Facility facility_for(RoadClass c);
std::string_view to_string(Facility f);

class CapacityTable {
 public:
  struct Row {
    double free_flow_speed;
    std::optional<double> freeway;
    std::optional<double> multilane;
  };

  explicit CapacityTable(std::vector<Row> rows);
  static const CapacityTable& standard();
  /// CSV with header free_flow_speed,freeway,multilane; "NA" marks a missing cell.
  static CapacityTable load(const std::string& path);

  /// Per-lane capacity (pc/h/ln). FFS is rounded to the 5 mi/h grid and clamped
  /// to the speeds defined for the facility.
  double lookup(double free_flow_speed, Facility facility) const;
  const std::vector<Row>& rows() const { return rows_; }

 private:
  std::vector<Row> rows_;  // sorted by descending free-flow speed
};

inline double capacity_lookup(double free_flow_speed, Facility facility) {
  return CapacityTable::standard().lookup(free_flow_speed, facility);
}

struct MetricReport {
  double r_squared = 0.0;
  double mape = 0.0;
  double etcr = 0.0;
  double emfr = 0.0;
  std::size_t n_points = 0;
  std::size_t n_excluded_zero_targets = 0;
};

MetricReport evaluate(std::span<const double> actual, std::span<const double> predicted,
                      double capacity_per_lane, int lanes);

enum class WilcoxonMethod { Auto, Exact, Normal };

struct WilcoxonResult {
  double statistic = 0.0;  // W+, sum of ranks of positive differences
  double p_value = 1.0;    // two-sided
  std::size_t n = 0;       // nonzero differences used
  bool exact = false;
};

/// Zero differences are dropped and ties get average ranks. Auto uses exact
/// enumeration up to 20 nonzero differences and the normal approximation above.
WilcoxonResult wilcoxon_signed_rank(std::span<const double> differences,
                                    WilcoxonMethod method = WilcoxonMethod::Auto);

inline constexpr std::size_t kWilcoxonExactLimit = 20;
inline constexpr std::size_t kWilcoxonMinimum = 5;

}  // namespace volest::metrics
