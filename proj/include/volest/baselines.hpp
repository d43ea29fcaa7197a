#pragma once

// Reference estimators: the AADT-based profiling method, linear regression,
// k-nearest neighbours, and ensemble averaging.

#include <array>
#include <span>
#include <string>
#include <vector>

#include "volest/features.hpp"

namespace volest::baselines {

/// Typical-week profile. Day index 0 = Monday.
struct ProfileFactors {
  std::array<double, 7> day_factor{};                // sums to 7
  std::array<std::array<double, 24>, 7> share{};     // each day sums to 1

  static ProfileFactors uniform();
  /// Throws DataError when an invariant does not hold within 1e-9.
  void validate() const;
  double estimate(double aadt, const Timestamp& ts) const;

  friend bool operator==(const ProfileFactors&, const ProfileFactors&) = default;
};

/// Averages hourly shares of complete observed days and daily totals relative
/// to AADT over the given stations. Observations need target volumes; rows of
/// carriageways without metadata in `stations` are ignored.
ProfileFactors derive_profile_factors(std::span<const HourlyObservation> observations,
                                      std::span<const StationMeta> stations);

inline double profile_estimate(const ProfileFactors& f, double aadt, const Timestamp& ts) {
  return f.estimate(aadt, ts);
}

/// CSV with columns day,hour,share,day_factor.
void write_profile_factors(const std::string& path, const ProfileFactors& f);
ProfileFactors read_profile_factors(const std::string& path);

struct LinearModel {
  Eigen::VectorXd coefficients;
  double intercept = 0.0;
  double ridge = 0.0;
};

/// Ridge-guarded least squares. The penalty is ridge_scale times the mean
/// diagonal of the centered Gram matrix, followed by one refinement step.
LinearModel linreg_fit(const Eigen::Ref<const RowMatrix>& x, std::span<const double> y,
                       double ridge_scale = 1e-6);
double linreg_predict(const LinearModel& m, std::span<const double> row);
std::vector<double> linreg_predict(const LinearModel& m, const Eigen::Ref<const RowMatrix>& x);

/// Brute-force Euclidean k-NN regression; ties broken by training order.
class KnnModel {
 public:
  KnnModel(RowMatrix x, std::vector<double> y);
  double predict(std::span<const double> row, std::size_t k) const;
  std::vector<double> predict(const Eigen::Ref<const RowMatrix>& x, std::size_t k) const;
  std::size_t size() const { return y_.size(); }

 private:
  RowMatrix x_;
  std::vector<double> y_;
};

std::vector<double> ensemble_average(std::span<const std::vector<double>> members);

}  // namespace volest::baselines
