#include "volest/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include <fmt/format.h>

#include "volest/csv.hpp"
#include "volest/error.hpp"

namespace volest::baselines {

ProfileFactors ProfileFactors::uniform() {
  ProfileFactors f;
  f.day_factor.fill(1.0);
  for (auto& day : f.share) day.fill(1.0 / 24.0);
  return f;
}

void ProfileFactors::validate() const {
  double total = 0.0;
  for (int d = 0; d < 7; ++d) {
    if (!(day_factor[d] >= 0.0)) throw DataError("profile: negative day factor");
    total += day_factor[d];
    double s = 0.0;
    for (double v : share[d]) {
      if (!(v >= 0.0)) throw DataError("profile: negative hourly share");
      s += v;
    }
    if (std::abs(s - 1.0) > 1e-9) throw DataError(fmt::format("profile: shares of day {} sum to {}", d, s));
  }
  if (std::abs(total - 7.0) > 1e-9) throw DataError(fmt::format("profile: day factors sum to {}", total));
}

double ProfileFactors::estimate(double aadt, const Timestamp& ts) const {
  const auto d = static_cast<std::size_t>(ts.day_index());
  return aadt * day_factor[d] * share[d][static_cast<std::size_t>(ts.hour)];
}

ProfileFactors derive_profile_factors(std::span<const HourlyObservation> observations,
                                      std::span<const StationMeta> stations) {
  std::map<std::pair<std::string, Direction>, double> aadt;
  for (const auto& m : stations) aadt[{m.station_id, m.direction}] = m.aadt;

  struct Day {
    std::array<double, 24> volume{};
    int hours = 0;
  };
  std::map<std::tuple<std::string, Direction, std::chrono::sys_days>, Day> days;
  for (const auto& o : observations) {
    if (!aadt.count({o.station_id, o.direction})) continue;
    if (!o.target_volume) throw DataError("profile: observation without a target volume");
    auto& day = days[{o.station_id, o.direction, o.timestamp.day}];
    day.volume[static_cast<std::size_t>(o.timestamp.hour)] = *o.target_volume;
    ++day.hours;
  }

  std::array<std::array<double, 24>, 7> share_sum{};
  std::array<int, 7> share_n{};
  // per carriageway and weekday: sum of daily totals relative to AADT, and day count
  std::map<std::pair<std::string, Direction>, std::array<std::pair<double, int>, 7>> ratio;
  for (const auto& [key, day] : days) {
    if (day.hours != 24) continue;
    const double total = std::accumulate(day.volume.begin(), day.volume.end(), 0.0);
    if (!(total > 0.0)) continue;
    const auto& [id, dir, date] = key;
    const auto d = static_cast<std::size_t>(Timestamp{date, 0}.day_index());
    for (std::size_t h = 0; h < 24; ++h) share_sum[d][h] += day.volume[h] / total;
    ++share_n[d];
    auto& r = ratio[{id, dir}][d];
    r.first += total / aadt.at({id, dir});
    ++r.second;
  }

  ProfileFactors f;
  std::array<double, 7> w{};
  for (std::size_t d = 0; d < 7; ++d) {
    if (share_n[d] == 0)
      throw DataError(fmt::format("profile: no complete observed day for weekday {}", d));
    for (std::size_t h = 0; h < 24; ++h) f.share[d][h] = share_sum[d][h] / share_n[d];
    const double s = std::accumulate(f.share[d].begin(), f.share[d].end(), 0.0);
    for (auto& v : f.share[d]) v /= s;

    double sum = 0.0;
    int n = 0;
    for (const auto& [cw, per_day] : ratio) {
      if (per_day[d].second == 0) continue;
      sum += per_day[d].first / per_day[d].second;
      ++n;
    }
    w[d] = sum / n;
  }
  const double wsum = std::accumulate(w.begin(), w.end(), 0.0);
  for (std::size_t d = 0; d < 7; ++d) f.day_factor[d] = 7.0 * w[d] / wsum;
  f.validate();
  return f;
}

void write_profile_factors(const std::string& path, const ProfileFactors& f) {
  std::string out = "day,hour,share,day_factor\n";
  for (int d = 0; d < 7; ++d)
    for (int h = 0; h < 24; ++h)
      out += fmt::format("{},{},{},{}\n", d, h, csv::format_double(f.share[d][h]), csv::format_double(f.day_factor[d]));
  csv::write_text(path, out);
}

ProfileFactors read_profile_factors(const std::string& path) {
  const auto lines = csv::read_lines(path);
  if (lines.empty() || lines[0] != "day,hour,share,day_factor")
    throw DataError(fmt::format("{}: expected header 'day,hour,share,day_factor'", path));
  ProfileFactors f;
  std::array<std::array<bool, 24>, 7> seen{};
  for (std::size_t ln = 1; ln < lines.size(); ++ln) {
    if (lines[ln].empty()) continue;
    const auto c = csv::split(lines[ln]);
    if (c.size() != 4) throw DataError(fmt::format("{}:{}: expected 4 fields", path, ln + 1));
    const long d = csv::parse_long(c[0], "day"), h = csv::parse_long(c[1], "hour");
    if (d < 0 || d > 6 || h < 0 || h > 23) throw DataError(fmt::format("{}:{}: day/hour out of range", path, ln + 1));
    f.share[d][h] = csv::parse_double(c[2], "share");
    f.day_factor[d] = csv::parse_double(c[3], "day_factor");
    seen[d][h] = true;
  }
  for (const auto& day : seen)
    for (bool s : day)
      if (!s) throw DataError(fmt::format("{}: missing day/hour rows", path));
  f.validate();
  return f;
}

LinearModel linreg_fit(const Eigen::Ref<const RowMatrix>& x, std::span<const double> y, double ridge_scale) {
  if (x.rows() == 0) throw DataError("linreg: no training rows");
  if (static_cast<std::size_t>(x.rows()) != y.size()) throw DataError("linreg: row/target count mismatch");
  const Eigen::Map<const Eigen::VectorXd> target(y.data(), static_cast<Eigen::Index>(y.size()));
  const Eigen::RowVectorXd mean = x.colwise().mean();
  const double y_mean = target.mean();
  const Eigen::MatrixXd xc = x.rowwise() - mean;
  const Eigen::VectorXd yc = target.array() - y_mean;

  const Eigen::MatrixXd gram = xc.transpose() * xc;
  const Eigen::VectorXd rhs = xc.transpose() * yc;
  const double scale = gram.diagonal().mean();
  LinearModel m;
  m.ridge = ridge_scale * (scale > 0.0 ? scale : 1.0);
  Eigen::MatrixXd regularized = gram;
  regularized.diagonal().array() += m.ridge;
  const Eigen::LDLT<Eigen::MatrixXd> solver(regularized);
  if (solver.info() != Eigen::Success) throw NumericError("linreg: factorization failed");
  Eigen::VectorXd beta = solver.solve(rhs);
  beta += solver.solve(rhs - gram * beta);
  if (!beta.allFinite()) throw NumericError("linreg: non-finite coefficients");
  m.coefficients = beta;
  m.intercept = y_mean - mean.dot(beta);
  return m;
}

double linreg_predict(const LinearModel& m, std::span<const double> row) {
  if (static_cast<Eigen::Index>(row.size()) != m.coefficients.size())
    throw StructuralError(fmt::format("linreg: row has {} features, model expects {}", row.size(), m.coefficients.size()));
  const Eigen::Map<const Eigen::VectorXd> v(row.data(), static_cast<Eigen::Index>(row.size()));
  return std::max(0.0, m.intercept + m.coefficients.dot(v));
}

std::vector<double> linreg_predict(const LinearModel& m, const Eigen::Ref<const RowMatrix>& x) {
  if (x.cols() != m.coefficients.size())
    throw StructuralError(fmt::format("linreg: rows have {} features, model expects {}", x.cols(), m.coefficients.size()));
  const Eigen::VectorXd raw = (x * m.coefficients).array() + m.intercept;
  std::vector<double> out(static_cast<std::size_t>(raw.size()));
  for (Eigen::Index i = 0; i < raw.size(); ++i) out[static_cast<std::size_t>(i)] = std::max(0.0, raw[i]);
  return out;
}

KnnModel::KnnModel(RowMatrix x, std::vector<double> y) : x_(std::move(x)), y_(std::move(y)) {
  if (x_.rows() == 0) throw DataError("knn: no training rows");
  if (static_cast<std::size_t>(x_.rows()) != y_.size()) throw DataError("knn: row/target count mismatch");
}

double KnnModel::predict(std::span<const double> row, std::size_t k) const {
  if (k == 0 || k > y_.size())
    throw ConfigError(fmt::format("knn: k = {} must be between 1 and the training size {}", k, y_.size()));
  if (static_cast<Eigen::Index>(row.size()) != x_.cols())
    throw StructuralError(fmt::format("knn: row has {} features, model expects {}", row.size(), x_.cols()));
  const Eigen::Map<const Eigen::RowVectorXd> q(row.data(), static_cast<Eigen::Index>(row.size()));
  const Eigen::VectorXd dist = (x_.rowwise() - q).rowwise().squaredNorm();
  std::vector<std::size_t> idx(y_.size());
  std::iota(idx.begin(), idx.end(), 0);
  const auto closer = [&](std::size_t a, std::size_t b) {
    const double da = dist[static_cast<Eigen::Index>(a)], db = dist[static_cast<Eigen::Index>(b)];
    return da < db || (da == db && a < b);
  };
  std::nth_element(idx.begin(), idx.begin() + static_cast<long>(k - 1), idx.end(), closer);
  double sum = 0.0;
  for (std::size_t i = 0; i < k; ++i) sum += y_[idx[i]];
  return sum / static_cast<double>(k);
}

std::vector<double> KnnModel::predict(const Eigen::Ref<const RowMatrix>& x, std::size_t k) const {
  std::vector<double> out(static_cast<std::size_t>(x.rows()));
  std::vector<double> row(static_cast<std::size_t>(x.cols()));
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    for (Eigen::Index c = 0; c < x.cols(); ++c) row[static_cast<std::size_t>(c)] = x(r, c);
    out[static_cast<std::size_t>(r)] = predict(row, k);
  }
  return out;
}

std::vector<double> ensemble_average(std::span<const std::vector<double>> members) {
  if (members.size() < 2) throw ConfigError("ensemble needs at least two members");
  std::vector<double> out(members[0].size(), 0.0);
  for (const auto& m : members) {
    if (m.size() != out.size()) throw StructuralError("ensemble members have different lengths");
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += m[i];
  }
  for (auto& v : out) v /= static_cast<double>(members.size());
  return out;
}

}  // namespace volest::baselines
