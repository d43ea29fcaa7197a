#include "volest/report.hpp"

#include <cmath>

#include <fmt/format.h>

#include "volest/csv.hpp"

namespace volest::report {

using harness::kMeasures;

namespace {

constexpr std::array<const char*, 5> kStats{"Min", "25th", "Median", "75th", "Max"};

std::string fixed(double v, harness::Measure m) {
  if (!std::isfinite(v)) return "nan";
  return m == harness::Measure::R2 ? fmt::format("{:.3f}", v) : fmt::format("{:.2f}", v);
}

double stat(const harness::FiveNumber& f, std::size_t i) {
  switch (i) {
    case 0: return f.min;
    case 1: return f.q25;
    case 2: return f.median;
    case 3: return f.q75;
    default: return f.max;
  }
}

Json number_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

Json five_json(const harness::FiveNumber& f) {
  return Json{{"min", f.min}, {"q25", f.q25}, {"median", f.median}, {"q75", f.q75}, {"max", f.max}};
}

Json metrics_json(const metrics::MetricReport& r) {
  return Json{{"r_squared", number_or_null(r.r_squared)},
              {"mape", number_or_null(r.mape)},
              {"etcr", number_or_null(r.etcr)},
              {"emfr", number_or_null(r.emfr)},
              {"n_points", r.n_points},
              {"n_excluded_zero_targets", r.n_excluded_zero_targets}};
}

std::string arm_text(const char* name, const harness::DropoutArm& a) {
  return fmt::format("{:<18}{:>10.2f}{:>12.2f}{:>12.2f}{:>10.2f}\n", name, a.keep_prob, a.median_train_mape,
                     a.median_test_mape, std::abs(a.median_train_mape - a.median_test_mape));
}

Json arm_json(const harness::DropoutArm& a) {
  return Json{{"keep_prob", a.keep_prob},
              {"median_train_mape", a.median_train_mape},
              {"median_test_mape", a.median_test_mape},
              {"gap", std::abs(a.median_train_mape - a.median_test_mape)}};
}

}  // namespace

std::string summary_text(const std::vector<harness::SummaryTable>& tables) {
  std::string out = fmt::format("{:<8}{:<8}", "Measure", "Stat");
  for (const auto& t : tables) out += fmt::format("{:>12}", t.method);
  out += "\n";
  for (std::size_t k = 0; k < kMeasures.size(); ++k)
    for (std::size_t s = 0; s < kStats.size(); ++s) {
      out += fmt::format("{:<8}{:<8}", s == 0 ? std::string(harness::to_string(kMeasures[k])) : "", kStats[s]);
      for (const auto& t : tables) out += fmt::format("{:>12}", fixed(stat(t.measures[k], s), kMeasures[k]));
      out += "\n";
    }
  out += fmt::format("{:<16}", "Carriageways");
  for (const auto& t : tables) out += fmt::format("{:>12}", t.n_carriageways);
  out += "\n";
  return out;
}

std::string comparison_text(const harness::Comparison& c) {
  std::string out = fmt::format("Wilcoxon signed-rank test, {} vs {} ({} paired carriageways)\n", c.a, c.b, c.n_pairs);
  out += fmt::format("{:<8}{:>14}{:>10}{:>12}  {}\n", "Measure", "median diff", "W+", "p-value", "note");
  for (std::size_t k = 0; k < kMeasures.size(); ++k) {
    const auto& t = c.tests[k];
    const auto name = harness::to_string(kMeasures[k]);
    if (t.test)
      out += fmt::format("{:<8}{:>14.4f}{:>10.1f}{:>12.4g}  {}\n", name, t.median_difference, t.test->statistic,
                         t.test->p_value, t.test->exact ? "exact" : "normal approximation");
    else
      out += fmt::format("{:<8}{:>14.4f}{:>10}{:>12}  {}\n", name, t.median_difference, "-", "-", t.note);
  }
  return out;
}

std::string quintile_text(const harness::QuintileReport& q) {
  const char* unit = q.key == harness::QuintileKey::AvgProbeVolume ? "probes/hr" : "penetration";
  std::string out = fmt::format("Carriageways grouped by {} ({})\n", harness::to_string(q.key), unit);
  out += fmt::format("{:<7}{:<20}{:>4}", "Group", "Range", "n");
  for (const auto& m : q.methods)
    for (auto k : kMeasures) out += fmt::format("{:>14}", fmt::format("{} {}", m, harness::to_string(k)));
  out += "\n";
  for (std::size_t g = 0; g < q.groups.size(); ++g) {
    const auto& grp = q.groups[g];
    const auto range = q.key == harness::QuintileKey::AvgProbeVolume
                           ? fmt::format("[{:.1f}, {:.1f}]", grp.key_min, grp.key_max)
                           : fmt::format("[{:.2f}%, {:.2f}%]", 100 * grp.key_min, 100 * grp.key_max);
    out += fmt::format("{:<7}{:<20}{:>4}", g + 1, range, grp.members.size());
    for (const auto& med : grp.medians)
      for (std::size_t k = 0; k < kMeasures.size(); ++k) out += fmt::format("{:>14}", fixed(med[k], kMeasures[k]));
    out += "\n";
  }
  return out;
}

std::string dropout_text(const harness::DropoutStudy& s) {
  std::string out = fmt::format("{:<18}{:>10}{:>12}{:>12}{:>10}\n", "Setting", "keep_prob", "train MAPE", "test MAPE",
                                "gap");
  out += arm_text("with dropout", s.with_dropout);
  out += arm_text("without dropout", s.without_dropout);
  return out;
}

std::string overfit_text(const std::vector<harness::LossCurve>& curves) {
  std::string out = fmt::format("{:<12}{:>8}{:>14}{:>14}{:>12}{:>10}  {}\n", "Station", "epochs", "final train",
                                "final valid", "tail slope", "tail t", "flag");
  for (const auto& c : curves) {
    const auto& h = c.history;
    out += fmt::format("{:<12}{:>8}{:>14.2f}{:>14.2f}{:>12.4f}{:>10.2f}  {}\n", c.station, h.size(),
                       h.train_mae.empty() ? NAN : h.train_mae.back(),
                       h.validation_mae.empty() ? NAN : h.validation_mae.back(), c.tail_slope, c.tail_t,
                       c.overfit ? "overfit" : "ok");
  }
  return out;
}

Json summary_json(const harness::SummaryTable& t) {
  Json j{{"method", t.method}, {"n_carriageways", t.n_carriageways}};
  for (std::size_t k = 0; k < kMeasures.size(); ++k)
    j["measures"][std::string(harness::to_string(kMeasures[k]))] = five_json(t.measures[k]);
  return j;
}

Json comparison_json(const harness::Comparison& c) {
  Json j{{"a", c.a}, {"b", c.b}, {"n_pairs", c.n_pairs}};
  for (std::size_t k = 0; k < kMeasures.size(); ++k) {
    const auto& t = c.tests[k];
    Json m{{"median_difference", t.median_difference}};
    if (t.test) {
      m["statistic"] = t.test->statistic;
      m["p_value"] = t.test->p_value;
      m["n"] = t.test->n;
      m["exact"] = t.test->exact;
    } else {
      m["p_value"] = nullptr;
      m["note"] = t.note;
    }
    j["tests"][std::string(harness::to_string(kMeasures[k]))] = m;
  }
  return j;
}

Json quintile_json(const harness::QuintileReport& q) {
  Json j{{"key", harness::to_string(q.key)}, {"methods", q.methods}, {"groups", Json::array()}};
  for (const auto& g : q.groups) {
    Json members = Json::array();
    for (const auto& c : g.members) members.push_back(c.label());
    Json medians;
    for (std::size_t m = 0; m < q.methods.size(); ++m)
      for (std::size_t k = 0; k < kMeasures.size(); ++k)
        medians[q.methods[m]][std::string(harness::to_string(kMeasures[k]))] = number_or_null(g.medians[m][k]);
    j["groups"].push_back(Json{{"key_min", g.key_min}, {"key_max", g.key_max}, {"members", members}, {"medians", medians}});
  }
  return j;
}

Json dropout_json(const harness::DropoutStudy& s) {
  return Json{{"with_dropout", arm_json(s.with_dropout)}, {"without_dropout", arm_json(s.without_dropout)}};
}

Json overfit_json(const std::vector<harness::LossCurve>& curves) {
  Json j = Json::array();
  for (const auto& c : curves)
    j.push_back(Json{{"station", c.station},
                     {"epochs", c.history.size()},
                     {"tail_slope", c.tail_slope},
                     {"tail_t", c.tail_t},
                     {"overfit", c.overfit}});
  return j;
}

Json folds_json(const harness::MethodResults& r) {
  Json folds = Json::array();
  for (const auto& f : r.folds) {
    Json cws = Json::array();
    for (const auto& c : f.carriageways) {
      Json m = metrics_json(c.metrics);
      m["carriageway"] = c.carriageway.label();
      m["avg_probes"] = c.avg_probes;
      m["penetration"] = c.penetration;
      m["capacity_per_lane"] = c.capacity_per_lane;
      m["lanes"] = c.lanes;
      cws.push_back(m);
    }
    folds.push_back(Json{{"fold", f.fold_index},
                         {"test_station", f.test_station},
                         {"train_stations", f.train_stations},
                         {"train_rows", f.train_rows},
                         {"epochs", f.history.size()},
                         {"carriageways", cws}});
  }
  return Json{{"method", r.name}, {"folds", folds}};
}

std::string long_csv(const std::vector<const harness::MethodResults*>& methods) {
  std::string out = "carriageway,measure,method,value\n";
  for (const auto* m : methods)
    for (const auto* c : harness::carriageways(m->folds))
      for (auto k : kMeasures)
        out += fmt::format("{},{},{},{}\n", c->carriageway.label(), harness::to_string(k), m->name,
                           csv::format_double(harness::measure_value(c->metrics, k)));
  return out;
}

std::string predictions_csv(const std::vector<harness::FoldResult>& folds) {
  std::string out = "station_id,direction,timestamp,actual,predicted\n";
  for (const auto& f : folds)
    for (const auto& c : f.carriageways)
      for (std::size_t i = 0; i < c.actual.size(); ++i)
        out += fmt::format("{},{},{},{},{}\n", c.carriageway.station_id, to_string(c.carriageway.direction),
                           c.timestamps[i].to_string(), csv::format_double(c.actual[i]),
                           csv::format_double(c.predicted[i]));
  return out;
}

std::string metrics_csv(const std::vector<harness::FoldResult>& folds) {
  std::string out =
      "carriageway,station_id,direction,fold,r_squared,mape,etcr,emfr,n_points,n_excluded_zero_targets,"
      "avg_probes,penetration,capacity_per_lane,lanes\n";
  for (const auto& f : folds)
    for (const auto& c : f.carriageways) {
      const auto& m = c.metrics;
      out += fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n", c.carriageway.label(),
                         c.carriageway.station_id, to_string(c.carriageway.direction), f.fold_index,
                         csv::format_double(m.r_squared), csv::format_double(m.mape), csv::format_double(m.etcr),
                         csv::format_double(m.emfr), m.n_points, m.n_excluded_zero_targets,
                         csv::format_double(c.avg_probes), csv::format_double(c.penetration),
                         csv::format_double(c.capacity_per_lane), c.lanes);
    }
  return out;
}

std::string loss_csv(const nn::LossHistory& h) {
  std::string out = "epoch,train_mae,validation_mae\n";
  for (std::size_t e = 0; e < h.size(); ++e) {
    const double v = e < h.validation_mae.size() ? h.validation_mae[e] : NAN;
    out += fmt::format("{},{},{}\n", e + 1, csv::format_double(h.train_mae[e]),
                       std::isfinite(v) ? csv::format_double(v) : "");
  }
  return out;
}

void write_json(const std::string& path, const Json& j) { csv::write_text(path, j.dump(2) + "\n"); }

}  // namespace volest::report
