#include "volest/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <map>
#include <numeric>
#include <set>
#include <thread>

#include <fmt/format.h>

#include "volest/error.hpp"

namespace volest::harness {

namespace {

template <class E, std::size_t N>
E parse_enum(std::string_view s, const std::array<std::pair<std::string_view, E>, N>& table, const char* what) {
  for (const auto& [name, value] : table)
    if (name == s) return value;
  std::string options;
  for (const auto& [name, value] : table) options += fmt::format("{}{}", options.empty() ? "" : ", ", name);
  throw ConfigError(fmt::format("unknown {} '{}' (expected one of: {})", what, s, options));
}

template <class E, std::size_t N>
std::string_view enum_name(E v, const std::array<std::pair<std::string_view, E>, N>& table) {
  for (const auto& [name, value] : table)
    if (value == v) return name;
  return "?";
}

constexpr std::array<std::pair<std::string_view, Method>, 6> kMethods{{{"ann", Method::Ann},
                                                                      {"ann_nobn", Method::AnnNoBn},
                                                                      {"profile", Method::Profile},
                                                                      {"linreg", Method::LinReg},
                                                                      {"knn", Method::Knn},
                                                                      {"ensemble", Method::Ensemble}}};
constexpr std::array<std::pair<std::string_view, ProfileSource>, 2> kProfileSources{
    {{"derived", ProfileSource::Derived}, {"column", ProfileSource::Column}}};
constexpr std::array<std::pair<std::string_view, QuintileKey>, 2> kQuintileKeys{
    {{"probes", QuintileKey::AvgProbeVolume}, {"penetration", QuintileKey::PenetrationRate}}};

using StationIndex = std::map<Carriageway, const StationMeta*>;

StationIndex index_stations(const Dataset& ds) {
  StationIndex idx;
  for (const auto& m : ds.stations) idx[{m.station_id, m.direction}] = &m;
  return idx;
}

RowMatrix gather(const std::vector<FeatureVector>& encoded, const std::vector<std::size_t>& rows) {
  RowMatrix x(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(layout::kWidth));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t c = 0; c < layout::kWidth; ++c)
      x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = encoded[rows[i]].values[c];
  return x;
}

std::vector<double> targets(const Dataset& ds, const std::vector<std::size_t>& rows) {
  std::vector<double> y;
  y.reserve(rows.size());
  for (auto r : rows) {
    const auto& t = ds.observations[r].target_volume;
    if (!t) throw DataError(fmt::format("observation {} {} has no target volume",
                                        ds.observations[r].station_id, ds.observations[r].timestamp.to_string()));
    y.push_back(*t);
  }
  return y;
}

std::vector<CarriagewayResult> per_carriageway(const Dataset& ds, const StationIndex& stations,
                                               const std::vector<std::size_t>& rows,
                                               const std::vector<double>& predicted,
                                               const metrics::CapacityTable& capacity) {
  std::map<Carriageway, std::vector<std::size_t>> groups;  // positions into rows
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& o = ds.observations[rows[i]];
    groups[{o.station_id, o.direction}].push_back(i);
  }
  std::vector<CarriagewayResult> out;
  for (auto& [cw, members] : groups) {
    std::stable_sort(members.begin(), members.end(), [&](std::size_t a, std::size_t b) {
      return ds.observations[rows[a]].timestamp < ds.observations[rows[b]].timestamp;
    });
    const auto& meta = *stations.at(cw);
    CarriagewayResult r;
    r.carriageway = cw;
    double ffs = 0.0, probes = 0.0;
    for (auto i : members) {
      const auto& o = ds.observations[rows[i]];
      r.timestamps.push_back(o.timestamp);
      r.actual.push_back(*o.target_volume);
      r.predicted.push_back(predicted[i]);
      ffs += o.free_flow_speed;
      probes += o.probes_in_hour();
    }
    const double n = static_cast<double>(members.size());
    r.lanes = meta.lanes;
    r.capacity_per_lane = capacity.lookup(ffs / n, metrics::facility_for(meta.road_class));
    r.metrics = metrics::evaluate(r.actual, r.predicted, r.capacity_per_lane, r.lanes);
    r.avg_probes = probes / n;
    const double total = std::accumulate(r.actual.begin(), r.actual.end(), 0.0);
    r.penetration = total > 0.0 ? probes / total : 0.0;
    out.push_back(std::move(r));
  }
  return out;
}

nn::LayerSpec ann_spec(const AnnSettings& s) {
  nn::LayerSpec spec;
  spec.input_dim = layout::kWidth;
  spec.hidden_dims = s.hidden;
  spec.activation = nn::Activation::elu(s.elu_alpha);
  spec.use_batchnorm = s.batchnorm;
  spec.keep_prob = s.keep_prob;
  return spec;
}

std::vector<FoldResult> run_all(const Dataset& ds, const CvConfig& cfg, bool fit_training_rows) {
  const auto encoded = encode_all(ds);
  const auto folds = loso_folds(ds.station_ids());
  std::vector<FoldResult> results(folds.size());
  std::vector<std::exception_ptr> errors(folds.size());
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < folds.size(); i = next++) {
      try {
        results[i] = run_fold(ds, encoded, folds[i], i, cfg, fit_training_rows);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::clamp<std::size_t>(cfg.jobs, 1, folds.size());
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return results;
}

std::vector<double> carriageway_values(const std::vector<const CarriagewayResult*>& cws, Measure m) {
  std::vector<double> v;
  for (const auto* c : cws) v.push_back(measure_value(c->metrics, m));
  return v;
}

std::map<std::string, const CarriagewayResult*> by_label(const MethodResults& r) {
  std::map<std::string, const CarriagewayResult*> out;
  for (const auto* c : carriageways(r.folds)) out[c->carriageway.label()] = c;
  return out;
}

}  // namespace

std::string_view to_string(Method m) { return enum_name(m, kMethods); }
Method parse_method(std::string_view s) { return parse_enum(s, kMethods, "method"); }
std::string_view to_string(ProfileSource p) { return enum_name(p, kProfileSources); }
ProfileSource parse_profile_source(std::string_view s) { return parse_enum(s, kProfileSources, "profile source"); }
std::string_view to_string(QuintileKey k) { return enum_name(k, kQuintileKeys); }
QuintileKey parse_quintile_key(std::string_view s) { return parse_enum(s, kQuintileKeys, "quintile key"); }

std::string_view to_string(Measure m) {
  switch (m) {
    case Measure::R2: return "R2";
    case Measure::Mape: return "MAPE";
    case Measure::Etcr: return "ETCR";
    case Measure::Emfr: return "EMFR";
  }
  return "?";
}

double measure_value(const metrics::MetricReport& r, Measure m) {
  switch (m) {
    case Measure::R2: return r.r_squared;
    case Measure::Mape: return r.mape;
    case Measure::Etcr: return r.etcr;
    case Measure::Emfr: return r.emfr;
  }
  return 0.0;
}

std::vector<Fold> loso_folds(std::vector<std::string> stations) {
  std::sort(stations.begin(), stations.end());
  if (std::adjacent_find(stations.begin(), stations.end()) != stations.end())
    throw DataError("station list contains duplicates");
  if (stations.size() < 2)
    throw DataError(fmt::format("cross-validation needs at least 2 stations, found {}", stations.size()));
  std::vector<Fold> folds;
  for (const auto& s : stations) {
    Fold f;
    f.test_station = s;
    for (const auto& t : stations)
      if (t != s) f.train_stations.push_back(t);
    folds.push_back(std::move(f));
  }
  return folds;
}

std::uint64_t fold_seed(std::uint64_t base, std::size_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(base), static_cast<std::uint32_t>(base >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  std::array<std::uint32_t, 2> out{};
  seq.generate(out.begin(), out.end());
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

std::vector<FeatureVector> encode_all(const Dataset& ds) {
  const auto stations = index_stations(ds);
  std::vector<FeatureVector> out;
  out.reserve(ds.observations.size());
  for (const auto& o : ds.observations) {
    const auto it = stations.find({o.station_id, o.direction});
    if (it == stations.end())
      throw DataError(fmt::format("no station metadata for {}-{}", o.station_id, to_string(o.direction)));
    out.push_back(assemble(o, *it->second, ds.holidays));
  }
  return out;
}

AnnModel fit_ann(const RowMatrix& x, const std::vector<double>& y, const AnnSettings& settings, std::uint64_t seed,
                 const RowMatrix& validation_x, const std::vector<double>& validation_y, nn::LossHistory* history) {
  if (x.rows() == 0) throw DataError("no training rows");
  AnnModel m;
  m.spec = ann_spec(settings);
  m.spec.validate();
  m.standardizer = Standardizer::fit(x);
  const Eigen::Map<const Eigen::VectorXd> yv(y.data(), static_cast<Eigen::Index>(y.size()));
  m.target_mean = yv.mean();
  const double sd = std::sqrt((yv.array() - m.target_mean).square().mean());
  m.target_std = sd > 0.0 ? sd : 1.0;

  const nn::Matrix xs = m.standardizer.apply(x);
  const nn::Vector ys = (yv.array() - m.target_mean) / m.target_std;
  nn::Matrix vx(0, x.cols());
  nn::Vector vy(0);
  if (validation_x.rows() > 0) {
    vx = m.standardizer.apply(validation_x);
    const Eigen::Map<const Eigen::VectorXd> v(validation_y.data(), static_cast<Eigen::Index>(validation_y.size()));
    vy = (v.array() - m.target_mean) / m.target_std;
  }
  nn::TrainConfig tc;
  tc.epochs = settings.epochs;
  tc.batch_size = settings.batch_size;
  tc.adam = settings.adam;
  tc.loss = nn::Loss::Mae;
  tc.seed = seed;
  tc.report_scale = m.target_std;
  auto trained = nn::train(xs, ys, vx, vy, m.spec, tc);
  m.params = std::move(trained.params);
  if (history) *history = std::move(trained.history);
  return m;
}

FoldResult run_fold(const Dataset& ds, const std::vector<FeatureVector>& encoded, const Fold& fold,
                    std::size_t fold_index, const CvConfig& cfg, bool fit_training_rows) {
  if (encoded.size() != ds.observations.size()) throw StructuralError("encoded rows do not match the dataset");
  const std::set<std::string> train_set(fold.train_stations.begin(), fold.train_stations.end());
  if (train_set.count(fold.test_station))
    throw StructuralError(fmt::format("fold {}: held-out station {} is also a training station", fold_index,
                                      fold.test_station));
  std::vector<std::size_t> train_rows, test_rows;
  for (std::size_t i = 0; i < ds.observations.size(); ++i) {
    const auto& id = ds.observations[i].station_id;
    if (id == fold.test_station)
      test_rows.push_back(i);
    else if (train_set.count(id))
      train_rows.push_back(i);
  }
  for (auto r : train_rows)
    if (ds.observations[r].station_id == fold.test_station)
      throw StructuralError(fmt::format("fold {}: held-out rows leaked into training", fold_index));
  if (test_rows.empty()) throw DataError(fmt::format("fold {}: station {} has no rows", fold_index, fold.test_station));
  if (train_rows.empty()) throw DataError(fmt::format("fold {}: no training rows", fold_index));

  const auto stations = index_stations(ds);
  FoldResult result;
  result.fold_index = fold_index;
  result.test_station = fold.test_station;
  result.train_rows = train_rows.size();
  std::set<std::string> used;
  for (auto r : train_rows) used.insert(ds.observations[r].station_id);
  result.train_stations.assign(used.begin(), used.end());

  RowMatrix train_x = gather(encoded, train_rows);
  RowMatrix test_x = gather(encoded, test_rows);
  std::optional<baselines::ProfileFactors> profile;
  if (cfg.profile_source == ProfileSource::Derived) {
    std::vector<StationMeta> train_meta;
    for (const auto& m : ds.stations)
      if (train_set.count(m.station_id)) train_meta.push_back(m);
    profile = baselines::derive_profile_factors(ds.observations, train_meta);
    const auto fill = [&](RowMatrix& x, const std::vector<std::size_t>& rows) {
      for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& o = ds.observations[rows[i]];
        x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(layout::kProfile)) =
            profile->estimate(stations.at({o.station_id, o.direction})->aadt, o.timestamp);
      }
    };
    fill(train_x, train_rows);
    fill(test_x, test_rows);
  }
  const auto train_y = targets(ds, train_rows);
  targets(ds, test_rows);  // held-out rows must be labelled to be scored

  const std::uint64_t seed = fold_seed(cfg.seed, fold_index);
  std::vector<double> predicted, fitted;
  const auto ann = [&](bool batchnorm, std::uint64_t s, nn::LossHistory* history) {
    AnnSettings settings = cfg.ann;
    settings.batchnorm = batchnorm;
    RowMatrix vx(0, train_x.cols());
    std::vector<double> vy;
    if (cfg.track_validation) {
      vx = test_x;
      vy = targets(ds, test_rows);
    }
    auto model = fit_ann(train_x, train_y, settings, s, vx, vy, history);
    model.profile = profile;
    return model;
  };
  switch (cfg.method) {
    case Method::Profile:
      for (Eigen::Index i = 0; i < test_x.rows(); ++i) predicted.push_back(test_x(i, layout::kProfile));
      if (fit_training_rows)
        for (Eigen::Index i = 0; i < train_x.rows(); ++i) fitted.push_back(train_x(i, layout::kProfile));
      break;
    case Method::Ann:
    case Method::AnnNoBn: {
      auto model = ann(cfg.method == Method::Ann && cfg.ann.batchnorm, seed, &result.history);
      predicted = model.predict(test_x);
      if (fit_training_rows) fitted = model.predict(train_x);
      if (cfg.keep_params) result.model = std::move(model);
      break;
    }
    case Method::Ensemble: {
      const auto with_bn = ann(true, seed, &result.history);
      const auto without_bn = ann(false, fold_seed(seed, 1), nullptr);
      const std::vector<std::vector<double>> members{with_bn.predict(test_x), without_bn.predict(test_x)};
      predicted = baselines::ensemble_average(members);
      if (fit_training_rows) {
        const std::vector<std::vector<double>> fits{with_bn.predict(train_x), without_bn.predict(train_x)};
        fitted = baselines::ensemble_average(fits);
      }
      if (cfg.keep_params) result.model = with_bn;
      break;
    }
    case Method::LinReg:
    case Method::Knn: {
      const auto st = Standardizer::fit(train_x);
      const RowMatrix xs = st.apply(train_x);
      const RowMatrix ts = st.apply(test_x);
      if (cfg.method == Method::LinReg) {
        const auto lm = baselines::linreg_fit(xs, train_y);
        predicted = baselines::linreg_predict(lm, ts);
        if (fit_training_rows) fitted = baselines::linreg_predict(lm, xs);
      } else {
        const baselines::KnnModel knn(xs, train_y);
        predicted = knn.predict(ts, cfg.knn_k);
        if (fit_training_rows) fitted = knn.predict(xs, cfg.knn_k);
      }
      break;
    }
  }
  result.carriageways = per_carriageway(ds, stations, test_rows, predicted, cfg.capacity);
  if (fit_training_rows) result.train_fit = per_carriageway(ds, stations, train_rows, fitted, cfg.capacity);
  return result;
}

std::vector<FoldResult> run_cv(const Dataset& ds, const CvConfig& cfg) { return run_all(ds, cfg, false); }

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw DataError("quantile of an empty set");
  std::sort(values.begin(), values.end());
  const double pos = std::clamp(q, 0.0, 1.0) * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

FiveNumber five_number(const std::vector<double>& v) {
  return {quantile(v, 0.0), quantile(v, 0.25), quantile(v, 0.5), quantile(v, 0.75), quantile(v, 1.0)};
}

std::vector<const CarriagewayResult*> carriageways(const std::vector<FoldResult>& folds) {
  std::vector<const CarriagewayResult*> out;
  for (const auto& f : folds)
    for (const auto& c : f.carriageways) out.push_back(&c);
  std::sort(out.begin(), out.end(),
            [](const auto* a, const auto* b) { return a->carriageway < b->carriageway; });
  return out;
}

SummaryTable summarize(const MethodResults& results) {
  const auto cws = carriageways(results.folds);
  if (cws.empty()) throw DataError("no carriageways to summarize");
  SummaryTable t;
  t.method = results.name;
  t.n_carriageways = cws.size();
  for (std::size_t m = 0; m < kMeasures.size(); ++m) t.measures[m] = five_number(carriageway_values(cws, kMeasures[m]));
  return t;
}

std::vector<std::size_t> group_sizes(std::size_t n, std::size_t groups) {
  std::vector<std::size_t> sizes(groups, n / groups);
  for (std::size_t i = 0; i < n % groups; ++i) ++sizes[i];
  return sizes;
}

QuintileReport quintile_analysis(const std::vector<MethodResults>& methods, QuintileKey key) {
  if (methods.empty()) throw ConfigError("quintile analysis needs at least one method");
  auto base = carriageways(methods.front().folds);
  if (base.size() < 5)
    throw DataError(fmt::format("quintile analysis needs at least 5 carriageways, found {}", base.size()));
  const auto key_of = [&](const CarriagewayResult* c) {
    return key == QuintileKey::AvgProbeVolume ? c->avg_probes : c->penetration;
  };
  std::stable_sort(base.begin(), base.end(), [&](const auto* a, const auto* b) {
    const double ka = key_of(a), kb = key_of(b);
    return ka < kb || (ka == kb && a->carriageway < b->carriageway);
  });

  std::vector<std::map<std::string, const CarriagewayResult*>> lookup;
  for (const auto& m : methods) {
    lookup.push_back(by_label(m));
    if (lookup.back().size() != base.size())
      throw StructuralError(fmt::format("method {} covers {} carriageways, expected {}", m.name,
                                        lookup.back().size(), base.size()));
  }

  QuintileReport report;
  report.key = key;
  for (const auto& m : methods) report.methods.push_back(m.name);
  std::size_t start = 0;
  for (std::size_t size : group_sizes(base.size(), 5)) {
    QuintileGroup g;
    g.key_min = key_of(base[start]);
    g.key_max = key_of(base[start + size - 1]);
    for (std::size_t i = start; i < start + size; ++i) g.members.push_back(base[i]->carriageway);
    for (std::size_t mi = 0; mi < methods.size(); ++mi) {
      std::array<double, 4> med{};
      for (std::size_t k = 0; k < kMeasures.size(); ++k) {
        std::vector<double> v;
        for (const auto& cw : g.members) {
          const auto it = lookup[mi].find(cw.label());
          if (it == lookup[mi].end())
            throw StructuralError(fmt::format("method {} has no result for {}", methods[mi].name, cw.label()));
          v.push_back(measure_value(it->second->metrics, kMeasures[k]));
        }
        med[k] = quantile(v, 0.5);
      }
      g.medians.push_back(med);
    }
    report.groups.push_back(std::move(g));
    start += size;
  }
  return report;
}

Comparison compare_methods(const MethodResults& a, const MethodResults& b) {
  const auto la = by_label(a), lb = by_label(b);
  if (la.size() != lb.size() || !std::equal(la.begin(), la.end(), lb.begin(), [](const auto& x, const auto& y) {
        return x.first == y.first;
      }))
    throw StructuralError(fmt::format("methods {} and {} were evaluated on different carriageways", a.name, b.name));
  if (la.empty()) throw DataError("nothing to compare");
  Comparison c;
  c.a = a.name;
  c.b = b.name;
  c.n_pairs = la.size();
  for (std::size_t k = 0; k < kMeasures.size(); ++k) {
    std::vector<double> diff;
    for (const auto& [label, ra] : la)
      diff.push_back(measure_value(ra->metrics, kMeasures[k]) - measure_value(lb.at(label)->metrics, kMeasures[k]));
    auto& t = c.tests[k];
    t.median_difference = quantile(diff, 0.5);
    const auto nonzero = static_cast<std::size_t>(std::count_if(diff.begin(), diff.end(), [](double d) { return d != 0.0; }));
    if (nonzero == 0)
      t.note = "all differences are zero";
    else if (nonzero < metrics::kWilcoxonMinimum)
      t.note = fmt::format("only {} nonzero differences", nonzero);
    else
      t.test = metrics::wilcoxon_signed_rank(diff);
  }
  return c;
}

void assess_tail(LossCurve& curve) {
  const auto& v = curve.history.validation_mae;
  curve.overfit = false;
  curve.tail_slope = curve.tail_t = 0.0;
  const std::size_t m = v.size() / 4;
  if (m < 4 || std::any_of(v.begin(), v.end(), [](double x) { return !std::isfinite(x); })) return;
  const std::size_t start = v.size() - m;
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    mx += static_cast<double>(i);
    my += v[start + i];
  }
  mx /= static_cast<double>(m);
  my /= static_cast<double>(m);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    sxx += (i - mx) * (i - mx);
    sxy += (i - mx) * (v[start + i] - my);
  }
  const double slope = sxy / sxx;
  double ssr = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double r = v[start + i] - (my + slope * (i - mx));
    ssr += r * r;
  }
  const double se = std::sqrt(ssr / static_cast<double>(m - 2) / sxx);
  curve.tail_slope = slope;
  curve.tail_t = se > 0.0 ? slope / se : (slope > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
  const double rise = slope * static_cast<double>(m - 1);
  curve.overfit = curve.tail_t > 2.5 && rise > 0.02 * my;
}

std::vector<LossCurve> overfit_study(const Dataset& ds, const CvConfig& cfg, const std::vector<std::string>& stations) {
  if (cfg.method != Method::Ann && cfg.method != Method::AnnNoBn)
    throw ConfigError("the overfitting study needs an ANN method");
  if (stations.empty()) throw ConfigError("the overfitting study needs at least one validation station");
  const auto encoded = encode_all(ds);
  const auto folds = loso_folds(ds.station_ids());
  CvConfig c = cfg;
  c.track_validation = true;
  std::vector<LossCurve> curves;
  for (const auto& s : stations) {
    const auto it = std::find_if(folds.begin(), folds.end(), [&](const Fold& f) { return f.test_station == s; });
    if (it == folds.end()) throw DataError(fmt::format("validation station {} is not in the dataset", s));
    const auto fold = run_fold(ds, encoded, *it, static_cast<std::size_t>(it - folds.begin()), c);
    LossCurve curve;
    curve.station = s;
    curve.history = fold.history;
    assess_tail(curve);
    curves.push_back(std::move(curve));
  }
  return curves;
}

DropoutStudy dropout_study(const Dataset& ds, const CvConfig& cfg) {
  if (cfg.method != Method::Ann && cfg.method != Method::AnnNoBn)
    throw ConfigError("the dropout study needs an ANN method");
  if (!(cfg.ann.keep_prob < 1.0)) throw ConfigError("the dropout study needs keep_prob < 1");
  const auto arm = [&](double keep) {
    CvConfig c = cfg;
    c.ann.keep_prob = keep;
    DropoutArm a;
    a.keep_prob = keep;
    a.folds = run_all(ds, c, true);
    std::vector<double> train, test;
    for (const auto& f : a.folds) {
      for (const auto& r : f.train_fit) train.push_back(r.metrics.mape);
      for (const auto& r : f.carriageways) test.push_back(r.metrics.mape);
    }
    a.median_train_mape = quantile(train, 0.5);
    a.median_test_mape = quantile(test, 0.5);
    return a;
  };
  DropoutStudy s;
  s.with_dropout = arm(cfg.ann.keep_prob);
  s.without_dropout = arm(1.0);
  return s;
}

}  // namespace volest::harness
