#include "volest/workflows.hpp"

#include <algorithm>
#include <charconv>
#include <functional>
#include <set>

#include <fmt/format.h>

#include "volest/csv.hpp"
#include "volest/error.hpp"
#include "volest/model_io.hpp"
#include "volest/report.hpp"

namespace volest::workflows {

namespace fs = std::filesystem;

namespace {

constexpr std::array<std::pair<std::string_view, Command>, 7> kCommands{{{"generate", Command::Generate},
                                                                        {"train", Command::Train},
                                                                        {"predict", Command::Predict},
                                                                        {"cv", Command::Cv},
                                                                        {"compare", Command::Compare},
                                                                        {"quintiles", Command::Quintiles},
                                                                        {"study", Command::Study}}};
constexpr std::array<std::pair<std::string_view, Study>, 2> kStudies{
    {{"overfit", Study::Overfit}, {"dropout", Study::Dropout}}};

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return std::string(s.substr(b, e - b + 1));
}

template <class T>
T parse_integer(std::string_view key, std::string_view v) {
  T out{};
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size() || v.empty())
    throw ConfigError(fmt::format("{}: '{}' is not a valid non-negative integer", key, v));
  return out;
}

double parse_real(std::string_view key, std::string_view v) {
  try {
    return csv::parse_double(v, key);
  } catch (const DataError&) {
    throw ConfigError(fmt::format("{}: '{}' is not a number", key, v));
  }
}

bool parse_bool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(fmt::format("{}: '{}' is not a boolean (true/false)", key, v));
}

std::vector<std::string> parse_list(std::string_view v) {
  std::vector<std::string> out;
  if (trim(v).empty()) return out;
  for (auto part : csv::split(v)) out.push_back(trim(part));
  return out;
}

template <class F>
auto rethrow_as_config(F&& f) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
}

std::string join(const std::vector<std::string>& v) {
  std::string out;
  for (const auto& s : v) out += (out.empty() ? "" : ",") + s;
  return out;
}

std::string bool_text(bool b) { return b ? "true" : "false"; }

struct Key {
  std::string_view name;
  std::string_view help;
  std::function<void(RunConfig&, std::string_view)> set;
  std::function<std::string(const RunConfig&)> get;
};

#define VOLEST_STRING_KEY(name, field, help)                                                \
  Key {                                                                                    \
    name, help, [](RunConfig& c, std::string_view v) { c.field = std::string(v); },        \
        [](const RunConfig& c) { return c.field; }                                         \
  }
#define VOLEST_REAL_KEY(name, field, help)                                                 \
  Key {                                                                                    \
    name, help, [](RunConfig& c, std::string_view v) { c.field = parse_real(name, v); },   \
        [](const RunConfig& c) { return csv::format_double(c.field); }                     \
  }
#define VOLEST_SIZE_KEY(name, field, help)                                                               \
  Key {                                                                                                  \
    name, help, [](RunConfig& c, std::string_view v) { c.field = parse_integer<std::size_t>(name, v); }, \
        [](const RunConfig& c) { return std::to_string(c.field); }                                       \
  }

const std::vector<Key>& keys() {
  static const std::vector<Key> table{
      VOLEST_STRING_KEY("observations", observations, "observations CSV (train, predict, cv, compare, quintiles, study)"),
      VOLEST_STRING_KEY("stations", stations, "stations CSV"),
      VOLEST_STRING_KEY("holidays", holidays, "holiday list, one YYYY-MM-DD,name per line (optional)"),
      VOLEST_STRING_KEY("capacity_table", capacity_table, "per-lane capacity CSV (optional, built-in table otherwise)"),
      VOLEST_STRING_KEY("model", model, "model file read by predict"),
      VOLEST_STRING_KEY("out_dir", out_dir, "parent directory of run directories"),
      Key{"seed", "base random seed (required)",
          [](RunConfig& c, std::string_view v) { c.seed = parse_integer<std::uint64_t>("seed", v); },
          [](const RunConfig& c) { return c.seed ? std::to_string(*c.seed) : std::string(); }},
      VOLEST_SIZE_KEY("jobs", jobs, "folds trained at the same time"),
      Key{"method", "ann | ann_nobn | profile | linreg | knn | ensemble",
          [](RunConfig& c, std::string_view v) { c.method = harness::parse_method(v); },
          [](const RunConfig& c) { return std::string(harness::to_string(c.method)); }},
      Key{"method_b", "second method for compare and quintiles",
          [](RunConfig& c, std::string_view v) { c.method_b = harness::parse_method(v); },
          [](const RunConfig& c) { return std::string(harness::to_string(c.method_b)); }},
      Key{"quintile_key", "probes | penetration",
          [](RunConfig& c, std::string_view v) { c.quintile_key = harness::parse_quintile_key(v); },
          [](const RunConfig& c) { return std::string(harness::to_string(c.quintile_key)); }},
      Key{"study", "overfit | dropout", [](RunConfig& c, std::string_view v) { c.study = parse_study(v); },
          [](const RunConfig& c) { return std::string(to_string(c.study)); }},
      Key{"validation_stations", "comma-separated stations for the overfit study",
          [](RunConfig& c, std::string_view v) { c.validation_stations = parse_list(v); },
          [](const RunConfig& c) { return join(c.validation_stations); }},
      Key{"hidden", "hidden layer widths, comma-separated",
          [](RunConfig& c, std::string_view v) {
            std::vector<std::size_t> dims;
            for (const auto& p : parse_list(v)) dims.push_back(parse_integer<std::size_t>("hidden", p));
            if (dims.empty()) throw ConfigError("hidden: at least one layer is required");
            c.ann.hidden = dims;
          },
          [](const RunConfig& c) {
            std::vector<std::string> s;
            for (auto d : c.ann.hidden) s.push_back(std::to_string(d));
            return join(s);
          }},
      Key{"batchnorm", "batch normalization in hidden layers (ann method)",
          [](RunConfig& c, std::string_view v) { c.ann.batchnorm = parse_bool("batchnorm", v); },
          [](const RunConfig& c) { return bool_text(c.ann.batchnorm); }},
      VOLEST_REAL_KEY("keep_prob", ann.keep_prob, "dropout keep probability of hidden units, (0, 1]"),
      VOLEST_REAL_KEY("elu_alpha", ann.elu_alpha, "ELU alpha"),
      VOLEST_SIZE_KEY("epochs", ann.epochs, "training epochs"),
      VOLEST_SIZE_KEY("batch_size", ann.batch_size, "minibatch size"),
      VOLEST_REAL_KEY("learning_rate", ann.adam.learning_rate, "Adam step size"),
      VOLEST_REAL_KEY("beta1", ann.adam.beta1, "Adam first-moment decay"),
      VOLEST_REAL_KEY("beta2", ann.adam.beta2, "Adam second-moment decay"),
      VOLEST_REAL_KEY("adam_epsilon", ann.adam.epsilon, "Adam denominator offset"),
      VOLEST_SIZE_KEY("knn_k", knn_k, "neighbours for the knn method"),
      Key{"profile_source", "derived (from training stations) | column (profile_estimate in the CSV)",
          [](RunConfig& c, std::string_view v) { c.profile_source = harness::parse_profile_source(v); },
          [](const RunConfig& c) { return std::string(harness::to_string(c.profile_source)); }},
      Key{"gen.stations", "generate: number of stations",
          [](RunConfig& c, std::string_view v) { c.generator.n_stations = parse_integer<int>("gen.stations", v); },
          [](const RunConfig& c) { return std::to_string(c.generator.n_stations); }},
      Key{"gen.days", "generate: days of hourly data",
          [](RunConfig& c, std::string_view v) { c.generator.days = parse_integer<int>("gen.days", v); },
          [](const RunConfig& c) { return std::to_string(c.generator.days); }},
      Key{"gen.start_date", "generate: first day, YYYY-MM-DD",
          [](RunConfig& c, std::string_view v) {
            c.generator.start_date = rethrow_as_config([&] { return Timestamp::parse_date(v); });
          },
          [](const RunConfig& c) { return format_date(c.generator.start_date); }},
      VOLEST_REAL_KEY("gen.penetration_min", generator.penetration_min, "generate: lowest probe penetration"),
      VOLEST_REAL_KEY("gen.penetration_max", generator.penetration_max, "generate: highest probe penetration"),
      Key{"gen.class_shares", "generate: light,medium,heavy vehicle shares",
          [](RunConfig& c, std::string_view v) {
            const auto parts = parse_list(v);
            if (parts.size() != 3) throw ConfigError("gen.class_shares: expected three values");
            for (std::size_t i = 0; i < 3; ++i) c.generator.class_shares[i] = parse_real("gen.class_shares", parts[i]);
          },
          [](const RunConfig& c) {
            std::vector<std::string> s;
            for (double x : c.generator.class_shares) s.push_back(csv::format_double(x));
            return join(s);
          }},
      VOLEST_REAL_KEY("gen.aadt_error_sigma", generator.aadt_error_sigma,
                      "generate: log-sd of published AADT around the truth"),
      VOLEST_REAL_KEY("gen.daily_noise_sigma", generator.daily_noise_sigma, "generate: log-sd of daily demand"),
      VOLEST_REAL_KEY("gen.daily_persistence", generator.daily_persistence,
                      "generate: lag-one correlation of daily demand"),
      VOLEST_REAL_KEY("gen.hourly_noise_sigma", generator.hourly_noise_sigma, "generate: log-sd of hourly demand"),
      VOLEST_REAL_KEY("gen.incident_rate", generator.incident_rate, "generate: incident chance per carriageway-day"),
      VOLEST_REAL_KEY("gen.event_rate", generator.event_rate, "generate: demand surge chance per carriageway-day"),
      VOLEST_REAL_KEY("gen.speed_noise_sd", generator.speed_noise_sd, "generate: speed noise, mi/h"),
      VOLEST_REAL_KEY("gen.weather_persistence", generator.weather_persistence,
                      "generate: chance the weather carries over an hour"),
      VOLEST_REAL_KEY("gen.adverse_weather_min", generator.adverse_weather_min,
                      "generate: lowest weather volume multiplier"),
      VOLEST_REAL_KEY("gen.holiday_factor", generator.holiday_factor, "generate: holiday volume multiplier"),
  };
  return table;
}

#undef VOLEST_STRING_KEY
#undef VOLEST_REAL_KEY
#undef VOLEST_SIZE_KEY

// Settings that cannot change any output; left out of run records so that
// reruns with a different job count or output location match byte for byte.
bool shapes_results(const Key& k) { return k.name != "jobs" && k.name != "out_dir"; }

void require_file(std::string_view key, const std::string& path) {
  if (path.empty()) throw ConfigError(fmt::format("{} is required", key));
  if (!fs::is_regular_file(path)) throw IoError(fmt::format("{}: cannot find file {}", key, path));
}

Dataset load(const RunConfig& cfg) { return load_dataset(cfg.observations, cfg.stations, cfg.holidays); }

harness::CvConfig cv_config(const RunConfig& cfg, harness::Method method) {
  harness::CvConfig c;
  c.method = method;
  c.ann = cfg.ann;
  c.knn_k = cfg.knn_k;
  c.profile_source = cfg.profile_source;
  if (!cfg.capacity_table.empty()) c.capacity = metrics::CapacityTable::load(cfg.capacity_table);
  c.seed = *cfg.seed;
  c.jobs = cfg.jobs;
  return c;
}

fs::path prepare(const RunConfig& cfg, Command command) {
  const auto dir = run_directory(cfg, command);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError(fmt::format("cannot create run directory {}: {}", dir.string(), ec.message()));
  std::string text;
  for (const auto& k : keys())
    if (shapes_results(k)) text += fmt::format("{} = {}\n", k.name, k.get(cfg));
  csv::write_text((dir / "config.txt").string(), text);
  return dir;
}

std::string path_in(const fs::path& dir, const std::string& name) { return (dir / name).string(); }

harness::MethodResults cross_validate(const Dataset& ds, const RunConfig& cfg, harness::Method m) {
  return {std::string(harness::to_string(m)), harness::run_cv(ds, cv_config(cfg, m))};
}

void write_method_files(const fs::path& dir, const harness::MethodResults& r, const std::string& suffix) {
  csv::write_text(path_in(dir, "metrics" + suffix + ".csv"), report::metrics_csv(r.folds));
  csv::write_text(path_in(dir, "predictions" + suffix + ".csv"), report::predictions_csv(r.folds));
  for (const auto& f : r.folds)
    if (f.history.size() > 0) {
      fs::create_directories(dir / ("loss" + suffix));
      csv::write_text(path_in(dir / ("loss" + suffix), fmt::format("fold{:03}-{}.csv", f.fold_index, f.test_station)),
                      report::loss_csv(f.history));
    }
}

report::Json config_json(const RunConfig& cfg) {
  report::Json j = report::Json::object();
  for (const auto& k : keys())
    if (shapes_results(k)) j[std::string(k.name)] = k.get(cfg);
  return j;
}

}  // namespace

std::string_view to_string(Command c) {
  for (const auto& [n, v] : kCommands)
    if (v == c) return n;
  return "?";
}

Command parse_command(std::string_view s) {
  for (const auto& [n, v] : kCommands)
    if (n == s) return v;
  throw ConfigError(fmt::format("unknown command '{}'", s));
}

std::string_view to_string(Study s) { return s == Study::Overfit ? "overfit" : "dropout"; }

Study parse_study(std::string_view s) {
  for (const auto& [n, v] : kStudies)
    if (n == s) return v;
  throw ConfigError(fmt::format("unknown study '{}' (expected overfit or dropout)", s));
}

std::vector<KeyInfo> config_keys() {
  std::vector<KeyInfo> out;
  for (const auto& k : keys()) out.push_back({k.name, k.help});
  return out;
}

void set(RunConfig& cfg, std::string_view key, std::string_view value) {
  const auto& table = keys();
  const auto it = std::find_if(table.begin(), table.end(), [&](const Key& k) { return k.name == key; });
  if (it == table.end()) throw ConfigError(fmt::format("unknown setting '{}'", key));
  it->set(cfg, trim(value));
}

void load_config_file(RunConfig& cfg, const std::string& path) {
  const auto lines = csv::read_lines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    auto line = std::string_view(lines[i]);
    line = line.substr(0, line.find('#'));
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError(fmt::format("{}:{}: expected key = value", path, i + 1));
    try {
      set(cfg, trim(line.substr(0, eq)), line.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError(fmt::format("{}:{}: {}", path, i + 1, e.what()));
    }
  }
}

std::string describe(const RunConfig& cfg) {
  std::string out;
  for (const auto& k : keys()) out += fmt::format("{} = {}\n", k.name, k.get(cfg));
  return out;
}

void validate(const RunConfig& cfg, Command command) {
  if (!cfg.seed) throw ConfigError("seed is required");
  if (cfg.jobs < 1) throw ConfigError("jobs must be at least 1");
  if (cfg.out_dir.empty()) throw ConfigError("out_dir is required");
  if (command == Command::Generate) {
    auto g = cfg.generator;
    g.seed = *cfg.seed;
    g.validate();
    return;
  }
  require_file("observations", cfg.observations);
  require_file("stations", cfg.stations);
  if (!cfg.holidays.empty()) require_file("holidays", cfg.holidays);
  if (!cfg.capacity_table.empty()) require_file("capacity_table", cfg.capacity_table);
  if (command == Command::Predict) {
    require_file("model", cfg.model);
    return;
  }
  const auto uses = [&](harness::Method m) {
    return cfg.method == m || ((command == Command::Compare || command == Command::Quintiles) && cfg.method_b == m);
  };
  if (command == Command::Train || command == Command::Study || uses(harness::Method::Ann) ||
      uses(harness::Method::AnnNoBn) || uses(harness::Method::Ensemble)) {
    nn::LayerSpec spec;
    spec.input_dim = layout::kWidth;
    spec.hidden_dims = cfg.ann.hidden;
    spec.keep_prob = cfg.ann.keep_prob;
    spec.activation = nn::Activation::elu(cfg.ann.elu_alpha);
    rethrow_as_config([&] {
      spec.validate();
      return 0;
    });
    if (cfg.ann.epochs < 1) throw ConfigError("epochs must be at least 1");
    if (cfg.ann.batch_size < 1) throw ConfigError("batch_size must be at least 1");
    if (!(cfg.ann.adam.learning_rate > 0)) throw ConfigError("learning_rate must be positive");
    if (!(cfg.ann.adam.beta1 >= 0 && cfg.ann.adam.beta1 < 1 && cfg.ann.adam.beta2 >= 0 && cfg.ann.adam.beta2 < 1))
      throw ConfigError("beta1 and beta2 must lie in [0, 1)");
    if (!(cfg.ann.adam.epsilon > 0)) throw ConfigError("adam_epsilon must be positive");
  }
  if (uses(harness::Method::Knn) && cfg.knn_k < 1) throw ConfigError("knn_k must be at least 1");
  if (command == Command::Train && cfg.method != harness::Method::Ann && cfg.method != harness::Method::AnnNoBn)
    throw ConfigError("train supports the ann and ann_nobn methods");
  if (command == Command::Compare && cfg.method == cfg.method_b)
    throw ConfigError("compare needs two different methods");
  if (command == Command::Study) {
    if (cfg.method != harness::Method::Ann && cfg.method != harness::Method::AnnNoBn)
      throw ConfigError("the studies need the ann or ann_nobn method");
    if (cfg.study == Study::Overfit && cfg.validation_stations.empty())
      throw ConfigError("the overfit study needs validation_stations");
    if (cfg.study == Study::Dropout && !(cfg.ann.keep_prob < 1.0))
      throw ConfigError("the dropout study needs keep_prob < 1");
  }
}

fs::path run_directory(const RunConfig& cfg, Command command) {
  const auto seed = cfg.seed ? std::to_string(*cfg.seed) : std::string("none");
  std::string name;
  switch (command) {
    case Command::Generate:
    case Command::Predict: name = fmt::format("{}-seed{}", to_string(command), seed); break;
    case Command::Train:
    case Command::Cv: name = fmt::format("{}-{}-seed{}", to_string(command), harness::to_string(cfg.method), seed); break;
    case Command::Compare:
      name = fmt::format("compare-{}-vs-{}-seed{}", harness::to_string(cfg.method), harness::to_string(cfg.method_b),
                         seed);
      break;
    case Command::Quintiles:
      name = fmt::format("quintiles-{}-seed{}", harness::to_string(cfg.quintile_key), seed);
      break;
    case Command::Study: name = fmt::format("study-{}-seed{}", to_string(cfg.study), seed); break;
  }
  return fs::path(cfg.out_dir) / name;
}

fs::path cmd_generate(const RunConfig& cfg) {
  validate(cfg, Command::Generate);
  auto g = cfg.generator;
  g.seed = *cfg.seed;
  const auto world = synth::generate_world(g);
  const auto dir = prepare(cfg, Command::Generate);
  synth::export_world(world, dir);
  return dir;
}

fs::path cmd_train(const RunConfig& cfg) {
  validate(cfg, Command::Train);
  const auto ds = load(cfg);
  if (!ds.has_targets()) throw DataError("training needs target_volume on every observation");
  auto encoded = harness::encode_all(ds);
  std::optional<baselines::ProfileFactors> profile;
  if (cfg.profile_source == harness::ProfileSource::Derived) {
    profile = baselines::derive_profile_factors(ds.observations, ds.stations);
    for (std::size_t i = 0; i < encoded.size(); ++i) {
      const auto& o = ds.observations[i];
      encoded[i].values[layout::kProfile] = profile->estimate(ds.meta(o.station_id, o.direction).aadt, o.timestamp);
    }
  }
  RowMatrix x(static_cast<Eigen::Index>(encoded.size()), static_cast<Eigen::Index>(layout::kWidth));
  std::vector<double> y;
  for (std::size_t i = 0; i < encoded.size(); ++i) {
    for (std::size_t c = 0; c < layout::kWidth; ++c)
      x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = encoded[i].values[c];
    y.push_back(*ds.observations[i].target_volume);
  }
  auto settings = cfg.ann;
  settings.batchnorm = settings.batchnorm && cfg.method == harness::Method::Ann;
  nn::LossHistory history;
  auto model = harness::fit_ann(x, y, settings, *cfg.seed, RowMatrix(0, x.cols()), {}, &history);
  model.profile = profile;

  const auto dir = prepare(cfg, Command::Train);
  save_model(path_in(dir, "model.json"), model);
  csv::write_text(path_in(dir, "loss_history.csv"), report::loss_csv(history));
  if (profile) baselines::write_profile_factors(path_in(dir, "profile_factors.csv"), *profile);
  return dir;
}

fs::path cmd_predict(const RunConfig& cfg) {
  validate(cfg, Command::Predict);
  const auto model = load_model(cfg.model);
  const auto ds = load(cfg);
  const auto encoded = harness::encode_all(ds);
  RowMatrix x(static_cast<Eigen::Index>(encoded.size()), static_cast<Eigen::Index>(layout::kWidth));
  for (std::size_t i = 0; i < encoded.size(); ++i) {
    const auto& o = ds.observations[i];
    for (std::size_t c = 0; c < layout::kWidth; ++c)
      x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = encoded[i].values[c];
    if (model.profile)
      x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(layout::kProfile)) =
          model.profile->estimate(ds.meta(o.station_id, o.direction).aadt, o.timestamp);
  }
  const auto predicted = model.predict(x);
  std::string out = "station_id,direction,timestamp,predicted\n";
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const auto& o = ds.observations[i];
    out += fmt::format("{},{},{},{}\n", o.station_id, to_string(o.direction), o.timestamp.to_string(),
                       csv::format_double(predicted[i]));
  }
  const auto dir = prepare(cfg, Command::Predict);
  csv::write_text(path_in(dir, "predictions.csv"), out);
  return dir;
}

fs::path cmd_cv(const RunConfig& cfg) {
  validate(cfg, Command::Cv);
  const auto ds = load(cfg);
  const auto r = cross_validate(ds, cfg, cfg.method);
  const auto summary = harness::summarize(r);

  const auto dir = prepare(cfg, Command::Cv);
  report::Json j{{"command", "cv"}, {"config", config_json(cfg)}, {"summary", report::summary_json(summary)}};
  j["results"] = report::folds_json(r);
  report::write_json(path_in(dir, "report.json"), j);
  csv::write_text(path_in(dir, "summary.txt"), report::summary_text({summary}));
  csv::write_text(path_in(dir, "long.csv"), report::long_csv({&r}));
  write_method_files(dir, r, "");
  return dir;
}

fs::path cmd_compare(const RunConfig& cfg) {
  validate(cfg, Command::Compare);
  const auto ds = load(cfg);
  const auto a = cross_validate(ds, cfg, cfg.method);
  const auto b = cross_validate(ds, cfg, cfg.method_b);
  const auto sa = harness::summarize(a), sb = harness::summarize(b);
  const auto cmp = harness::compare_methods(a, b);

  const auto dir = prepare(cfg, Command::Compare);
  report::Json j{{"command", "compare"},
                 {"config", config_json(cfg)},
                 {"summaries", {report::summary_json(sa), report::summary_json(sb)}},
                 {"comparison", report::comparison_json(cmp)}};
  j["results"] = {report::folds_json(a), report::folds_json(b)};
  report::write_json(path_in(dir, "report.json"), j);
  csv::write_text(path_in(dir, "summary.txt"), report::summary_text({sa, sb}) + "\n" + report::comparison_text(cmp));
  csv::write_text(path_in(dir, "long.csv"), report::long_csv({&a, &b}));
  write_method_files(dir, a, "-" + a.name);
  write_method_files(dir, b, "-" + b.name);
  return dir;
}

fs::path cmd_quintiles(const RunConfig& cfg) {
  validate(cfg, Command::Quintiles);
  const auto ds = load(cfg);
  std::vector<harness::MethodResults> methods{cross_validate(ds, cfg, cfg.method)};
  if (cfg.method_b != cfg.method) methods.push_back(cross_validate(ds, cfg, cfg.method_b));
  const auto q = harness::quintile_analysis(methods, cfg.quintile_key);

  const auto dir = prepare(cfg, Command::Quintiles);
  report::Json j{{"command", "quintiles"}, {"config", config_json(cfg)}, {"quintiles", report::quintile_json(q)}};
  std::vector<const harness::MethodResults*> ptrs;
  for (const auto& m : methods) {
    j["results"].push_back(report::folds_json(m));
    ptrs.push_back(&m);
  }
  report::write_json(path_in(dir, "report.json"), j);
  csv::write_text(path_in(dir, "quintiles.txt"), report::quintile_text(q));
  csv::write_text(path_in(dir, "long.csv"), report::long_csv(ptrs));
  for (const auto& m : methods) csv::write_text(path_in(dir, "metrics-" + m.name + ".csv"), report::metrics_csv(m.folds));
  return dir;
}

fs::path cmd_study(const RunConfig& cfg) {
  validate(cfg, Command::Study);
  const auto ds = load(cfg);
  const auto cv = cv_config(cfg, cfg.method);
  report::Json j{{"command", "study"}, {"study", to_string(cfg.study)}, {"config", config_json(cfg)}};
  if (cfg.study == Study::Overfit) {
    const auto curves = harness::overfit_study(ds, cv, cfg.validation_stations);
    const auto dir = prepare(cfg, Command::Study);
    j["curves"] = report::overfit_json(curves);
    report::write_json(path_in(dir, "report.json"), j);
    csv::write_text(path_in(dir, "summary.txt"), report::overfit_text(curves));
    for (const auto& c : curves) csv::write_text(path_in(dir, "loss-" + c.station + ".csv"), report::loss_csv(c.history));
    return dir;
  }
  const auto study = harness::dropout_study(ds, cv);
  const auto dir = prepare(cfg, Command::Study);
  j["dropout"] = report::dropout_json(study);
  harness::MethodResults with{"with_dropout", study.with_dropout.folds};
  harness::MethodResults without{"without_dropout", study.without_dropout.folds};
  j["results"] = {report::folds_json(with), report::folds_json(without)};
  report::write_json(path_in(dir, "report.json"), j);
  csv::write_text(path_in(dir, "summary.txt"), report::dropout_text(study));
  csv::write_text(path_in(dir, "long.csv"), report::long_csv({&with, &without}));
  return dir;
}

fs::path run(const RunConfig& cfg, Command command) {
  switch (command) {
    case Command::Generate: return cmd_generate(cfg);
    case Command::Train: return cmd_train(cfg);
    case Command::Predict: return cmd_predict(cfg);
    case Command::Cv: return cmd_cv(cfg);
    case Command::Compare: return cmd_compare(cfg);
    case Command::Quintiles: return cmd_quintiles(cfg);
    case Command::Study: return cmd_study(cfg);
  }
  throw ConfigError("unknown command");
}

}  // namespace volest::workflows
