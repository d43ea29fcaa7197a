#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "volest/csv.hpp"
#include "volest/error.hpp"
#include "volest/model_io.hpp"
#include "volest/workflows.hpp"

using namespace volest;
using namespace volest::workflows;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("volest_workflows_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// A generated dataset shared by the end-to-end cases.
const fs::path& dataset_dir() {
  static const fs::path dir = [] {
    RunConfig g;
    g.seed = 9;
    g.out_dir = scratch("data").string();
    set(g, "gen.stations", "3");
    set(g, "gen.days", "14");
    return cmd_generate(g);
  }();
  return dir;
}

RunConfig base_config(const std::string& out) {
  RunConfig c;
  c.seed = 21;
  c.observations = (dataset_dir() / "observations.csv").string();
  c.stations = (dataset_dir() / "stations.csv").string();
  c.holidays = (dataset_dir() / "holidays.txt").string();
  c.out_dir = scratch(out).string();
  set(c, "hidden", "8,8");
  set(c, "epochs", "2");
  set(c, "batch_size", "64");
  return c;
}

std::string slurp(const fs::path& p) { return csv::read_text(p.string()); }

}  // namespace

TEST_CASE("settings") {
  RunConfig c;
  set(c, "method", "knn");
  set(c, "hidden", " 16, 8 ");
  set(c, "keep_prob", "0.75");
  set(c, "batchnorm", "false");
  set(c, "validation_stations", "ATR001,ATR003");
  CHECK(c.method == harness::Method::Knn);
  CHECK(c.ann.hidden == std::vector<std::size_t>{16, 8});
  CHECK(c.ann.keep_prob == 0.75);
  CHECK_FALSE(c.ann.batchnorm);
  CHECK(c.validation_stations.size() == 2);

  CHECK_THROWS_AS(set(c, "no_such_key", "1"), ConfigError);
  CHECK_THROWS_AS(set(c, "epochs", "-3"), ConfigError);
  CHECK_THROWS_AS(set(c, "keep_prob", "half"), ConfigError);
  CHECK_THROWS_AS(set(c, "method", "forest"), ConfigError);
  CHECK_THROWS_AS(set(c, "gen.start_date", "2016-13-01"), ConfigError);

  SUBCASE("config file and canonical text") {
    const auto dir = scratch("settings");
    const auto path = (dir / "run.conf").string();
    std::ofstream(path) << "# desk run\nseed = 5   # fixed\n\nepochs=3\nmethod = linreg\n";
    RunConfig f;
    load_config_file(f, path);
    CHECK(f.seed == 5u);
    CHECK(f.ann.epochs == 3);
    CHECK(f.method == harness::Method::LinReg);

    std::ofstream(dir / "again.conf") << describe(f);
    RunConfig g;
    load_config_file(g, (dir / "again.conf").string());
    CHECK(describe(g) == describe(f));

    std::ofstream(path) << "epochs 3\n";
    CHECK_THROWS_AS(load_config_file(f, path), ConfigError);
    CHECK_THROWS_AS(load_config_file(f, (dir / "missing.conf").string()), IoError);
  }
}

TEST_CASE("validation") {
  RunConfig c;
  CHECK_THROWS_AS(validate(c, Command::Generate), ConfigError);
  c.seed = 1;
  CHECK_NOTHROW(validate(c, Command::Generate));
  CHECK_THROWS_AS(validate(c, Command::Cv), ConfigError);
  c.observations = "/nonexistent/observations.csv";
  c.stations = "/nonexistent/stations.csv";
  CHECK_THROWS_AS(validate(c, Command::Cv), IoError);

  auto ok = base_config("validation");
  CHECK_NOTHROW(validate(ok, Command::Cv));
  ok.method = harness::Method::Profile;
  CHECK_THROWS_AS(validate(ok, Command::Train), ConfigError);
  ok.method_b = harness::Method::Profile;
  CHECK_THROWS_AS(validate(ok, Command::Compare), ConfigError);
  auto bad = base_config("validation");
  set(bad, "keep_prob", "0");
  CHECK_THROWS_AS(validate(bad, Command::Cv), ConfigError);
  bad = base_config("validation");
  set(bad, "study", "overfit");
  CHECK_THROWS_AS(validate(bad, Command::Study), ConfigError);
}

TEST_CASE("run directories are named by command and seed") {
  RunConfig c;
  c.seed = 4;
  c.out_dir = "out";
  CHECK(run_directory(c, Command::Generate) == fs::path("out/generate-seed4"));
  CHECK(run_directory(c, Command::Cv) == fs::path("out/cv-ann-seed4"));
  c.method = harness::Method::Profile;
  c.method_b = harness::Method::LinReg;
  CHECK(run_directory(c, Command::Compare) == fs::path("out/compare-profile-vs-linreg-seed4"));
  CHECK(run_directory(c, Command::Quintiles) == fs::path("out/quintiles-probes-seed4"));
  CHECK(run_directory(c, Command::Study) == fs::path("out/study-dropout-seed4"));
}

TEST_CASE("generate writes a loadable dataset") {
  const auto& dir = dataset_dir();
  for (const char* f : {"observations.csv", "stations.csv", "holidays.txt", "truth.csv", "config.txt"})
    CHECK(fs::exists(dir / f));
  const auto ds = load_dataset((dir / "observations.csv").string(), (dir / "stations.csv").string(),
                               (dir / "holidays.txt").string());
  CHECK(ds.observations.size() == 3u * 2 * 24 * 14);
}

TEST_CASE("cv reports are reproducible") {
  auto c = base_config("cv");
  const auto dir = cmd_cv(c);
  for (const char* f : {"report.json", "summary.txt", "metrics.csv", "predictions.csv", "long.csv", "config.txt"})
    CHECK(fs::exists(dir / f));
  CHECK(fs::is_directory(dir / "loss"));
  const auto first = slurp(dir / "report.json");
  const auto preds = slurp(dir / "predictions.csv");

  cmd_cv(c);
  CHECK(slurp(dir / "report.json") == first);

  c.jobs = 3;
  c.out_dir = scratch("cv_jobs").string();
  const auto other = cmd_cv(c);
  CHECK(slurp(other / "report.json") == first);
  CHECK(slurp(other / "predictions.csv") == preds);

  c.method = harness::Method::Profile;
  c.model = "/nonexistent/model.json";
  CHECK(fs::exists(cmd_cv(c) / "report.json"));
}

TEST_CASE("train then predict") {
  auto c = base_config("train");
  const auto dir = cmd_train(c);
  CHECK(fs::exists(dir / "loss_history.csv"));
  CHECK(fs::exists(dir / "profile_factors.csv"));
  const auto model = load_model((dir / "model.json").string());
  REQUIRE(model.profile);

  c.model = (dir / "model.json").string();
  const auto pdir = cmd_predict(c);
  const auto lines = csv::read_lines((pdir / "predictions.csv").string());
  CHECK(lines.front() == "station_id,direction,timestamp,predicted");
  CHECK(lines.size() == 1 + 3u * 2 * 24 * 14);
  for (std::size_t i = 1; i < lines.size(); i += 97)
    CHECK(csv::parse_double(csv::split(lines[i]).back(), "predicted") >= 0.0);

  // unlabelled observations score identically
  const auto ds = load_dataset(c.observations, c.stations, c.holidays);
  const auto unlabelled = (fs::path(c.out_dir) / "unlabelled.csv").string();
  write_observations(unlabelled, ds.observations, false);
  auto u = c;
  u.observations = unlabelled;
  u.out_dir = scratch("predict_unlabelled").string();
  CHECK(slurp(cmd_predict(u) / "predictions.csv") == slurp(pdir / "predictions.csv"));

  auto broken = c;
  std::ofstream(fs::path(c.out_dir) / "broken.json") << "{\"format\": \"volest-model\", \"version\": 1, \"spec\"";
  broken.model = (fs::path(c.out_dir) / "broken.json").string();
  CHECK_THROWS_AS(cmd_predict(broken), ModelTruncatedError);
}

TEST_CASE("compare, quintiles and studies") {
  auto c = base_config("analyses");
  c.method = harness::Method::LinReg;
  c.method_b = harness::Method::Profile;
  const auto cdir = cmd_compare(c);
  CHECK(slurp(cdir / "summary.txt").find("Wilcoxon") != std::string::npos);
  const auto long_csv = csv::read_lines((cdir / "long.csv").string());
  CHECK(long_csv.front() == "carriageway,measure,method,value");
  CHECK(long_csv.size() == 1 + 2 * 6 * 4u);

  const auto qdir = cmd_quintiles(c);
  CHECK(slurp(qdir / "quintiles.txt").find("probes") != std::string::npos);

  c.method = harness::Method::Ann;
  set(c, "keep_prob", "0.5");
  const auto ddir = cmd_study(c);
  CHECK(slurp(ddir / "summary.txt").find("without dropout") != std::string::npos);

  set(c, "study", "overfit");
  set(c, "validation_stations", "ATR002");
  set(c, "epochs", "4");
  const auto odir = cmd_study(c);
  const auto curve = csv::read_lines((odir / "loss-ATR002.csv").string());
  CHECK(curve.size() == 5);
  CHECK(curve.front() == "epoch,train_mae,validation_mae");
}
