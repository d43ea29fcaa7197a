#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "volest/volest.h"

namespace fs = std::filesystem;

namespace {

struct Config {
  volest_config* ptr = nullptr;
  Config() { REQUIRE(volest_config_new(&ptr) == VOLEST_OK); }
  ~Config() { volest_config_free(ptr); }
  void set(const char* k, const char* v) { REQUIRE(volest_config_set(ptr, k, v) == VOLEST_OK); }
};

std::string run(const Config& c, const char* command) {
  char dir[1024];
  const auto s = volest_run(c.ptr, command, dir, sizeof dir);
  INFO(volest_last_error());
  REQUIRE(s == VOLEST_OK);
  return dir;
}

}  // namespace

TEST_CASE("status names and settings") {
  CHECK(std::string(volest_status_name(VOLEST_OK)) == "ok");
  CHECK(std::string(volest_status_name(VOLEST_ERR_MODEL_TRUNCATED)) == "truncated model file");
  CHECK(volest_config_key_count() > 30);
  const char* name = nullptr;
  const char* help = nullptr;
  REQUIRE(volest_config_key(0, &name, &help) == VOLEST_OK);
  CHECK(std::string(name) == "observations");
  CHECK(volest_config_key(100000, &name, &help) == VOLEST_ERR_INVALID_ARGUMENT);

  Config c;
  CHECK(volest_config_set(c.ptr, "bogus", "1") == VOLEST_ERR_CONFIG);
  CHECK(std::string(volest_last_error()).find("bogus") != std::string::npos);
  CHECK(volest_config_set(nullptr, "seed", "1") == VOLEST_ERR_INVALID_ARGUMENT);
  CHECK(volest_config_load(c.ptr, "/nonexistent/file.conf") == VOLEST_ERR_IO);
  CHECK(volest_run(c.ptr, "generate", nullptr, 0) == VOLEST_ERR_CONFIG);  // no seed
  CHECK(volest_run(c.ptr, "dance", nullptr, 0) == VOLEST_ERR_CONFIG);
}

TEST_CASE("workflow through the C interface") {
  const auto out = fs::temp_directory_path() / "volest_capi";
  fs::remove_all(out);
  Config g;
  g.set("seed", "13");
  g.set("out_dir", out.string().c_str());
  g.set("gen.stations", "3");
  g.set("gen.days", "8");
  const auto data = fs::path(run(g, "generate"));
  CHECK(data.filename() == "generate-seed13");

  Config c;
  c.set("seed", "13");
  c.set("out_dir", out.string().c_str());
  c.set("observations", (data / "observations.csv").string().c_str());
  c.set("stations", (data / "stations.csv").string().c_str());
  c.set("holidays", (data / "holidays.txt").string().c_str());
  c.set("hidden", "6");
  c.set("epochs", "2");
  const auto trained = fs::path(run(c, "train"));
  REQUIRE(fs::exists(trained / "model.json"));

  char tiny[4];
  CHECK(volest_run(c.ptr, "train", tiny, sizeof tiny) == VOLEST_ERR_INVALID_ARGUMENT);
  CHECK(tiny[0] == '\0');

  volest_model* model = nullptr;
  REQUIRE(volest_model_load((trained / "model.json").string().c_str(), &model) == VOLEST_OK);
  CHECK(volest_model_input_dim(model) == 84);
  std::vector<double> rows(2 * 84, 0.5), out_values(2, -1.0);
  CHECK(volest_model_predict(model, rows.data(), 2, 84, out_values.data()) == VOLEST_OK);
  CHECK(out_values[0] >= 0.0);
  CHECK(out_values[0] == out_values[1]);
  CHECK(volest_model_predict(model, rows.data(), 2, 83, out_values.data()) == VOLEST_ERR_INVALID_ARGUMENT);
  volest_model_free(model);

  const auto broken = out / "broken.json";
  std::ofstream(broken) << "{\"format\": \"volest-model\", \"version\": 99}";
  CHECK(volest_model_load(broken.string().c_str(), &model) == VOLEST_ERR_MODEL_VERSION);
  std::ofstream(broken) << "[1, 2, 3]";
  CHECK(volest_model_load(broken.string().c_str(), &model) == VOLEST_ERR_MODEL_FORMAT);
  CHECK(volest_model_load("/nonexistent/model.json", &model) == VOLEST_ERR_IO);
}

TEST_CASE("measures through the C interface") {
  const double actual[] = {100, 200};
  const double predicted[] = {150, 100};
  volest_metrics m{};
  REQUIRE(volest_evaluate(actual, predicted, 2, 2000, 1, &m) == VOLEST_OK);
  CHECK(m.etcr == doctest::Approx(3.75));
  CHECK(m.n_points == 2);
  CHECK(volest_evaluate(actual, predicted, 2, 2000, 0, &m) == VOLEST_ERR_DATA);

  double cap = 0;
  REQUIRE(volest_capacity(65, 0, &cap) == VOLEST_OK);
  CHECK(cap == 2350);
  REQUIRE(volest_capacity(45, 1, &cap) == VOLEST_OK);
  CHECK(cap == 1900);
  CHECK(volest_capacity(65, 7, &cap) == VOLEST_ERR_INVALID_ARGUMENT);

  const double d[] = {1, 2, 3, 4, 5};
  double w = 0, p = 0;
  REQUIRE(volest_wilcoxon(d, 5, &w, &p) == VOLEST_OK);
  CHECK(w == 15);
  CHECK(p == doctest::Approx(0.0625));
  CHECK(volest_wilcoxon(d, 3, &w, &p) == VOLEST_ERR_DATA);
}
