// Command-line front end. Talks to the library only through the C API.

#include <cstdio>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "volest/volest.h"

namespace {

int exit_code(volest_status s) {
  switch (s) {
    case VOLEST_OK: return 0;
    case VOLEST_ERR_CONFIG:
    case VOLEST_ERR_INVALID_ARGUMENT: return 2;
    case VOLEST_ERR_DATA:
    case VOLEST_ERR_MODEL_FORMAT:
    case VOLEST_ERR_MODEL_VERSION:
    case VOLEST_ERR_MODEL_TRUNCATED:
    case VOLEST_ERR_MODEL_SHAPE: return 3;
    case VOLEST_ERR_NUMERIC: return 4;
    case VOLEST_ERR_IO: return 5;
    case VOLEST_ERR_INTERNAL: return 1;
  }
  return 1;
}

std::string settings_help() {
  std::string out = "Settings (config file lines `key = value`, or --set key=value):\n";
  for (std::size_t i = 0; i < volest_config_key_count(); ++i) {
    const char* name = nullptr;
    const char* help = nullptr;
    if (volest_config_key(i, &name, &help) == VOLEST_OK) out += "  " + std::string(name) + "\n      " + help + "\n";
  }
  out += "\nExit codes: 0 ok, 1 internal, 2 configuration, 3 data or model file, 4 numeric, 5 file access.\n";
  return out;
}

// Typed flags are shorthands for settings; they are applied after the
// config file and --set, so flags win.
struct Flag {
  const char* flag;
  const char* key;
  const char* help;
};

const std::vector<Flag> kDataFlags{
    {"--observations", "observations", "observations CSV"},
    {"--stations", "stations", "stations CSV"},
    {"--holidays", "holidays", "holiday list"},
    {"--capacity-table", "capacity_table", "per-lane capacity CSV"},
};
const std::vector<Flag> kModelFlags{
    {"--method", "method", "ann | ann_nobn | profile | linreg | knn | ensemble"},
    {"--hidden", "hidden", "hidden layer widths, e.g. 256,256,256"},
    {"--epochs", "epochs", "training epochs"},
    {"--batch-size", "batch_size", "minibatch size"},
    {"--keep-prob", "keep_prob", "dropout keep probability"},
    {"--learning-rate", "learning_rate", "Adam step size"},
    {"--knn-k", "knn_k", "neighbours for knn"},
    {"--profile-source", "profile_source", "derived | column"},
};

struct Invocation {
  std::string config_file;
  std::vector<std::string> sets;
  std::map<std::string, std::string> flags;  // setting key -> value
};

void add_flags(CLI::App* cmd, Invocation& inv, const std::vector<Flag>& flags) {
  for (const auto& f : flags)
    cmd->add_option_function<std::string>(
        f.flag, [&inv, key = f.key](const std::string& v) { inv.flags[key] = v; }, f.help);
}

CLI::App* add_command(CLI::App& app, const char* name, const char* help, Invocation& inv) {
  auto* cmd = app.add_subcommand(name, help);
  cmd->add_option("--config", inv.config_file, "configuration file")->check(CLI::ExistingFile);
  cmd->add_option("--set", inv.sets, "override one setting, key=value (repeatable)");
  cmd->add_option_function<std::string>(
      "--seed", [&inv](const std::string& v) { inv.flags["seed"] = v; }, "base random seed (required)");
  cmd->add_option_function<std::string>(
      "--jobs", [&inv](const std::string& v) { inv.flags["jobs"] = v; }, "folds run at the same time");
  cmd->add_option_function<std::string>(
      "--out", [&inv](const std::string& v) { inv.flags["out_dir"] = v; }, "parent directory for run directories");
  cmd->footer(settings_help());
  return cmd;
}

int report_failure(volest_status s) {
  std::fprintf(stderr, "volest: %s: %s\n", volest_status_name(s), volest_last_error());
  return exit_code(s);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hourly traffic volume estimation from probe vehicle data"};
  app.require_subcommand(1);
  Invocation inv;

  auto* generate = add_command(app, "generate", "write a synthetic dataset", inv);
  add_flags(generate, inv,
            {{"--n-stations", "gen.stations", "number of stations"}, {"--days", "gen.days", "days of hourly data"}});

  auto* train = add_command(app, "train", "train a network on every station and save it", inv);
  add_flags(train, inv, kDataFlags);
  add_flags(train, inv, kModelFlags);

  auto* predict = add_command(app, "predict", "score observations with a saved model", inv);
  add_flags(predict, inv, kDataFlags);
  add_flags(predict, inv, {{"--model", "model", "model file"}});

  auto* cv = add_command(app, "cv", "leave-one-station-out cross-validation of one method", inv);
  add_flags(cv, inv, kDataFlags);
  add_flags(cv, inv, kModelFlags);

  auto* compare = add_command(app, "compare", "cross-validate two methods and test their differences", inv);
  add_flags(compare, inv, kDataFlags);
  add_flags(compare, inv, kModelFlags);
  add_flags(compare, inv, {{"--method-b", "method_b", "second method"}});

  auto* quintiles = add_command(app, "quintiles", "accuracy by probe volume or penetration quintile", inv);
  add_flags(quintiles, inv, kDataFlags);
  add_flags(quintiles, inv, kModelFlags);
  add_flags(quintiles, inv,
            {{"--method-b", "method_b", "second method"}, {"--key", "quintile_key", "probes | penetration"}});

  auto* study = add_command(app, "study", "overfitting or dropout study", inv);
  add_flags(study, inv, kDataFlags);
  add_flags(study, inv, kModelFlags);
  add_flags(study, inv,
            {{"--which", "study", "overfit | dropout"},
             {"--validation-stations", "validation_stations", "stations for the overfit study"}});

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  volest_config* config = nullptr;
  if (auto s = volest_config_new(&config); s != VOLEST_OK) return report_failure(s);
  const auto finish = [&](volest_status s) {
    volest_config_free(config);
    return s == VOLEST_OK ? 0 : report_failure(s);
  };

  if (!inv.config_file.empty())
    if (auto s = volest_config_load(config, inv.config_file.c_str()); s != VOLEST_OK) return finish(s);
  for (const auto& kv : inv.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      std::fprintf(stderr, "volest: --set expects key=value, got '%s'\n", kv.c_str());
      volest_config_free(config);
      return 2;
    }
    const auto key = kv.substr(0, eq), value = kv.substr(eq + 1);
    if (auto s = volest_config_set(config, key.c_str(), value.c_str()); s != VOLEST_OK) return finish(s);
  }
  for (const auto& [key, value] : inv.flags)
    if (auto s = volest_config_set(config, key.c_str(), value.c_str()); s != VOLEST_OK) return finish(s);

  const auto command = app.get_subcommands().front()->get_name();
  std::vector<char> dir(4096);
  const auto s = volest_run(config, command.c_str(), dir.data(), dir.size());
  if (s == VOLEST_OK) std::printf("%s\n", dir.data());
  return finish(s);
}
