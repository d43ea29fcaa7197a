#pragma once

// End-to-end commands. Each one is a pure function of its input files and
// configuration; outputs land in <out_dir>/<command>[-detail]-seed<seed>/.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "volest/harness.hpp"
#include "volest/synthgen.hpp"

namespace volest::workflows {

enum class Command { Generate, Train, Predict, Cv, Compare, Quintiles, Study };
std::string_view to_string(Command c);
Command parse_command(std::string_view s);

enum class Study { Overfit, Dropout };
std::string_view to_string(Study s);
Study parse_study(std::string_view s);

struct RunConfig {
  std::string observations;  // observations CSV
  std::string stations;      // stations CSV
  std::string holidays;      // holiday list, optional
  std::string capacity_table;  // capacity CSV, optional (built-in table otherwise)
  std::string model;         // model file for predict
  std::string out_dir = "runs";
  std::optional<std::uint64_t> seed;  // mandatory for every command
  std::size_t jobs = 1;

  harness::Method method = harness::Method::Ann;
  harness::Method method_b = harness::Method::Profile;
  harness::QuintileKey quintile_key = harness::QuintileKey::AvgProbeVolume;
  Study study = Study::Dropout;
  std::vector<std::string> validation_stations;

  harness::AnnSettings ann;
  std::size_t knn_k = 16;
  harness::ProfileSource profile_source = harness::ProfileSource::Derived;

  synth::GeneratorConfig generator;  // its seed is taken from `seed`
};

struct KeyInfo {
  std::string_view key;
  std::string_view help;
};
/// Every key accepted by set() and config files, in documentation order.
std::vector<KeyInfo> config_keys();

/// Applies one key=value setting. Throws ConfigError on unknown keys or bad values.
void set(RunConfig& cfg, std::string_view key, std::string_view value);
/// Flat text file: one `key = value` per line, '#' starts a comment. Throws IoError or ConfigError.
void load_config_file(RunConfig& cfg, const std::string& path);
/// Canonical `key = value` text of every setting; loading it back gives the same configuration.
std::string describe(const RunConfig& cfg);

/// Checks what `command` needs: the seed, input files that must exist, option ranges.
/// Throws ConfigError or IoError.
void validate(const RunConfig& cfg, Command command);

std::filesystem::path run_directory(const RunConfig& cfg, Command command);

std::filesystem::path cmd_generate(const RunConfig& cfg);
std::filesystem::path cmd_train(const RunConfig& cfg);
std::filesystem::path cmd_predict(const RunConfig& cfg);
std::filesystem::path cmd_cv(const RunConfig& cfg);
std::filesystem::path cmd_compare(const RunConfig& cfg);
std::filesystem::path cmd_quintiles(const RunConfig& cfg);
std::filesystem::path cmd_study(const RunConfig& cfg);

/// Validates, then dispatches. Returns the run directory.
std::filesystem::path run(const RunConfig& cfg, Command command);

}  // namespace volest::workflows
