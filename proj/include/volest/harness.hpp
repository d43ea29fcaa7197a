#pragma once

// Leave-one-station-out cross-validation and the analyses built on it.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "volest/baselines.hpp"
#include "volest/dataset.hpp"
#include "volest/metrics.hpp"
#include "volest/model_io.hpp"
#include "volest/nn.hpp"

namespace volest::harness {

enum class Method { Ann, AnnNoBn, Profile, LinReg, Knn, Ensemble };
std::string_view to_string(Method m);
Method parse_method(std::string_view s);

/// Where the profile column (and the profiling method's estimates) come from.
enum class ProfileSource { Derived, Column };
std::string_view to_string(ProfileSource p);
ProfileSource parse_profile_source(std::string_view s);

struct AnnSettings {
  std::vector<std::size_t> hidden{256, 256, 256};
  bool batchnorm = true;
  double keep_prob = 0.5;
  double elu_alpha = 1.0;
  std::size_t epochs = 200;
  std::size_t batch_size = 256;
  nn::AdamConfig adam;
};

struct CvConfig {
  Method method = Method::Ann;
  AnnSettings ann;
  std::size_t knn_k = 16;
  ProfileSource profile_source = ProfileSource::Derived;
  metrics::CapacityTable capacity = metrics::CapacityTable::standard();
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
  bool keep_params = false;       // keep each fold's trained network in its FoldResult
  bool track_validation = false;  // record held-out loss per epoch (monitoring only)
};

struct Fold {
  std::string test_station;
  std::vector<std::string> train_stations;
};

/// One fold per station, in sorted station order. Throws DataError with fewer than 2 stations.
std::vector<Fold> loso_folds(std::vector<std::string> stations);

/// Seed of fold `index`, derived from the base seed only.
std::uint64_t fold_seed(std::uint64_t base, std::size_t index);

struct CarriagewayResult {
  Carriageway carriageway;
  std::vector<Timestamp> timestamps;
  std::vector<double> actual;
  std::vector<double> predicted;
  metrics::MetricReport metrics;
  double capacity_per_lane = 0.0;
  int lanes = 1;
  double avg_probes = 0.0;   // probes observed per hour
  double penetration = 0.0;  // probes observed per counted vehicle
};

struct FoldResult {
  std::size_t fold_index = 0;
  std::string test_station;
  std::vector<std::string> train_stations;     // stations whose rows were used for fitting
  std::size_t train_rows = 0;
  std::vector<CarriagewayResult> carriageways;  // held-out carriageways, A before B
  nn::LossHistory history;                     // empty for methods without epochs
  std::optional<AnnModel> model;               // with keep_params, ANN methods only
  std::vector<CarriagewayResult> train_fit;    // in-sample results, filled by the dropout study
};

/// Trains the network on raw feature rows: fits the standardizer and the
/// target scaling on these rows only. `validation_*` may be empty.
AnnModel fit_ann(const RowMatrix& x, const std::vector<double>& y, const AnnSettings& settings, std::uint64_t seed,
                 const RowMatrix& validation_x, const std::vector<double>& validation_y, nn::LossHistory* history);

/// Encoded rows for every observation; the profile column holds the CSV value.
std::vector<FeatureVector> encode_all(const Dataset& ds);

FoldResult run_fold(const Dataset& ds, const std::vector<FeatureVector>& encoded, const Fold& fold,
                    std::size_t fold_index, const CvConfig& cfg, bool fit_training_rows = false);
/// Runs all folds, up to cfg.jobs at a time; results are ordered by fold index.
std::vector<FoldResult> run_cv(const Dataset& ds, const CvConfig& cfg);

enum class Measure { R2, Mape, Etcr, Emfr };
inline constexpr std::array<Measure, 4> kMeasures{Measure::R2, Measure::Mape, Measure::Etcr, Measure::Emfr};
std::string_view to_string(Measure m);
double measure_value(const metrics::MetricReport& r, Measure m);

/// Linear interpolation between order statistics. Throws DataError on empty input.
double quantile(std::vector<double> values, double q);

struct FiveNumber {
  double min = 0, q25 = 0, median = 0, q75 = 0, max = 0;
};
FiveNumber five_number(const std::vector<double>& values);

struct SummaryTable {
  std::string method;
  std::size_t n_carriageways = 0;
  std::array<FiveNumber, 4> measures;  // in kMeasures order
};

struct MethodResults {
  std::string name;
  std::vector<FoldResult> folds;
};

/// All held-out carriageways across folds, sorted by label.
std::vector<const CarriagewayResult*> carriageways(const std::vector<FoldResult>& folds);
SummaryTable summarize(const MethodResults& results);

enum class QuintileKey { AvgProbeVolume, PenetrationRate };
std::string_view to_string(QuintileKey k);
QuintileKey parse_quintile_key(std::string_view s);

/// Sizes of `groups` contiguous groups as equal as possible, larger ones first.
std::vector<std::size_t> group_sizes(std::size_t n, std::size_t groups);

struct QuintileGroup {
  std::vector<Carriageway> members;
  double key_min = 0.0, key_max = 0.0;
  std::vector<std::array<double, 4>> medians;  // per method, kMeasures order
};

struct QuintileReport {
  QuintileKey key = QuintileKey::AvgProbeVolume;
  std::vector<std::string> methods;
  std::vector<QuintileGroup> groups;
};

/// Groups carriageways by the key (computed from the first method's results;
/// ties broken by label). Throws DataError with fewer than 5 carriageways and
/// StructuralError when methods cover different carriageways.
QuintileReport quintile_analysis(const std::vector<MethodResults>& methods, QuintileKey key);

struct MeasureTest {
  std::optional<metrics::WilcoxonResult> test;
  std::string note;  // why no test was run
  double median_difference = 0.0;  // median of (A - B)
};

struct Comparison {
  std::string a, b;
  std::size_t n_pairs = 0;
  std::array<MeasureTest, 4> tests;  // kMeasures order
};

/// Paired signed-rank tests on per-carriageway measures. Throws StructuralError on a pairing mismatch.
Comparison compare_methods(const MethodResults& a, const MethodResults& b);

struct LossCurve {
  std::string station;
  nn::LossHistory history;
  double tail_slope = 0.0;  // veh/hr per epoch over the last quarter of the validation curve
  double tail_t = 0.0;
  bool overfit = false;
};

/// Validation curves keep rising over their last quarter: t > 2.5 on the
/// fitted slope and a total rise above 2% of the tail mean.
void assess_tail(LossCurve& curve);

/// Trains the folds holding out each of `stations` with held-out loss tracking.
std::vector<LossCurve> overfit_study(const Dataset& ds, const CvConfig& cfg, const std::vector<std::string>& stations);

struct DropoutArm {
  double keep_prob = 1.0;
  double median_train_mape = 0.0;
  double median_test_mape = 0.0;
  std::vector<FoldResult> folds;
};

struct DropoutStudy {
  DropoutArm with_dropout;
  DropoutArm without_dropout;
};

/// Same folds and seeds, trained once with cfg.ann.keep_prob and once with keep_prob 1.
DropoutStudy dropout_study(const Dataset& ds, const CvConfig& cfg);

}  // namespace volest::harness
