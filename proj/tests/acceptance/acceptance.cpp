// Acceptance suite: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include <fmt/format.h>

#include "../oracles.hpp"
#include "../test_data.hpp"
#include "volest/csv.hpp"
#include "volest/harness.hpp"
#include "volest/metrics.hpp"
#include "volest/nn.hpp"
#include "volest/synthgen.hpp"
#include "volest/workflows.hpp"

using namespace volest;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

bool close(double got, double want, double tol = 1e-12) {
  return std::abs(got - want) <= tol * std::max(1.0, std::abs(want));
}

std::size_t worker_count() { return std::max(4u, std::thread::hardware_concurrency()); }

// ---------------------------------------------------------------------------

Outcome gradient_correctness() {
  nn::Rng rng(20240611);
  std::uniform_int_distribution<std::size_t> in_dim(1, 10), hid(1, 8), batch(2, 8);
  std::normal_distribution<double> n01;
  double worst = 0.0;
  std::string shapes;
  for (int net = 0; net < 20; ++net) {
    nn::LayerSpec spec;
    spec.input_dim = in_dim(rng);
    spec.hidden_dims = {hid(rng), hid(rng)};
    spec.activation = nn::Activation::elu(1.0);
    spec.keep_prob = 1.0;
    auto params = nn::initialize(spec, rng);
    for (auto& b : params.trainable.biases)
      for (Eigen::Index i = 0; i < b.size(); ++i) b(i) = 0.3 * n01(rng);
    const auto n = static_cast<Eigen::Index>(batch(rng));
    nn::Matrix x(n, static_cast<Eigen::Index>(spec.input_dim));
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = n01(rng);
    nn::Vector y(n);
    for (Eigen::Index i = 0; i < n; ++i) y(i) = 3.0 * n01(rng);
    const auto loss = net % 2 == 0 ? nn::Loss::Mse : nn::Loss::Mae;

    nn::ForwardCache cache;
    nn::forward(params, spec, x, nn::Mode::Eval, nullptr, &cache);
    const auto analytic = oracle::flatten(nn::backward(params, spec, cache, y, loss));
    const auto numeric = oracle::finite_difference_gradient(params, spec, x, y, nn::Mode::Eval, nullptr, loss, 1e-5);
    // Gradients that are exactly zero (MAE residual signs cancelling) come back
    // from differencing as rounding noise of order eps*|loss|/h ~ 1e-11, so
    // entries below 1e-6 are compared on that absolute scale.
    worst = std::max(worst, oracle::max_relative_error(analytic, numeric, 1e-6));
    if (net < 3) shapes += fmt::format("{}-{}-{}-1 ", spec.input_dim, spec.hidden_dims[0], spec.hidden_dims[1]);
  }
  return {worst < 1e-4, fmt::format("20 networks (e.g. {}), max relative error {:.2e} (< 1e-4)", shapes, worst)};
}

Outcome metric_oracles() {
  using V = std::vector<double>;
  using namespace metrics;
  int checked = 0, failed = 0;
  const auto expect = [&](double got, double want) {
    ++checked;
    if (!close(got, want)) ++failed;
  };
  // R^2 = 1 - SSE/SST, values worked by hand.
  expect(r_squared(V{1, 2, 3, 4}, V{1, 2, 3, 4}), 1.0);
  expect(r_squared(V{1, 2, 3, 4}, V{2.5, 2.5, 2.5, 2.5}), 0.0);
  expect(r_squared(V{1, 2, 3, 4}, V{1.1, 1.9, 3.2, 3.8}), 0.98);  // SSE 0.1, SST 5
  expect(r_squared(V{10, 30, 20}, V{12, 26, 20}), 0.9);           // SSE 20, SST 200
  expect(r_squared(V{0, 10}, V{20, -10}), -15.0);                 // SSE 800, SST 50
  expect(r_squared(V{2, 4, 6, 8}, V{3, 3, 7, 7}), 0.8);           // SSE 4, SST 20
  // MAPE in percent over nonzero targets.
  expect(mape(V{100, 200}, V{110, 180}).percent, 10.0);
  expect(mape(V{0, 100}, V{5, 110}).percent, 10.0);
  expect(mape(V{50, 40}, V{0, 60}).percent, 75.0);
  expect(mape(V{4, 5, 8}, V{5, 5, 6}).percent, 50.0 / 3.0);
  expect(mape(V{20, 80, 200, 400}, V{30, 60, 200, 300}).percent, 25.0);
  expect(mape(V{1000}, V{1000}).percent, 0.0);
  // ETCR: MAE over lanes x per-lane capacity, percent.
  expect(etcr(V{100, 200}, V{150, 100}, 2000, 1), 3.75);
  expect(etcr(V{100, 200}, V{150, 100}, 2000, 2), 1.875);
  expect(etcr(V{100, 200}, V{100, 200}, 2000, 3), 0.0);
  expect(etcr(V{1000, 1500, 2000}, V{1100, 1400, 2300}, 2300, 2), 50000.0 / 13800.0);
  expect(etcr(V{0, 0}, V{23, 23}, 2300, 1), 1.0);
  // EMFR: MAE over the largest observed volume, percent.
  expect(emfr(V{100, 400}, V{150, 350}), 12.5);
  expect(emfr(V{100, 400}, V{100, 400}), 0.0);
  expect(emfr(V{10, 20, 50}, V{20, 20, 40}), 40.0 / 3.0);
  expect(emfr(V{0, 200}, V{100, 200}), 25.0);
  expect(emfr(V{1000}, V{1250}), 25.0);

  // Every defined cell of the per-lane capacity table.
  const double freeway[][2] = {{75, 2400}, {70, 2400}, {65, 2350}, {60, 2300}, {55, 2250}};
  const double multilane[][2] = {{70, 2300}, {65, 2300}, {60, 2200}, {55, 2100}, {50, 2000}, {45, 1900}};
  int cells = 0;
  for (const auto& [s, c] : freeway) {
    ++cells;
    if (capacity_lookup(s, Facility::Freeway) != c) ++failed;
  }
  for (const auto& [s, c] : multilane) {
    ++cells;
    if (capacity_lookup(s, Facility::Multilane) != c) ++failed;
  }
  return {failed == 0, fmt::format("{} metric values and {} capacity cells, {} mismatches", checked, cells, failed)};
}

Outcome feature_schema() {
  std::mt19937_64 rng(31415);
  HolidayCalendar holidays = synth::holidays_between(std::chrono::sys_days{std::chrono::year{2012} / 1 / 1},
                                                     std::chrono::sys_days{std::chrono::year{2020} / 12 / 31});
  int bad = 0;
  const auto sum = [](const FeatureVector& fv, std::size_t start, std::size_t len) {
    double s = 0;
    for (std::size_t i = start; i < start + len; ++i) s += fv.values[i];
    return s;
  };
  for (int i = 0; i < 10000; ++i) {
    const auto meta = testdata::random_meta(rng);
    const auto obs = testdata::random_observation(rng, meta);
    const auto fv = assemble(obs, meta, holidays);
    const bool ok = fv.values.size() == 84 && sum(fv, layout::kWeatherOneHot, kWeatherCategories) == 1.0 &&
                    fv.values[layout::kWeatherNumeric] == obs.temperature &&
                    fv.values[layout::kWeatherNumeric + 1] == obs.visibility &&
                    fv.values[layout::kWeatherNumeric + 2] == obs.precipitation &&
                    sum(fv, layout::kTemporal, 24) == 1.0 && sum(fv, layout::kInfrastructure + 2, 2) == 1.0 &&
                    sum(fv, layout::kInfrastructure + 4, 3) == 1.0;
    if (!ok) ++bad;
  }
  return {bad == 0 && layout::kWidth == 84,
          fmt::format("width {}, 10000 random observations, {} block-sum violations", layout::kWidth, bad)};
}

Outcome loso_isolation() {
  synth::GeneratorConfig g;
  g.n_stations = 5;
  g.days = 21;
  g.seed = 404;
  const auto world = synth::generate_world(g);
  harness::CvConfig cfg;
  cfg.ann.hidden = {16, 16};
  cfg.ann.epochs = 3;
  cfg.ann.batch_size = 128;
  cfg.seed = 77;
  cfg.keep_params = true;
  cfg.track_validation = true;  // held-out loss is recorded, yet must not steer training
  cfg.jobs = worker_count();
  const auto base = harness::run_cv(world.dataset, cfg);

  const auto encoded_base = harness::encode_all(world.dataset);
  const auto folds = harness::loso_folds(world.dataset.station_ids());
  int overlaps = 0, changed = 0;
  for (std::size_t k = 0; k < base.size(); ++k) {
    const auto& f = base[k];
    if (std::find(f.train_stations.begin(), f.train_stations.end(), f.test_station) != f.train_stations.end())
      ++overlaps;
    auto perturbed = world.dataset;
    std::mt19937_64 rng(k);
    std::uniform_real_distribution<double> scale(0.2, 5.0);
    for (auto& o : perturbed.observations)
      if (o.station_id == f.test_station) *o.target_volume = std::round(*o.target_volume * scale(rng));
    const auto again = harness::run_fold(perturbed, encoded_base, folds[k], k, cfg);
    if (!(again.model->params == f.model->params) || !(again.model->standardizer == f.model->standardizer) ||
        again.model->target_mean != f.model->target_mean || again.model->profile != f.model->profile)
      ++changed;
  }
  return {overlaps == 0 && changed == 0,
          fmt::format("{} folds, {} train/test overlaps, {} folds whose parameters moved", base.size(), overlaps,
                      changed)};
}

// ---------------------------------------------------------------------------
// Directional reproduction on the desk-scale world (criteria 5-7).

struct DeskRun {
  synth::SyntheticWorld world;
  harness::MethodResults profile;
  harness::MethodResults ann;
  harness::DropoutStudy dropout;
  double seconds = 0.0;
};

const DeskRun& desk_run() {
  static const DeskRun run = [] {
    const auto t0 = std::chrono::steady_clock::now();
    DeskRun r;
    synth::GeneratorConfig g;
    g.n_stations = 10;
    g.days = 90;
    g.seed = 7;
    r.world = synth::generate_world(g);

    harness::CvConfig cfg;
    cfg.seed = 11;
    cfg.jobs = worker_count();
    cfg.ann.hidden = {64, 64, 64};
    cfg.ann.epochs = 15;
    cfg.ann.batch_size = 256;
    cfg.ann.keep_prob = 0.5;
    cfg.method = harness::Method::Profile;
    r.profile = {"profile", harness::run_cv(r.world.dataset, cfg)};
    cfg.method = harness::Method::Ann;
    // The with-dropout arm is the regular ANN cross-validation (same seeds and
    // folds); the study additionally scores the training rows.
    r.dropout = harness::dropout_study(r.world.dataset, cfg);
    r.ann = {"ann", r.dropout.with_dropout.folds};
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
  }();
  return run;
}

Outcome ann_beats_profile() {
  const auto& r = desk_run();
  const auto sa = harness::summarize(r.ann), sp = harness::summarize(r.profile);
  const double ann = sa.measures[1].median, prof = sp.measures[1].median;
  const double improvement = 1.0 - ann / prof;
  const auto cmp = harness::compare_methods(r.ann, r.profile);
  const auto& t = cmp.tests[1];
  const double p = t.test ? t.test->p_value : 1.0;
  const std::size_t hours = r.world.dataset.observations.size();
  const bool ok = ann < prof && improvement >= 0.10 && t.test && p < 0.05 && sa.n_carriageways == 20;
  return {ok, fmt::format("{} carriageway-hours, {} carriageways: median MAPE ann {:.2f}% vs profile {:.2f}% "
                          "({:.1f}% better, need >= 10%), Wilcoxon p = {:.4f}; ann R2 {:.3f} vs {:.3f}; "
                          "{:.0f} s with {} workers",
                          hours, sa.n_carriageways, ann, prof, 100 * improvement, p, sa.measures[0].median,
                          sp.measures[0].median, r.seconds, worker_count())};
}

Outcome quintile_direction() {
  const auto& r = desk_run();
  double lo = 1, hi = 0;
  for (const auto& t : r.world.truth) {
    lo = std::min(lo, t.penetration);
    hi = std::max(hi, t.penetration);
  }
  const auto q = harness::quintile_analysis({r.ann, r.profile}, harness::QuintileKey::AvgProbeVolume);
  const double low = q.groups.front().medians[0][1], high = q.groups.back().medians[0][1];
  std::string groups;
  for (const auto& g : q.groups) groups += fmt::format(" {:.1f}", g.medians[0][1]);
  const bool spans = lo >= 0.008 && lo < 0.010 && hi <= 0.045 && hi > 0.040;
  return {spans && high < low,
          fmt::format("penetration {:.2f}%..{:.2f}%; ann median MAPE by probe-volume quintile:{} "
                      "(highest {:.2f}% vs lowest {:.2f}%)",
                      100 * lo, 100 * hi, groups, high, low)};
}

Outcome dropout_behaviour() {
  const auto& s = desk_run().dropout;
  const double gap_with = std::abs(s.with_dropout.median_train_mape - s.with_dropout.median_test_mape);
  const double gap_without = std::abs(s.without_dropout.median_train_mape - s.without_dropout.median_test_mape);
  const bool ok = gap_with <= gap_without && s.without_dropout.median_train_mape < s.with_dropout.median_train_mape;
  return {ok, fmt::format("keep {:.2f}: train {:.2f}% test {:.2f}% (gap {:.2f}); keep 1: train {:.2f}% test {:.2f}% "
                          "(gap {:.2f})",
                          s.with_dropout.keep_prob, s.with_dropout.median_train_mape,
                          s.with_dropout.median_test_mape, gap_with, s.without_dropout.median_train_mape,
                          s.without_dropout.median_test_mape, gap_without)};
}

// ---------------------------------------------------------------------------

std::vector<std::pair<std::string, std::string>> directory_bytes(const fs::path& dir) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file()) out.emplace_back(fs::relative(e.path(), dir).string(), csv::read_text(e.path().string()));
  std::sort(out.begin(), out.end());
  return out;
}

Outcome determinism() {
  const auto root = fs::temp_directory_path() / "volest_acceptance_determinism";
  fs::remove_all(root);
  workflows::RunConfig g;
  g.seed = 8;
  g.out_dir = (root / "data").string();
  g.generator.n_stations = 4;
  g.generator.days = 21;
  const auto data = workflows::cmd_generate(g);

  workflows::RunConfig c;
  c.seed = 8;
  c.observations = (data / "observations.csv").string();
  c.stations = (data / "stations.csv").string();
  c.holidays = (data / "holidays.txt").string();
  c.ann.hidden = {16, 16};
  c.ann.epochs = 3;
  c.ann.batch_size = 128;
  c.jobs = 1;
  c.out_dir = (root / "a").string();
  const auto a = directory_bytes(workflows::cmd_cv(c));
  c.out_dir = (root / "b").string();
  const auto b = directory_bytes(workflows::cmd_cv(c));
  c.jobs = 4;
  c.out_dir = (root / "c").string();
  const auto four = directory_bytes(workflows::cmd_cv(c));
  const bool ok = !a.empty() && a == b && a == four;
  return {ok, fmt::format("{} output files; rerun identical: {}; --jobs 1 vs 4 identical: {}", a.size(),
                          a == b ? "yes" : "no", a == four ? "yes" : "no")};
}

Outcome wilcoxon_exactness() {
  const auto five = metrics::wilcoxon_signed_rank(std::vector<double>{1, 2, 3, 4, 5});
  const double enumerated = oracle::signed_rank_p_enumerated(5, 15.0);
  std::mt19937_64 rng(2020);
  std::normal_distribution<double> shifted(0.25, 1.0);
  double worst = 0.0, worst_oracle = 0.0;
  for (int trial = 0; trial < 25; ++trial) {
    std::vector<double> d(20);
    for (auto& x : d) x = shifted(rng);
    const auto exact = metrics::wilcoxon_signed_rank(d, metrics::WilcoxonMethod::Exact);
    const auto approx = metrics::wilcoxon_signed_rank(d, metrics::WilcoxonMethod::Normal);
    worst = std::max(worst, std::abs(exact.p_value - approx.p_value));
    if (trial < 5)
      worst_oracle =
          std::max(worst_oracle, std::abs(exact.p_value - oracle::signed_rank_p_enumerated(20, exact.statistic)));
  }
  const bool ok = five.exact && close(five.p_value, 0.0625) && close(enumerated, 0.0625) && worst < 0.02 &&
                  worst_oracle < 1e-12;
  return {ok, fmt::format("n=5 all positive: p = {} (enumeration {}); n=20: max |exact - normal| = {:.4f} over 25 "
                          "samples, exact vs enumeration within {:.1e}",
                          five.p_value, enumerated, worst, worst_oracle)};
}

Outcome adam_convergence() {
  // f(w) = a (w - w*)^2 from w = 0 with the default step size 1e-3. Adam moves
  // at most about one step size per update, so targets sit within 0.3.
  const std::vector<std::pair<double, double>> problems{{1.0, 0.3}, {0.5, -0.25}, {2.0, 0.1}, {10.0, 0.25}, {5.0, -0.2}};
  double worst = 0.0;
  for (const auto& [a, target] : problems) {
    nn::LayerSpec spec;
    spec.input_dim = 1;
    auto params = nn::zero_params(spec);
    auto state = nn::AdamState::for_params(params.trainable, nn::AdamConfig{});
    for (int i = 0; i < 500; ++i) {
      auto grads = nn::Tensors::zeros_like(params.trainable);
      grads.weights[0](0, 0) = 2.0 * a * (params.trainable.weights[0](0, 0) - target);
      nn::adam_step(state, params.trainable, grads);
    }
    worst = std::max(worst, std::abs(params.trainable.weights[0](0, 0) - target));
  }
  const nn::AdamConfig d;
  return {worst < 0.05, fmt::format("lr {} beta1 {} beta2 {} eps {}: worst |w - w*| after 500 steps = {:.4f} over "
                                    "{} quadratics",
                                    d.learning_rate, d.beta1, d.beta2, d.epsilon, worst, problems.size())};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"gradient correctness", gradient_correctness},
      {"metric oracles", metric_oracles},
      {"feature schema", feature_schema},
      {"LOSO isolation", loso_isolation},
      {"ANN beats profiling", ann_beats_profile},
      {"probe-volume quintiles", quintile_direction},
      {"dropout behaviour", dropout_behaviour},
      {"determinism", determinism},
      {"Wilcoxon exactness", wilcoxon_exactness},
      {"Adam convergence", adam_convergence},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!o.pass) ++failed;
    std::printf("%s  %2zu %s: %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str(), s);
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed;
}
