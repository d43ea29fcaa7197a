#pragma once

// Fully-connected feedforward regression network: ELU/sigmoid hidden layers,
// optional batch normalization, inverted dropout, Adam, mini-batch training.

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace volest::nn {

// Batches are row-major: one example per row.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using Rng = std::mt19937_64;

enum class ActivationKind { Elu, Sigmoid, Identity };

struct Activation {
  ActivationKind kind = ActivationKind::Elu;
  double param = 1.0;  // alpha for ELU, lambda for sigmoid, unused for identity

  static Activation elu(double alpha = 1.0) { return {ActivationKind::Elu, alpha}; }
  static Activation sigmoid(double lambda = 1.0) { return {ActivationKind::Sigmoid, lambda}; }
  static Activation identity() { return {ActivationKind::Identity, 0.0}; }

  double apply(double x) const;
  // Derivative with respect to the pre-activation `x`.
  double derivative(double x) const;
};

double elu(double x, double alpha);
double elu_derivative(double x, double alpha);
// Logistic function with slope lambda; saturates cleanly for large |x|.
double sigmoid(double x, double lambda);
double sigmoid_derivative(double x, double lambda);

/// Network architecture. `activation` applies to hidden layers; the output
/// layer is always linear.
struct LayerSpec {
  std::size_t input_dim = 0;
  std::vector<std::size_t> hidden_dims;
  std::size_t output_dim = 1;
  Activation activation = Activation::elu(1.0);
  bool use_batchnorm = false;
  double keep_prob = 0.5;
  double bn_momentum = 0.99;
  double bn_epsilon = 1e-3;

  void validate() const;
  std::size_t layer_count() const { return hidden_dims.size() + 1; }
  std::size_t fan_in(std::size_t layer) const;
  std::size_t fan_out(std::size_t layer) const;
  bool is_output(std::size_t layer) const { return layer + 1 == layer_count(); }
  bool has_batchnorm(std::size_t layer) const { return use_batchnorm && !is_output(layer); }
};

/// Trainable tensors, one entry per layer. `gammas`/`betas` are empty
/// vectors for layers without batch normalization.
struct Tensors {
  std::vector<Matrix> weights;  // fan_out x fan_in
  std::vector<Vector> biases;
  std::vector<Vector> gammas;
  std::vector<Vector> betas;

  static Tensors zeros_like(const Tensors& other);
  std::size_t scalar_count() const;
  bool all_finite() const;

  friend bool operator==(const Tensors&, const Tensors&);
};

/// Flat views over every tensor, in a fixed order shared by all Tensors of
/// the same architecture.
std::vector<Eigen::Map<Eigen::ArrayXd>> flat_views(Tensors& t);
std::vector<Eigen::Map<const Eigen::ArrayXd>> flat_views(const Tensors& t);

struct NetworkParams {
  Tensors trainable;
  std::vector<Vector> running_mean;  // empty for layers without batch normalization
  std::vector<Vector> running_var;

  void check_consistent(const LayerSpec& spec) const;
  friend bool operator==(const NetworkParams&, const NetworkParams&);
};

/// Zero-filled parameters with identity batch-norm state.
NetworkParams zero_params(const LayerSpec& spec);
/// He-style uniform initialization for hidden layers, LeCun-uniform for the
/// linear output layer, zero biases.
NetworkParams initialize(const LayerSpec& spec, Rng& rng);

/// One 0/1 matrix (batch x width) per hidden layer.
using DropoutMasks = std::vector<Matrix>;

DropoutMasks sample_dropout_masks(const LayerSpec& spec, std::size_t batch, Rng& rng);

enum class Mode { Train, Eval };

struct ForwardCache {
  Mode mode = Mode::Eval;
  std::vector<Matrix> inputs;      // layer inputs (after dropout of the previous layer)
  std::vector<Matrix> pre;         // activation input (after batch norm where present)
  std::vector<Matrix> normalized;  // x-hat; batch-norm layers only
  std::vector<Vector> inv_std;     // 1/sqrt(var + eps) used in the pass; batch-norm layers only
  std::vector<Vector> batch_mean;  // Train mode, batch-norm layers only
  std::vector<Vector> batch_var;
  std::vector<Matrix> activated;   // after activation, before dropout
  DropoutMasks masks;
  Vector output;
  bool valid = false;
};

/// Runs the network over a batch. Train mode applies `masks` (required when
/// keep_prob < 1, ignored otherwise) with 1/p rescaling and uses batch
/// statistics for batch normalization; Eval mode uses running statistics.
Vector forward(const NetworkParams& params, const LayerSpec& spec, const Matrix& x, Mode mode,
               const DropoutMasks* masks = nullptr, ForwardCache* cache = nullptr);

/// Eval-mode output for a single example.
double forward(const NetworkParams& params, const LayerSpec& spec, std::span<const double> x);

/// Moves running batch-norm statistics towards the batch statistics stored
/// in `cache` (a Train-mode cache).
void update_running_stats(NetworkParams& params, const LayerSpec& spec, const ForwardCache& cache);

enum class Loss { Mae, Mse };

/// Mean loss over the batch.
double loss_value(Loss loss, const Vector& predicted, const Vector& target);

/// Gradients of `loss_scale * loss_value(...)` with respect to every
/// trainable tensor, using the activations recorded in `cache`.
Tensors backward(const NetworkParams& params, const LayerSpec& spec, const ForwardCache& cache,
                 const Vector& target, Loss loss, double loss_scale = 1.0);

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  AdamConfig config;
  Tensors m;
  Tensors v;
  std::uint64_t t = 0;

  static AdamState for_params(const Tensors& params, const AdamConfig& config);
};

/// One bias-corrected Adam update. Throws NumericError and leaves both
/// `state` and `params` untouched when `grads` has a non-finite entry.
void adam_step(AdamState& state, Tensors& params, const Tensors& grads);

struct LossHistory {
  std::vector<double> train_mae;       // running mean over the epoch's batches
  std::vector<double> validation_mae;  // NaN when no validation set was given

  std::size_t size() const { return train_mae.size(); }
};

struct TrainConfig {
  std::size_t epochs = 200;
  std::size_t batch_size = 256;
  AdamConfig adam;
  Loss loss = Loss::Mae;
  std::uint64_t seed = 0;
  // Multiplies reported MAE values, so that losses computed on scaled
  // targets are recorded in vehicles/hr.
  double report_scale = 1.0;
};

struct TrainResult {
  NetworkParams params;
  LossHistory history;
};

/// Mini-batch Adam training. Initialization, shuffling and dropout all draw
/// from a single generator seeded with `config.seed`.
TrainResult train(const Matrix& x, const Vector& y, const Matrix& validation_x,
                  const Vector& validation_y, const LayerSpec& spec, const TrainConfig& config);

/// Eval-mode forward with negative outputs clamped to zero.
Vector predict(const NetworkParams& params, const LayerSpec& spec, const Matrix& x);
double predict(const NetworkParams& params, const LayerSpec& spec, std::span<const double> x);

}  // namespace volest::nn
