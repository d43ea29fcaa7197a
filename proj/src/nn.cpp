#include "volest/nn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include <fmt/format.h>

#include "volest/error.hpp"

namespace volest::nn {

double elu(double x, double alpha) { return x > 0.0 ? x : alpha * std::expm1(x); }

double elu_derivative(double x, double alpha) { return x > 0.0 ? 1.0 : elu(x, alpha) + alpha; }

double sigmoid(double x, double lambda) {
  const double z = lambda * x;
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double sigmoid_derivative(double x, double lambda) {
  const double s = sigmoid(x, lambda);
  return lambda * s * (1.0 - s);
}

double Activation::apply(double x) const {
  switch (kind) {
    case ActivationKind::Elu: return nn::elu(x, param);
    case ActivationKind::Sigmoid: return nn::sigmoid(x, param);
    case ActivationKind::Identity: return x;
  }
  return x;
}

double Activation::derivative(double x) const {
  switch (kind) {
    case ActivationKind::Elu: return elu_derivative(x, param);
    case ActivationKind::Sigmoid: return sigmoid_derivative(x, param);
    case ActivationKind::Identity: return 1.0;
  }
  return 1.0;
}

void LayerSpec::validate() const {
  if (input_dim == 0) throw StructuralError("layer spec: input_dim must be positive");
  if (output_dim != 1) throw StructuralError("layer spec: only scalar regression output is supported");
  for (auto h : hidden_dims)
    if (h == 0) throw StructuralError("layer spec: hidden layer widths must be positive");
  if (!(keep_prob > 0.0 && keep_prob <= 1.0))
    throw StructuralError(fmt::format("layer spec: keep_prob {} outside (0, 1]", keep_prob));
  if (activation.kind != ActivationKind::Identity && !(activation.param > 0.0))
    throw StructuralError("layer spec: activation parameter must be positive");
  if (use_batchnorm && !(bn_momentum >= 0.0 && bn_momentum < 1.0 && bn_epsilon > 0.0))
    throw StructuralError("layer spec: invalid batch-norm momentum/epsilon");
}

std::size_t LayerSpec::fan_in(std::size_t layer) const {
  return layer == 0 ? input_dim : hidden_dims[layer - 1];
}

std::size_t LayerSpec::fan_out(std::size_t layer) const {
  return is_output(layer) ? output_dim : hidden_dims[layer];
}

Tensors Tensors::zeros_like(const Tensors& other) {
  Tensors t;
  for (const auto& w : other.weights) t.weights.push_back(Matrix::Zero(w.rows(), w.cols()));
  for (const auto& b : other.biases) t.biases.push_back(Vector::Zero(b.size()));
  for (const auto& g : other.gammas) t.gammas.push_back(Vector::Zero(g.size()));
  for (const auto& b : other.betas) t.betas.push_back(Vector::Zero(b.size()));
  return t;
}

std::size_t Tensors::scalar_count() const {
  std::size_t n = 0;
  for (const auto& v : flat_views(*this)) n += static_cast<std::size_t>(v.size());
  return n;
}

bool Tensors::all_finite() const {
  for (const auto& v : flat_views(*this))
    if (!v.allFinite()) return false;
  return true;
}

template <class T, class Map>
static std::vector<Map> make_views(T& t) {
  std::vector<Map> out;
  const std::size_t n = t.weights.size();
  out.reserve(4 * n);
  for (std::size_t l = 0; l < n; ++l) {
    out.emplace_back(t.weights[l].data(), t.weights[l].size());
    out.emplace_back(t.biases[l].data(), t.biases[l].size());
    out.emplace_back(t.gammas[l].data(), t.gammas[l].size());
    out.emplace_back(t.betas[l].data(), t.betas[l].size());
  }
  return out;
}

std::vector<Eigen::Map<Eigen::ArrayXd>> flat_views(Tensors& t) {
  return make_views<Tensors, Eigen::Map<Eigen::ArrayXd>>(t);
}

std::vector<Eigen::Map<const Eigen::ArrayXd>> flat_views(const Tensors& t) {
  return make_views<const Tensors, Eigen::Map<const Eigen::ArrayXd>>(t);
}

template <class M>
static bool same(const std::vector<M>& a, const std::vector<M>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].rows() != b[i].rows() || a[i].cols() != b[i].cols()) return false;
    if (a[i].size() > 0 && !(a[i].array() == b[i].array()).all()) return false;
  }
  return true;
}

bool operator==(const Tensors& a, const Tensors& b) {
  return same(a.weights, b.weights) && same(a.biases, b.biases) && same(a.gammas, b.gammas) &&
         same(a.betas, b.betas);
}

bool operator==(const NetworkParams& a, const NetworkParams& b) {
  return a.trainable == b.trainable && same(a.running_mean, b.running_mean) &&
         same(a.running_var, b.running_var);
}

void NetworkParams::check_consistent(const LayerSpec& spec) const {
  const auto n = spec.layer_count();
  const auto& t = trainable;
  if (t.weights.size() != n || t.biases.size() != n || t.gammas.size() != n ||
      t.betas.size() != n || running_mean.size() != n || running_var.size() != n)
    throw StructuralError("network params: layer count does not match spec");
  for (std::size_t l = 0; l < n; ++l) {
    const auto in = static_cast<Eigen::Index>(spec.fan_in(l));
    const auto out = static_cast<Eigen::Index>(spec.fan_out(l));
    const Eigen::Index bn = spec.has_batchnorm(l) ? out : 0;
    if (t.weights[l].rows() != out || t.weights[l].cols() != in || t.biases[l].size() != out ||
        t.gammas[l].size() != bn || t.betas[l].size() != bn || running_mean[l].size() != bn ||
        running_var[l].size() != bn)
      throw StructuralError(fmt::format("network params: layer {} shape does not match spec", l));
  }
}

NetworkParams zero_params(const LayerSpec& spec) {
  spec.validate();
  NetworkParams p;
  for (std::size_t l = 0; l < spec.layer_count(); ++l) {
    const auto in = static_cast<Eigen::Index>(spec.fan_in(l));
    const auto out = static_cast<Eigen::Index>(spec.fan_out(l));
    const Eigen::Index bn = spec.has_batchnorm(l) ? out : 0;
    p.trainable.weights.push_back(Matrix::Zero(out, in));
    p.trainable.biases.push_back(Vector::Zero(out));
    p.trainable.gammas.push_back(Vector::Ones(bn));
    p.trainable.betas.push_back(Vector::Zero(bn));
    p.running_mean.push_back(Vector::Zero(bn));
    p.running_var.push_back(Vector::Ones(bn));
  }
  return p;
}

NetworkParams initialize(const LayerSpec& spec, Rng& rng) {
  NetworkParams p = zero_params(spec);
  for (std::size_t l = 0; l < spec.layer_count(); ++l) {
    const double fan_in = static_cast<double>(spec.fan_in(l));
    const double limit = spec.is_output(l) ? std::sqrt(3.0 / fan_in) : std::sqrt(6.0 / fan_in);
    std::uniform_real_distribution<double> dist(-limit, limit);
    auto& w = p.trainable.weights[l];
    for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = dist(rng);
  }
  return p;
}

DropoutMasks sample_dropout_masks(const LayerSpec& spec, std::size_t batch, Rng& rng) {
  spec.validate();
  std::bernoulli_distribution keep(spec.keep_prob);
  DropoutMasks masks;
  for (auto width : spec.hidden_dims) {
    Matrix m(static_cast<Eigen::Index>(batch), static_cast<Eigen::Index>(width));
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = keep(rng) ? 1.0 : 0.0;
    masks.push_back(std::move(m));
  }
  return masks;
}

static bool dropout_active(const LayerSpec& spec, Mode mode) {
  return mode == Mode::Train && spec.keep_prob < 1.0;
}

Vector forward(const NetworkParams& params, const LayerSpec& spec, const Matrix& x, Mode mode,
               const DropoutMasks* masks, ForwardCache* cache) {
  spec.validate();
  if (static_cast<std::size_t>(x.cols()) != spec.input_dim)
    throw StructuralError(
        fmt::format("forward: input has {} features, network expects {}", x.cols(), spec.input_dim));
  params.check_consistent(spec);
  const bool dropout = dropout_active(spec, mode);
  if (dropout) {
    if (masks == nullptr || masks->size() != spec.hidden_dims.size())
      throw StructuralError("forward: Train mode with keep_prob < 1 requires one mask per hidden layer");
    for (std::size_t l = 0; l < masks->size(); ++l)
      if ((*masks)[l].rows() != x.rows() ||
          static_cast<std::size_t>((*masks)[l].cols()) != spec.hidden_dims[l])
        throw StructuralError(fmt::format("forward: dropout mask {} has the wrong shape", l));
  }
  if (cache) {
    *cache = ForwardCache{};
    cache->mode = mode;
    if (dropout) cache->masks = *masks;
  }

  const auto& t = params.trainable;
  Matrix a = x;
  for (std::size_t l = 0; l < spec.layer_count(); ++l) {
    Matrix z = a * t.weights[l].transpose();
    z.rowwise() += t.biases[l].transpose();

    Matrix xhat;
    Vector inv_std, mean, var;
    if (spec.has_batchnorm(l)) {
      if (mode == Mode::Train) {
        mean = z.colwise().mean().transpose();
        var = (z.rowwise() - mean.transpose()).array().square().colwise().mean().transpose();
      } else {
        mean = params.running_mean[l];
        var = params.running_var[l];
      }
      inv_std = (var.array() + spec.bn_epsilon).rsqrt().matrix();
      xhat = ((z.rowwise() - mean.transpose()).array().rowwise() * inv_std.transpose().array())
                 .matrix();
      z = ((xhat.array().rowwise() * t.gammas[l].transpose().array()).rowwise() +
           t.betas[l].transpose().array())
              .matrix();
    }
    if (!z.allFinite())
      throw NumericError(fmt::format("forward: non-finite value in layer {}", l), static_cast<int>(l));

    if (spec.is_output(l)) {
      if (cache) {
        cache->inputs.push_back(std::move(a));
        cache->pre.push_back(z);
        cache->output = z.col(0);
        cache->valid = true;
      }
      return z.col(0);
    }

    const Activation act = spec.activation;
    Matrix h = z.unaryExpr([act](double v) { return act.apply(v); });
    Matrix next = dropout ? Matrix(h.cwiseProduct((*masks)[l]) / spec.keep_prob) : h;
    if (cache) {
      cache->inputs.push_back(std::move(a));
      cache->pre.push_back(std::move(z));
      cache->normalized.push_back(std::move(xhat));
      cache->inv_std.push_back(std::move(inv_std));
      cache->batch_mean.push_back(mode == Mode::Train ? mean : Vector());
      cache->batch_var.push_back(mode == Mode::Train ? var : Vector());
      cache->activated.push_back(std::move(h));
    }
    a = std::move(next);
  }
  return {};  // unreachable: the last layer is the output layer
}

double forward(const NetworkParams& params, const LayerSpec& spec, std::span<const double> x) {
  Matrix row(1, static_cast<Eigen::Index>(x.size()));
  std::copy(x.begin(), x.end(), row.data());
  return forward(params, spec, row, Mode::Eval)(0);
}

void update_running_stats(NetworkParams& params, const LayerSpec& spec, const ForwardCache& cache) {
  if (!cache.valid || cache.mode != Mode::Train)
    throw StructuralError("update_running_stats: needs a Train-mode forward cache");
  const double m = spec.bn_momentum;
  for (std::size_t l = 0; l + 1 < spec.layer_count(); ++l) {
    if (!spec.has_batchnorm(l)) continue;
    params.running_mean[l] = m * params.running_mean[l] + (1.0 - m) * cache.batch_mean[l];
    params.running_var[l] = m * params.running_var[l] + (1.0 - m) * cache.batch_var[l];
  }
}

double loss_value(Loss loss, const Vector& predicted, const Vector& target) {
  if (predicted.size() != target.size() || predicted.size() == 0)
    throw StructuralError("loss: prediction/target size mismatch");
  const Eigen::ArrayXd r = (predicted - target).array();
  return loss == Loss::Mae ? r.abs().mean() : r.square().mean();
}

Tensors backward(const NetworkParams& params, const LayerSpec& spec, const ForwardCache& cache,
                 const Vector& target, Loss loss, double loss_scale) {
  if (!cache.valid) throw StructuralError("backward: missing forward cache");
  params.check_consistent(spec);
  if (target.size() != cache.output.size())
    throw StructuralError("backward: target size does not match cached batch");
  const auto batch = static_cast<double>(target.size());
  const auto& t = params.trainable;
  Tensors grads = Tensors::zeros_like(t);
  const bool dropout = dropout_active(spec, cache.mode);

  const Eigen::ArrayXd residual = (cache.output - target).array();
  Matrix delta(target.size(), 1);
  if (loss == Loss::Mae)
    delta.col(0) = (residual.sign() * (loss_scale / batch)).matrix();
  else
    delta.col(0) = (residual * (2.0 * loss_scale / batch)).matrix();

  for (std::size_t li = spec.layer_count(); li-- > 0;) {
    if (!spec.is_output(li)) {
      if (dropout) delta = delta.cwiseProduct(cache.masks[li]) / spec.keep_prob;
      const Activation act = spec.activation;
      delta = delta.cwiseProduct(cache.pre[li].unaryExpr([act](double v) { return act.derivative(v); }));
      if (spec.has_batchnorm(li)) {
        const Matrix& xhat = cache.normalized[li];
        grads.gammas[li] = delta.cwiseProduct(xhat).colwise().sum().transpose();
        grads.betas[li] = delta.colwise().sum().transpose();
        const Eigen::ArrayXXd dxhat =
            (delta.array().rowwise() * t.gammas[li].transpose().array());
        const Eigen::RowVectorXd inv = cache.inv_std[li].transpose();
        if (cache.mode == Mode::Train) {
          const Eigen::RowVectorXd sum_dxhat = dxhat.colwise().sum().matrix();
          const Eigen::RowVectorXd sum_dxhat_xhat = (dxhat * xhat.array()).colwise().sum().matrix();
          Eigen::ArrayXXd centered = (dxhat * batch).rowwise() - sum_dxhat.array();
          centered -= xhat.array().rowwise() * sum_dxhat_xhat.array();
          delta = (centered.rowwise() * (inv.array() / batch)).matrix();
        } else {
          delta = (dxhat.rowwise() * inv.array()).matrix();
        }
      }
    }
    grads.weights[li] = delta.transpose() * cache.inputs[li];
    grads.biases[li] = delta.colwise().sum().transpose();
    if (li > 0) delta = delta * t.weights[li];
  }
  return grads;
}

AdamState AdamState::for_params(const Tensors& params, const AdamConfig& config) {
  AdamState s;
  s.config = config;
  s.m = Tensors::zeros_like(params);
  s.v = Tensors::zeros_like(params);
  return s;
}

void adam_step(AdamState& state, Tensors& params, const Tensors& grads) {
  if (!grads.all_finite()) throw NumericError("adam: non-finite gradient, step aborted");
  auto p = flat_views(params);
  auto m = flat_views(state.m);
  auto v = flat_views(state.v);
  const auto g = flat_views(grads);
  if (p.size() != g.size() || p.size() != m.size())
    throw StructuralError("adam: gradient/state layout does not match parameters");
  for (std::size_t i = 0; i < p.size(); ++i)
    if (p[i].size() != g[i].size() || p[i].size() != m[i].size())
      throw StructuralError("adam: gradient/state shape does not match parameters");

  const auto& c = state.config;
  state.t += 1;
  const double t = static_cast<double>(state.t);
  const double correction1 = 1.0 - std::pow(c.beta1, t);
  const double correction2 = 1.0 - std::pow(c.beta2, t);
  for (std::size_t i = 0; i < p.size(); ++i) {
    m[i] = c.beta1 * m[i] + (1.0 - c.beta1) * g[i];
    v[i] = c.beta2 * v[i] + (1.0 - c.beta2) * g[i].square();
    p[i] -= c.learning_rate * (m[i] / correction1) / ((v[i] / correction2).sqrt() + c.epsilon);
  }
}

namespace {

constexpr Eigen::Index kEvalChunk = 4096;

Vector forward_chunked(const NetworkParams& params, const LayerSpec& spec, const Matrix& x) {
  Vector out(x.rows());
  for (Eigen::Index start = 0; start < x.rows(); start += kEvalChunk) {
    const Eigen::Index n = std::min(kEvalChunk, x.rows() - start);
    out.segment(start, n) = forward(params, spec, x.middleRows(start, n), Mode::Eval);
  }
  return out;
}

}  // namespace

TrainResult train(const Matrix& x, const Vector& y, const Matrix& validation_x,
                  const Vector& validation_y, const LayerSpec& spec, const TrainConfig& config) {
  spec.validate();
  if (x.rows() == 0) throw DataError("train: empty dataset");
  if (x.rows() != y.size()) throw StructuralError("train: feature/target row count mismatch");
  if (static_cast<std::size_t>(x.cols()) != spec.input_dim)
    throw StructuralError("train: feature width does not match spec input_dim");
  if (validation_x.rows() != validation_y.size())
    throw StructuralError("train: validation feature/target row count mismatch");
  if (validation_x.rows() > 0 && validation_x.cols() != x.cols())
    throw StructuralError("train: validation feature width mismatch");
  if (!x.allFinite() || !y.allFinite()) throw DataError("train: NaN or Inf in training data");
  if (!validation_x.allFinite() || !validation_y.allFinite())
    throw DataError("train: NaN or Inf in validation data");
  if (config.batch_size == 0) throw StructuralError("train: batch_size must be positive");

  Rng rng(config.seed);
  TrainResult result;
  result.params = initialize(spec, rng);
  AdamState adam = AdamState::for_params(result.params.trainable, config.adam);

  const auto n = static_cast<std::size_t>(x.rows());
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  const bool dropout = spec.keep_prob < 1.0;
  ForwardCache cache;
  Matrix batch_x;
  Vector batch_y;

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double abs_error_sum = 0.0;
    for (std::size_t start = 0; start < n; start += config.batch_size) {
      const std::size_t count = std::min(config.batch_size, n - start);
      batch_x.resize(static_cast<Eigen::Index>(count), x.cols());
      batch_y.resize(static_cast<Eigen::Index>(count));
      for (std::size_t i = 0; i < count; ++i) {
        const auto src = static_cast<Eigen::Index>(order[start + i]);
        batch_x.row(static_cast<Eigen::Index>(i)) = x.row(src);
        batch_y(static_cast<Eigen::Index>(i)) = y(src);
      }
      DropoutMasks masks;
      if (dropout) masks = sample_dropout_masks(spec, count, rng);
      forward(result.params, spec, batch_x, Mode::Train, dropout ? &masks : nullptr, &cache);
      abs_error_sum += (cache.output - batch_y).array().abs().sum();
      const Tensors grads = backward(result.params, spec, cache, batch_y, config.loss);
      adam_step(adam, result.params.trainable, grads);
      if (spec.use_batchnorm) update_running_stats(result.params, spec, cache);
    }
    result.history.train_mae.push_back(abs_error_sum / static_cast<double>(n) * config.report_scale);
    if (validation_x.rows() > 0) {
      const Vector pred = forward_chunked(result.params, spec, validation_x);
      result.history.validation_mae.push_back((pred - validation_y).array().abs().mean() *
                                              config.report_scale);
    } else {
      result.history.validation_mae.push_back(std::numeric_limits<double>::quiet_NaN());
    }
  }
  return result;
}

Vector predict(const NetworkParams& params, const LayerSpec& spec, const Matrix& x) {
  return forward_chunked(params, spec, x).cwiseMax(0.0);
}

double predict(const NetworkParams& params, const LayerSpec& spec, std::span<const double> x) {
  return std::max(0.0, forward(params, spec, x));
}

}  // namespace volest::nn
