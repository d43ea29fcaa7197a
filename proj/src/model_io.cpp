#include "volest/model_io.hpp"

#include <algorithm>

#include <fmt/format.h>
#include <json.hpp>

#include "volest/csv.hpp"
#include "volest/error.hpp"

namespace volest {

namespace {

using nlohmann::json;

constexpr std::string_view kMagic = "volest-model";

json vector_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Eigen::VectorXd json_vector(const json& j, std::size_t expected, const std::string& what) {
  const auto v = j.get<std::vector<double>>();
  if (v.size() != expected)
    throw ModelShapeError(fmt::format("{}: {} values, expected {}", what, v.size(), expected));
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::string_view activation_name(nn::ActivationKind k) {
  switch (k) {
    case nn::ActivationKind::Elu: return "elu";
    case nn::ActivationKind::Sigmoid: return "sigmoid";
    case nn::ActivationKind::Identity: return "identity";
  }
  return "elu";
}

nn::ActivationKind activation_kind(const std::string& s) {
  if (s == "elu") return nn::ActivationKind::Elu;
  if (s == "sigmoid") return nn::ActivationKind::Sigmoid;
  if (s == "identity") return nn::ActivationKind::Identity;
  throw ModelFormatError(fmt::format("unknown activation '{}'", s));
}

const json& field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw ModelFormatError(fmt::format("model file lacks field '{}'", key));
  return j.at(key);
}

}  // namespace

void AnnModel::validate() const {
  spec.validate();
  params.check_consistent(spec);
  if (standardizer.width() != spec.input_dim)
    throw ModelShapeError(fmt::format("standardizer width {} does not match input dimension {}",
                                      standardizer.width(), spec.input_dim));
  if (!(target_std > 0.0) || !std::isfinite(target_mean)) throw ModelShapeError("invalid target scaling");
  if (profile) profile->validate();
}

std::vector<double> AnnModel::predict(const Eigen::Ref<const RowMatrix>& features) const {
  if (static_cast<std::size_t>(features.cols()) != spec.input_dim)
    throw StructuralError(fmt::format("feature rows have {} columns, model expects {}", features.cols(), spec.input_dim));
  const nn::Matrix x = standardizer.apply(features);
  nn::NetworkParams unscaled = params;
  // fold the target scaling into the linear output layer so predict() clamps in veh/hr
  auto& w = unscaled.trainable.weights.back();
  auto& b = unscaled.trainable.biases.back();
  w *= target_std;
  b = (b.array() * target_std + target_mean).matrix();
  const nn::Vector y = nn::predict(unscaled, spec, x);
  return {y.data(), y.data() + y.size()};
}

std::string serialize_model(const AnnModel& m) {
  m.validate();
  json j;
  j["format"] = kMagic;
  j["version"] = kModelFormatVersion;
  j["spec"] = {{"input_dim", m.spec.input_dim},
               {"hidden_dims", m.spec.hidden_dims},
               {"output_dim", m.spec.output_dim},
               {"activation", {{"kind", activation_name(m.spec.activation.kind)}, {"param", m.spec.activation.param}}},
               {"batchnorm", m.spec.use_batchnorm},
               {"keep_prob", m.spec.keep_prob},
               {"bn_momentum", m.spec.bn_momentum},
               {"bn_epsilon", m.spec.bn_epsilon}};
  json layers = json::array();
  const auto& t = m.params.trainable;
  for (std::size_t l = 0; l < t.weights.size(); ++l) {
    const auto& w = t.weights[l];
    json layer{{"rows", w.rows()},
               {"cols", w.cols()},
               {"weights", std::vector<double>(w.data(), w.data() + w.size())},
               {"bias", vector_json(t.biases[l])}};
    if (m.spec.has_batchnorm(l)) {
      layer["gamma"] = vector_json(t.gammas[l]);
      layer["beta"] = vector_json(t.betas[l]);
      layer["running_mean"] = vector_json(m.params.running_mean[l]);
      layer["running_var"] = vector_json(m.params.running_var[l]);
    }
    layers.push_back(std::move(layer));
  }
  j["layers"] = std::move(layers);
  j["standardizer"] = {{"means", m.standardizer.means()},
                       {"stds", m.standardizer.stds()},
                       {"exempt", m.standardizer.exempt()}};
  j["target"] = {{"mean", m.target_mean}, {"std", m.target_std}};
  if (m.profile) {
    json share = json::array();
    for (const auto& day : m.profile->share) share.push_back(day);
    j["profile"] = {{"day_factor", m.profile->day_factor}, {"share", share}};
  } else {
    j["profile"] = nullptr;
  }
  return j.dump(1) + "\n";
}

AnnModel parse_model(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    if (e.byte >= text.size()) throw ModelTruncatedError(fmt::format("model file ends early: {}", e.what()));
    throw ModelFormatError(fmt::format("model file is not valid JSON: {}", e.what()));
  }
  if (!j.is_object() || !j.contains("format") || j["format"] != kMagic)
    throw ModelFormatError("not a volest model file");
  try {
    const int version = field(j, "version").get<int>();
    if (version > kModelFormatVersion)
      throw ModelVersionError(fmt::format("model format version {} is newer than supported version {}", version,
                                          kModelFormatVersion));
    if (version < 1) throw ModelFormatError(fmt::format("invalid model format version {}", version));

    AnnModel m;
    const auto& s = field(j, "spec");
    m.spec.input_dim = field(s, "input_dim").get<std::size_t>();
    m.spec.hidden_dims = field(s, "hidden_dims").get<std::vector<std::size_t>>();
    m.spec.output_dim = field(s, "output_dim").get<std::size_t>();
    const auto& act = field(s, "activation");
    m.spec.activation.kind = activation_kind(field(act, "kind").get<std::string>());
    m.spec.activation.param = field(act, "param").get<double>();
    m.spec.use_batchnorm = field(s, "batchnorm").get<bool>();
    m.spec.keep_prob = field(s, "keep_prob").get<double>();
    m.spec.bn_momentum = field(s, "bn_momentum").get<double>();
    m.spec.bn_epsilon = field(s, "bn_epsilon").get<double>();
    try {
      m.spec.validate();
    } catch (const Error& e) {
      throw ModelShapeError(fmt::format("invalid network spec: {}", e.what()));
    }

    const auto& layers = field(j, "layers");
    if (!layers.is_array() || layers.size() != m.spec.layer_count())
      throw ModelShapeError(fmt::format("model has {} layers, spec describes {}", layers.is_array() ? layers.size() : 0,
                                        m.spec.layer_count()));
    m.params = nn::zero_params(m.spec);
    auto& t = m.params.trainable;
    for (std::size_t l = 0; l < layers.size(); ++l) {
      const auto& layer = layers[l];
      const auto rows = field(layer, "rows").get<std::size_t>(), cols = field(layer, "cols").get<std::size_t>();
      if (rows != m.spec.fan_out(l) || cols != m.spec.fan_in(l))
        throw ModelShapeError(fmt::format("layer {} is {}x{}, spec requires {}x{}", l, rows, cols, m.spec.fan_out(l),
                                          m.spec.fan_in(l)));
      const auto w = json_vector(field(layer, "weights"), rows * cols, fmt::format("layer {} weights", l));
      t.weights[l] = Eigen::Map<const nn::Matrix>(w.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
      t.biases[l] = json_vector(field(layer, "bias"), rows, fmt::format("layer {} bias", l));
      if (m.spec.has_batchnorm(l)) {
        t.gammas[l] = json_vector(field(layer, "gamma"), rows, fmt::format("layer {} gamma", l));
        t.betas[l] = json_vector(field(layer, "beta"), rows, fmt::format("layer {} beta", l));
        m.params.running_mean[l] = json_vector(field(layer, "running_mean"), rows, fmt::format("layer {} running mean", l));
        m.params.running_var[l] = json_vector(field(layer, "running_var"), rows, fmt::format("layer {} running var", l));
      }
    }

    const auto& st = field(j, "standardizer");
    const auto means = field(st, "means").get<std::vector<double>>();
    const auto stds = field(st, "stds").get<std::vector<double>>();
    const auto exempt = field(st, "exempt").get<std::vector<std::size_t>>();
    if (means.size() != m.spec.input_dim || stds.size() != m.spec.input_dim)
      throw ModelShapeError("standardizer width does not match the input dimension");
    if (std::any_of(exempt.begin(), exempt.end(), [&](std::size_t c) { return c >= m.spec.input_dim; }))
      throw ModelShapeError("standardizer exempt column out of range");
    m.standardizer = Standardizer(means, stds, exempt);

    const auto& target = field(j, "target");
    m.target_mean = field(target, "mean").get<double>();
    m.target_std = field(target, "std").get<double>();

    const auto& prof = field(j, "profile");
    if (!prof.is_null()) {
      baselines::ProfileFactors f;
      const auto day = json_vector(field(prof, "day_factor"), 7, "profile day factors");
      for (int d = 0; d < 7; ++d) f.day_factor[d] = day[d];
      const auto& share = field(prof, "share");
      if (!share.is_array() || share.size() != 7) throw ModelShapeError("profile shares need 7 days");
      for (std::size_t d = 0; d < 7; ++d) {
        const auto s = json_vector(share[d], 24, "profile shares");
        for (int h = 0; h < 24; ++h) f.share[d][h] = s[h];
      }
      m.profile = f;
    }
    try {
      m.validate();
    } catch (const ModelShapeError&) {
      throw;
    } catch (const Error& e) {
      throw ModelShapeError(e.what());
    }
    return m;
  } catch (const json::exception& e) {
    throw ModelFormatError(fmt::format("malformed model file: {}", e.what()));
  }
}

void save_model(const std::string& path, const AnnModel& model) { csv::write_text(path, serialize_model(model)); }

AnnModel load_model(const std::string& path) {
  return parse_model(csv::read_text(path));
}

}  // namespace volest
