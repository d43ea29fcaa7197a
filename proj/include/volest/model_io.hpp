#pragma once

// A trained estimator bundle and its on-disk JSON format.

#include <optional>
#include <string>
#include <string_view>

#include "volest/baselines.hpp"
#include "volest/features.hpp"
#include "volest/nn.hpp"

namespace volest {

inline constexpr int kModelFormatVersion = 1;

struct AnnModel {
  nn::LayerSpec spec;
  nn::NetworkParams params;
  Standardizer standardizer;
  double target_mean = 0.0;
  double target_std = 1.0;
  // Set when the profile column was rebuilt from these factors during training;
  // prediction then recomputes it the same way.
  std::optional<baselines::ProfileFactors> profile;

  /// Raw (unstandardized) feature rows in, vehicles/hr out, clamped at 0.
  std::vector<double> predict(const Eigen::Ref<const RowMatrix>& features) const;
  void validate() const;
};

std::string serialize_model(const AnnModel& model);
/// Throws ModelFormatError, ModelVersionError, ModelTruncatedError or ModelShapeError.
AnnModel parse_model(std::string_view text);

void save_model(const std::string& path, const AnnModel& model);
AnnModel load_model(const std::string& path);

}  // namespace volest
