#pragma once

// Rendering of harness results: plain-text tables, CSV files and a JSON report.
// Every writer is deterministic: same results, same bytes.

#include <string>
#include <vector>

#include <json.hpp>

#include "volest/harness.hpp"

namespace volest::report {

using Json = nlohmann::ordered_json;

/// Min/25th/Median/75th/Max rows for each measure, one column per method.
std::string summary_text(const std::vector<harness::SummaryTable>& tables);
std::string comparison_text(const harness::Comparison& c);
std::string quintile_text(const harness::QuintileReport& q);
std::string dropout_text(const harness::DropoutStudy& s);
std::string overfit_text(const std::vector<harness::LossCurve>& curves);

Json summary_json(const harness::SummaryTable& t);
Json comparison_json(const harness::Comparison& c);
Json quintile_json(const harness::QuintileReport& q);
Json dropout_json(const harness::DropoutStudy& s);
Json overfit_json(const std::vector<harness::LossCurve>& curves);
/// Per-carriageway measures and fold bookkeeping for one method.
Json folds_json(const harness::MethodResults& r);

/// Header: carriageway,measure,method,value
std::string long_csv(const std::vector<const harness::MethodResults*>& methods);
/// Header: station_id,direction,timestamp,actual,predicted
std::string predictions_csv(const std::vector<harness::FoldResult>& folds);
/// Header: carriageway,station_id,direction,fold,r_squared,mape,etcr,emfr,n_points,n_excluded_zero_targets,
/// avg_probes,penetration,capacity_per_lane,lanes
std::string metrics_csv(const std::vector<harness::FoldResult>& folds);
/// Header: epoch,train_mae,validation_mae (validation left empty when not tracked)
std::string loss_csv(const nn::LossHistory& h);

/// Pretty-printed with a trailing newline. Throws IoError.
void write_json(const std::string& path, const Json& j);

}  // namespace volest::report
