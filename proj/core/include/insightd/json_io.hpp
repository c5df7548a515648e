#pragma once

#include "insightd/chart.hpp"
#include "insightd/insight.hpp"
#include "insightd/table.hpp"

#include <nlohmann/json.hpp>

namespace insightd {

using Json = nlohmann::ordered_json;

/// {id, kind, fields, title, description, score, chart_id, created_at, origin}
Json to_json(const Insight& insight);

/// {chart_id, mark, x:{field,type,bin}, y:{...}, color?, overlays:[...], data:[{...}]}
/// A count channel serialises its field as null.
Json to_json(const ChartSpec& spec);

/// Throws InvalidChart on any shape error or validation violation.
ChartSpec chart_from_json(const nlohmann::json& j);

/// {id, name, rows, fields:[{name, kind, distinct, missing}]}
Json summary_json(const Dataset& dataset);

}  // namespace insightd
