#pragma once

#include "json.hpp"

#include "equitop/metrics.hpp"
#include "equitop/mitigation.hpp"

namespace equitop::detail {

nlohmann::json to_json_value(const EvaluationReport& report);
nlohmann::json to_json_value(const EqualizedAllocation& alloc);

}  // namespace equitop::detail
