#pragma once

#include "carl/model.hpp"

#include "json.hpp"

#include <string>

namespace carl {

/// Reads the interchange format. Throws MalformedModel on schema errors and
/// whatever CsspModel validation raises on semantic ones.
ModelSpec parse_model_spec(const nlohmann::json& doc);
CsspModel parse_model(const std::string& text);
CsspModel load_model(const std::string& path);

nlohmann::json model_to_json(const CsspModel& model);
void save_model(const CsspModel& model, const std::string& path);

/// {state: [[action, prob], ...]} over the defined states, in state order.
nlohmann::json policy_to_json(const CsspModel& model, const StochasticPolicy& policy);
StochasticPolicy policy_from_json(const CsspModel& model, const nlohmann::json& doc);
StochasticPolicy load_policy(const CsspModel& model, const std::string& path);

}  // namespace carl
