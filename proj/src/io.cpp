#include "carl/io.hpp"

#include "carl/errors.hpp"

#include <fstream>
#include <sstream>

namespace carl {

namespace {

using nlohmann::json;

const json& field(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) throw MalformedModel(std::string("missing field '") + key + "'");
  return *it;
}

template <typename T>
T as(const json& value, const char* what) {
  try {
    return value.get<T>();
  } catch (const json::exception&) {
    throw MalformedModel(std::string("field '") + what + "' has the wrong type");
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

json parse_text(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw MalformedModel(std::string("invalid JSON: ") + e.what());
  }
}

}  // namespace

ModelSpec parse_model_spec(const json& doc) {
  if (!doc.is_object()) throw MalformedModel("model document must be an object");
  ModelSpec spec;
  spec.states = as<std::vector<std::string>>(field(doc, "states"), "states");
  spec.initial = as<std::string>(field(doc, "initial"), "initial");
  spec.goals = as<std::vector<std::string>>(field(doc, "goals"), "goals");
  spec.n = as<int>(field(doc, "n"), "n");
  spec.bounds = as<std::vector<double>>(field(doc, "bounds"), "bounds");
  const json& actions = field(doc, "actions");
  if (!actions.is_array()) throw MalformedModel("field 'actions' must be an array");
  for (const json& a : actions) {
    if (!a.is_object()) throw MalformedModel("action records must be objects");
    ActionSpec act;
    act.name = as<std::string>(field(a, "name"), "name");
    act.source = as<std::string>(field(a, "source"), "source");
    act.cost = as<std::vector<double>>(field(a, "cost"), "cost");
    const json& outcomes = field(a, "outcomes");
    if (!outcomes.is_array()) throw MalformedModel("field 'outcomes' must be an array");
    for (const json& o : outcomes) {
      if (!o.is_object()) throw MalformedModel("outcome records must be objects");
      act.outcomes.emplace_back(as<std::string>(field(o, "target"), "target"), as<double>(field(o, "prob"), "prob"));
    }
    spec.actions.push_back(std::move(act));
  }
  return spec;
}

CsspModel parse_model(const std::string& text) { return CsspModel(parse_model_spec(parse_text(text))); }

CsspModel load_model(const std::string& path) { return parse_model(read_file(path)); }

json model_to_json(const CsspModel& model) {
  const ModelSpec spec = model.to_spec();
  json actions = json::array();
  for (const auto& a : spec.actions) {
    json outcomes = json::array();
    for (const auto& [target, prob] : a.outcomes) outcomes.push_back({{"target", target}, {"prob", prob}});
    actions.push_back({{"name", a.name}, {"source", a.source}, {"cost", a.cost}, {"outcomes", outcomes}});
  }
  return {{"states", spec.states}, {"initial", spec.initial}, {"goals", spec.goals},
          {"n", spec.n},           {"bounds", spec.bounds},   {"actions", actions}};
}

void save_model(const CsspModel& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path + "'");
  out << model_to_json(model).dump(2) << '\n';
}

json policy_to_json(const CsspModel& model, const StochasticPolicy& policy) {
  json doc = json::object();
  for (StateId s = 0; s < policy.num_states(); ++s) {
    if (!policy.defined(s)) continue;
    json row = json::array();
    for (const auto& c : policy.choices(s)) row.push_back(json::array({model.action(c.action).name, c.prob}));
    doc[model.state_name(s)] = row;
  }
  return doc;
}

StochasticPolicy policy_from_json(const CsspModel& model, const json& doc) {
  if (!doc.is_object()) throw MalformedModel("policy document must be an object");
  StochasticPolicy policy(model.num_states());
  for (const auto& [state, row] : doc.items()) {
    const auto s = model.find_state(state);
    if (!s) throw MalformedModel("policy names unknown state '" + state + "'");
    if (!row.is_array()) throw MalformedModel("policy entry for '" + state + "' must be an array");
    std::vector<ActionChoice> choices;
    for (const json& pair : row) {
      if (!pair.is_array() || pair.size() != 2) throw MalformedModel("policy choices must be [action, prob] pairs");
      const std::string name = as<std::string>(pair[0], "action");
      const auto a = model.find_action(name);
      if (!a) throw MalformedModel("policy names unknown action '" + name + "'");
      choices.push_back({*a, as<double>(pair[1], "prob")});
    }
    policy.set(*s, std::move(choices));
  }
  validate_policy(model, policy);
  return policy;
}

StochasticPolicy load_policy(const CsspModel& model, const std::string& path) {
  return policy_from_json(model, parse_text(read_file(path)));
}

}  // namespace carl
