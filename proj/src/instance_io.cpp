#include "olac/instance_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace olac {
namespace {

using nlohmann::json;

std::size_t line_of(const std::string& text, std::size_t byte) {
  std::size_t line = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') ++line;
  }
  return line;
}

const json& member(const json& object, const char* key, const std::string& path) {
  if (!object.is_object()) throw ParseError("expected an object", 0, path);
  const auto it = object.find(key);
  if (it == object.end()) throw ParseError(std::string("missing field '") + key + "'", 0, path);
  return *it;
}

double number(const json& value, const std::string& path) {
  if (!value.is_number()) throw ParseError("expected a number", 0, path);
  return value.get<double>();
}

std::vector<double> vector_field(const json& value, int r, const std::string& path) {
  if (!value.is_array()) throw ParseError("expected an array", 0, path);
  if (static_cast<int>(value.size()) != r) {
    throw ParseError("expected " + std::to_string(r) + " entries, found " + std::to_string(value.size()), 0, path);
  }
  std::vector<double> out;
  for (std::size_t j = 0; j < value.size(); ++j) out.push_back(number(value[j], path + "[" + std::to_string(j) + "]"));
  return out;
}

Eigen::VectorXd to_eigen(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

ParseError::ParseError(const std::string& message, std::size_t line, std::string field)
    : std::runtime_error((line ? "line " + std::to_string(line) + ": " : std::string()) +
                         (field.empty() ? std::string() : field + ": ") + message),
      line_(line),
      field_(std::move(field)) {}

InvalidInstance::InvalidInstance(ValidationReport report)
    : std::runtime_error("invalid instance: " + report.to_string()), report_(std::move(report)) {}

NetworkInstance<double> load_instance(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(e.what(), line_of(text, e.byte), "");
  }
  const json& r_value = member(doc, "r", "");
  if (!r_value.is_number_integer() || r_value.get<long long>() < 1) throw ParseError("expected a positive integer", 0, "r");
  const int r = r_value.get<int>();
  const json& states_value = member(doc, "states", "");
  if (!states_value.is_array()) throw ParseError("expected an array", 0, "states");

  std::vector<StateSpec<double>> states;
  for (std::size_t i = 0; i < states_value.size(); ++i) {
    const std::string sp = "states[" + std::to_string(i) + "]";
    const json& s = states_value[i];
    StateSpec<double> state;
    state.id = static_cast<int>(i);
    state.probability = number(member(s, "probability", sp), sp + ".probability");
    const json& actions = member(s, "actions", sp);
    if (!actions.is_array()) throw ParseError("expected an array", 0, sp + ".actions");
    for (std::size_t k = 0; k < actions.size(); ++k) {
      const std::string ap = sp + ".actions[" + std::to_string(k) + "]";
      ActionSpec<double> action;
      action.id = static_cast<int>(k);
      action.cost = number(member(actions[k], "cost", ap), ap + ".cost");
      action.arrivals = to_eigen(vector_field(member(actions[k], "arrivals", ap), r, ap + ".arrivals"));
      action.services = to_eigen(vector_field(member(actions[k], "services", ap), r, ap + ".services"));
      state.actions.push_back(std::move(action));
    }
    states.push_back(std::move(state));
  }
  NetworkInstance<double> instance(r, std::move(states));
  auto report = validate(instance);
  if (!report.ok()) throw InvalidInstance(std::move(report));
  return instance;
}

NetworkInstance<double> load_instance_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return load_instance(text.str());
}

std::string serialize_instance(const NetworkInstance<double>& instance) {
  json doc;
  doc["r"] = instance.queue_count();
  json states = json::array();
  for (const auto& s : instance.states()) {
    json actions = json::array();
    for (const auto& a : s.actions) {
      actions.push_back({{"cost", a.cost},
                         {"arrivals", std::vector<double>(a.arrivals.data(), a.arrivals.data() + a.arrivals.size())},
                         {"services", std::vector<double>(a.services.data(), a.services.data() + a.services.size())}});
    }
    states.push_back({{"probability", s.probability}, {"actions", std::move(actions)}});
  }
  doc["states"] = std::move(states);
  return doc.dump(1) + "\n";
}

}  // namespace olac
