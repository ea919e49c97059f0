#include "mtsim/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace mtsim {

using nlohmann::json;

namespace {

double parse_cost(const json& v) {
  if (v.is_string()) {
    if (v.get<std::string>() == "inf") return kInfeasible;
    throw StructuralError("cost entry \"" + v.get<std::string>() +
                          "\" is neither a number nor \"inf\"");
  }
  if (!v.is_number()) throw StructuralError("cost entry is not a number");
  return v.get<double>();
}

template <typename T>
T require(const json& doc, const char* key) {
  if (!doc.contains(key)) {
    throw StructuralError(std::string("missing field \"") + key + "\"");
  }
  try {
    return doc.at(key).get<T>();
  } catch (const json::exception& e) {
    throw StructuralError(std::string("field \"") + key + "\": " + e.what());
  }
}

}  // namespace

InstanceBundle parse_instance_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw StructuralError(std::string("instance JSON: ") + e.what());
  }
  if (!doc.is_object()) throw StructuralError("instance JSON is not an object");
  if (require<int>(doc, "version") != 1) {
    throw StructuralError("unsupported instance version");
  }
  if (!doc.contains("metric") || !doc.at("metric").is_object()) {
    throw StructuralError("missing field \"metric\"");
  }
  const json& metric = doc.at("metric");
  auto points = require<std::vector<std::string>>(metric, "points");
  auto dist = require<std::vector<std::vector<double>>>(metric, "dist");

  InstanceBundle out;
  out.instance.metric = MetricSpace(std::move(points), dist);
  out.instance.initial_state = require<std::size_t>(doc, "initial_state");
  if (!doc.contains("costs") || !doc.at("costs").is_array()) {
    throw StructuralError("missing field \"costs\"");
  }
  for (const auto& row : doc.at("costs")) {
    if (!row.is_array()) throw StructuralError("cost row is not an array");
    CostVector c;
    c.reserve(row.size());
    for (const auto& v : row) c.push_back(parse_cost(v));
    out.instance.costs.push_back(std::move(c));
  }
  validate_instance(out.instance);

  if (doc.contains("predictors")) {
    if (!doc.at("predictors").is_array()) throw StructuralError("predictors is not an array");
    for (const auto& row : doc.at("predictors")) {
      PredictorTrace trace;
      try {
        trace.states = row.get<std::vector<State>>();
      } catch (const json::exception& e) {
        throw StructuralError(std::string("predictor trace: ") + e.what());
      }
      validate_trace(out.instance, trace);
      out.predictors.push_back(std::move(trace));
    }
  }
  return out;
}

std::string instance_to_json(const InstanceBundle& bundle) {
  const auto& inst = bundle.instance;
  json doc;
  doc["version"] = 1;
  doc["metric"]["points"] = inst.metric.names();
  doc["metric"]["dist"] = inst.metric.matrix();
  doc["initial_state"] = inst.initial_state;
  json costs = json::array();
  for (const auto& c : inst.costs) {
    json row = json::array();
    for (double x : c) {
      if (is_infeasible(x)) {
        row.push_back("inf");
      } else {
        row.push_back(x);
      }
    }
    costs.push_back(std::move(row));
  }
  doc["costs"] = std::move(costs);
  json preds = json::array();
  for (const auto& p : bundle.predictors) preds.push_back(p.states);
  doc["predictors"] = std::move(preds);
  return doc.dump();
}

InstanceBundle load_instance_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw StructuralError("cannot open instance file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_instance_json(ss.str());
}

void save_instance_file(const std::filesystem::path& path,
                        const InstanceBundle& bundle) {
  std::ofstream out(path);
  if (!out) throw StructuralError("cannot write instance file " + path.string());
  out << instance_to_json(bundle) << '\n';
}

std::string format_number(double x, int significant_digits) {
  if (is_infeasible(x)) return "inf";
  if (std::isnan(x)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", significant_digits, x);
  return buf;
}

}  // namespace mtsim
