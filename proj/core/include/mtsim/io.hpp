#pragma once

// Instance file format (JSON, UTF-8, 0-based indices):
//   { "version": 1,
//     "metric": { "points": [names], "dist": [[...]] },
//     "initial_state": index,
//     "costs": [[number | "inf", ...] per step],
//     "predictors": [[state index per step] per predictor] }

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "mtsim/core.hpp"

namespace mtsim {

struct InstanceBundle {
  MtsInstance instance;
  std::vector<PredictorTrace> predictors;
};

/// Throws StructuralError on malformed documents, T = 0, fully INFEASIBLE
/// steps, or predictor traces that do not match the instance.
InstanceBundle parse_instance_json(std::string_view text);
std::string instance_to_json(const InstanceBundle& bundle);

InstanceBundle load_instance_file(const std::filesystem::path& path);
void save_instance_file(const std::filesystem::path& path,
                        const InstanceBundle& bundle);

/// printf %.Ng with N significant digits (17 round-trips a double);
/// INFEASIBLE prints as "inf".
std::string format_number(double x, int significant_digits = 17);

}  // namespace mtsim
