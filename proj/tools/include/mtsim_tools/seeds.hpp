#pragma once

#include <cstdint>
#include <string_view>

namespace mtsim::tools {

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view s);

/// Per-trial seed: splitmix64(splitmix64(master ^ splitmix64(fnv1a64(id)))
/// + trial * golden). The outer splitmix64 is a bijection and the inner sum
/// is a bijection in `trial`, so trials of one instance never collide.
std::uint64_t derive_trial_seed(std::uint64_t master_seed, std::string_view instance_id,
                                std::uint64_t trial_index);

}  // namespace mtsim::tools
