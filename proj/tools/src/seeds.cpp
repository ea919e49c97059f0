#include "mtsim_tools/seeds.hpp"

#include "mtsim/rng.hpp"

namespace mtsim::tools {

std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t derive_trial_seed(std::uint64_t master_seed, std::string_view instance_id,
                                std::uint64_t trial_index) {
  const std::uint64_t stream = splitmix64(master_seed ^ splitmix64(fnv1a64(instance_id)));
  return splitmix64(stream + trial_index * 0x9e3779b97f4a7c15ULL);
}

}  // namespace mtsim::tools
