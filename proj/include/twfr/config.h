#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <json.hpp>
#include <optional>
#include <string>
#include <string_view>

#include "twfr/smote.h"
#include "twfr/spectrogram.h"

namespace twfr {

// EM settings shared by every section of a machine; k and the seed are
// supplied separately.
struct EmSettings {
  double reg_covar = 1e-6;
  double tol = 1e-3;
  int max_iter = 100;
  int n_init = 1;
};

struct MachineConfig {
  double r = 1.0;
  int k = 1;
  // Engaged when target-domain oversampling is enabled. target_count == 0
  // means max(source count, target count).
  std::optional<SmoteOptions> smote;
  SpectrogramConfig spectrogram;
  EmSettings em;
  bool include_component_weight = false;

  void validate() const;
};

// r tuned per machine type on the DCASE 2022 Task 2 development set.
// Lookup is case-insensitive; unknown machines yield nullopt.
std::optional<double> preset_r(std::string_view machine);

nlohmann::json to_json(const MachineConfig& cfg);
// Overlays the keys present in `block` onto cfg. Unknown keys, wrong types
// and out-of-range values throw ConfigError naming the offending key path.
void apply_machine_block(MachineConfig& cfg, const nlohmann::json& block,
                         std::string_view where = "machine");

// Config file (JSON):
//   { "seed": 0, "p": 0.1,
//     "defaults": { <machine block> },
//     "machines": { "<name>": { <machine block> }, ... } }
// Resolution order for a machine: built-in defaults, preset r, "defaults",
// then the machine's own block.
class PipelineConfig {
 public:
  std::uint64_t seed = 0;
  double p = 0.1;

  static PipelineConfig from_json(const nlohmann::json& j);
  static PipelineConfig load(const std::filesystem::path& path);

  MachineConfig machine(std::string_view name) const;

 private:
  nlohmann::json defaults_ = nlohmann::json::object();
  std::map<std::string, nlohmann::json> machines_;  // keys lower-cased
};

}  // namespace twfr
