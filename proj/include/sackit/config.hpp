#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>

#include <nlohmann/json.hpp>

#include "sackit/detection.hpp"
#include "sackit/eval.hpp"
#include "sackit/model.hpp"
#include "sackit/synth.hpp"

namespace sackit {

/// Settings shared by all subcommands. The file form is a JSON object with
/// optional sections "detection", "model", "shear", "synth", "eval" and a
/// top-level "seed"; unknown keys are rejected.
struct Config {
  DetectionParams detection;
  ModelParams model;
  ModelShearOptions model_shear;
  DataShearOptions data_shear;
  SynthConfig synth;
  SweepOptions eval;
  std::uint64_t seed = 1;

  /// Re-checks every module invariant; throws StructuralError.
  void validate() const;
};

/// Applies the keys present in `j` on top of `base`. Throws ParseError on
/// unknown keys or wrong value types.
Config config_from_json(const nlohmann::json& j, Config base = {});
nlohmann::json to_json(const Config& config);

/// Reads and validates a config file.
Config load_config(const std::filesystem::path& path);

/// Environment variable naming the config file used when none is given.
inline constexpr char kConfigEnv[] = "SACKIT_CONFIG";

/// Explicit path if given, else $SACKIT_CONFIG if set, else defaults.
Config resolve_config(const std::optional<std::filesystem::path>& explicit_path);

}  // namespace sackit
