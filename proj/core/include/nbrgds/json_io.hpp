#pragma once

#include <nlohmann/json.hpp>

#include "nbrgds/inference.hpp"
#include "nbrgds/mask.hpp"
#include "nbrgds/model.hpp"

namespace nbrgds {

inline constexpr const char* kStateSchema = "nbrgds.latent_state/1";
inline constexpr const char* kMaskSchema = "nbrgds.mask/1";
inline constexpr int kConfigSchemaVersion = 1;

using Json = nlohmann::json;

Json to_json(const ModelConfig& config);
/// Reads the recognised keys of `j` on top of `base`; unknown keys are
/// rejected with ConfigError.
ModelConfig model_config_from_json(const Json& j, ModelConfig base = {});

Json to_json(const Schedule& schedule);
Schedule schedule_from_json(const Json& j, Schedule base = {});

/// Community allocations are working variables of the sampler and are not
/// stored.
Json to_json(const LatentState& state);
LatentState latent_state_from_json(const Json& j);

Json to_json(const MaskSpec& mask, int V, int T);
MaskSpec mask_from_json(const Json& j);

Json to_json(const Metrics& metrics);

}  // namespace nbrgds
