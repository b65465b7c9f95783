#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include <json.hpp>

#include "vgcrl/ndmath/adam.hpp"

namespace vgcrl::nd {

// Parameter checkpoint schema ("vgcrl-checkpoint-v1"): a single JSON document
//   { "format": ...,
//     "params": { name: { "shape": [r, c], "data": [decimal doubles...] } },
//     "adam":   { name: { "m": [...], "v": [...], "step": n } },
//     "meta":   { free-form } }
// Doubles are written with shortest round-trip decimals, so save/load is
// bit-exact.

nlohmann::json params_to_json(std::span<Parameter* const> params);
void params_from_json(const nlohmann::json& doc, std::span<Parameter* const> params);

nlohmann::json adam_to_json(std::vector<std::pair<Parameter*, AdamState*>> slots);
void adam_from_json(const nlohmann::json& doc,
                    std::vector<std::pair<Parameter*, AdamState*>> slots);

void write_checkpoint_file(const std::filesystem::path& path, const nlohmann::json& doc);
nlohmann::json read_checkpoint_file(const std::filesystem::path& path);

}  // namespace vgcrl::nd
