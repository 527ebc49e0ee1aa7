#pragma once

#include <json.hpp>

#include "boxdistill/augment.hpp"
#include "boxdistill/model.hpp"
#include "boxdistill/optimizer.hpp"
#include "boxdistill/synthetic.hpp"

// JSON (de)serialization for the declarative config structs. Missing keys
// keep the struct defaults so configs stay minimal.

namespace boxdistill {

using json = nlohmann::json;

void to_json(json& j, const ModelSpec& s);
void from_json(const json& j, ModelSpec& s);

void to_json(json& j, const OptimizerConfig& c);
void from_json(const json& j, OptimizerConfig& c);

void to_json(json& j, const SyntheticShiftSpec& s);
void from_json(const json& j, SyntheticShiftSpec& s);

void to_json(json& j, const AugmentationPolicy& p);
void from_json(const json& j, AugmentationPolicy& p);

/// FNV-1a hash of a canonical dump, as a fixed-width hex string. Used for
/// config identity in manifests.
std::string stable_hash(const json& j);

}  // namespace boxdistill
