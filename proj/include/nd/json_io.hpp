#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "nd/activation_store.hpp"
#include "nd/distribution.hpp"
#include "nd/divergence.hpp"
#include "nd/query.hpp"

// JSON shapes returned by the HTTP API and printed by the CLI. Both go
// through these functions so their output is byte-identical.
namespace nd::json_io {

/// A float as a JSON number whose text is the shortest decimal that parses
/// back to the same float.
nlohmann::json float_number(float value);

/// Serialized body: compact JSON followed by a newline.
std::string body(const nlohmann::json& json);

/// Manifest plus a `thumbnail_url` for every instance that has a thumbnail.
nlohmann::json manifest(const ActivationStore& store);

std::string thumbnail_url(InstanceId instance);

/// One overlaid subset; `label` is the selector the caller used.
nlohmann::json subset_distribution(const ActivationStore& store, const LayerDistribution& dist,
                                   std::string_view label);

nlohmann::json layer_distributions(const ActivationStore& store, LayerId layer,
                                   const std::vector<std::pair<std::string, LayerDistribution>>& subsets);

nlohmann::json neuron_order(const ActivationStore& store, LayerId layer, std::string_view key,
                            Direction direction, const NeuronOrder& order);

nlohmann::json divergence_report(const ActivationStore& store, const DivergenceReport& report);

nlohmann::json roc_table(const RocTable& table);

}  // namespace nd::json_io
