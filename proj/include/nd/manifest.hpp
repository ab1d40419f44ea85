#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "nd/ids.hpp"

namespace nd {

enum class Tag { benign, adversarial, unspecified };

std::string_view to_string(Tag tag);
Tag parse_tag(std::string_view text);

struct LayerMeta {
  std::string name;
  std::uint32_t neuron_count = 0;

  bool operator==(const LayerMeta&) const = default;
};

struct ClassMeta {
  std::string name;
  std::string color;  // "#rrggbb" or "rrggbb"

  bool operator==(const ClassMeta&) const = default;
};

struct InstanceMeta {
  InstanceId id;
  ClassId class_id;
  Tag tag = Tag::unspecified;
  std::optional<InstanceId> paired_with;
  std::optional<std::string> thumbnail;  // relative to the dump directory

  bool operator==(const InstanceMeta&) const = default;
};

/// Dataset description: the layer, class and instance universes. After
/// validate() the instances are sorted so that instances[i].id == i.
struct Manifest {
  std::string dataset_name;
  std::vector<LayerMeta> layers;
  std::vector<ClassMeta> classes;
  std::vector<InstanceMeta> instances;

  bool operator==(const Manifest&) const = default;

  /// Checks every structural invariant and sorts instances by id.
  /// Throws nd::Error (DuplicateId or MalformedManifest).
  void validate();
};

bool is_hex_color(std::string_view color);

nlohmann::json to_json(const Manifest& manifest);
/// Parses and validates. Unknown keys are ignored.
Manifest manifest_from_json(const nlohmann::json& json);

}  // namespace nd
