#include "nd/manifest.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <unordered_set>

#include "nd/error.hpp"

namespace nd {

using nlohmann::json;

namespace {

[[noreturn]] void malformed(const std::string& what) {
  throw Error(ErrorCode::MalformedManifest, "manifest.json: " + what);
}

const json& require(const json& object, const char* key, const std::string& where) {
  auto it = object.find(key);
  if (it == object.end()) malformed(where + " is missing key '" + key + "'");
  return *it;
}

std::string require_string(const json& object, const char* key, const std::string& where) {
  const json& value = require(object, key, where);
  if (!value.is_string()) malformed(where + "." + key + " must be a string");
  return value.get<std::string>();
}

std::uint32_t require_index(const json& value, const std::string& where) {
  if (!value.is_number_unsigned()) malformed(where + " must be a non-negative integer");
  auto raw = value.get<std::uint64_t>();
  if (raw > UINT32_MAX) malformed(where + " is out of range");
  return static_cast<std::uint32_t>(raw);
}

bool is_safe_relative(const std::string& path) {
  std::filesystem::path p(path);
  if (path.empty() || p.is_absolute() || p.has_root_name()) return false;
  return std::none_of(p.begin(), p.end(), [](const auto& part) { return part == ".."; });
}

}  // namespace

std::string_view to_string(Tag tag) {
  switch (tag) {
    case Tag::benign: return "benign";
    case Tag::adversarial: return "adversarial";
    case Tag::unspecified: return "unspecified";
  }
  return "unspecified";
}

Tag parse_tag(std::string_view text) {
  if (text == "benign") return Tag::benign;
  if (text == "adversarial") return Tag::adversarial;
  if (text == "unspecified") return Tag::unspecified;
  malformed("unknown instance tag '" + std::string(text) + "'");
}

bool is_hex_color(std::string_view color) {
  if (!color.empty() && color.front() == '#') color.remove_prefix(1);
  return color.size() == 6 &&
         std::all_of(color.begin(), color.end(),
                     [](unsigned char c) { return std::isxdigit(c) != 0; });
}

void Manifest::validate() {
  std::unordered_set<std::string> seen_names;
  if (layers.empty()) malformed("no layers declared");
  for (const auto& layer : layers) {
    if (layer.name.empty()) malformed("layer with empty name");
    if (layer.name.find_first_of("/\\") != std::string::npos || layer.name == "." ||
        layer.name == "..") {
      malformed("layer name '" + layer.name + "' is not a valid file name");
    }
    if (layer.neuron_count == 0) malformed("layer '" + layer.name + "' has neuron_count 0");
    if (!seen_names.insert(layer.name).second) {
      throw Error(ErrorCode::DuplicateId, "manifest.json: duplicate layer name '" + layer.name + "'");
    }
  }

  seen_names.clear();
  for (const auto& cls : classes) {
    if (!seen_names.insert(cls.name).second) {
      throw Error(ErrorCode::DuplicateId, "manifest.json: duplicate class name '" + cls.name + "'");
    }
    if (!is_hex_color(cls.color)) {
      malformed("class '" + cls.name + "' has invalid color '" + cls.color + "'");
    }
  }

  std::vector<bool> present(instances.size(), false);
  for (const auto& inst : instances) {
    const auto id = inst.id.value;
    if (id >= instances.size()) {
      malformed("instance ids must be dense 0..N-1 (found " + std::to_string(id) + ")");
    }
    if (present[id]) {
      throw Error(ErrorCode::DuplicateId, "manifest.json: duplicate instance id " + std::to_string(id));
    }
    present[id] = true;
    if (inst.class_id.value >= classes.size()) {
      malformed("instance " + std::to_string(id) + " has unknown class_id " +
                std::to_string(inst.class_id.value));
    }
    if (inst.thumbnail && !is_safe_relative(*inst.thumbnail)) {
      malformed("instance " + std::to_string(id) + " thumbnail must be a relative path inside the dump");
    }
  }
  std::sort(instances.begin(), instances.end(),
            [](const InstanceMeta& a, const InstanceMeta& b) { return a.id < b.id; });

  for (const auto& inst : instances) {
    const std::string who = "instance " + std::to_string(inst.id.value);
    if (inst.tag == Tag::adversarial && !inst.paired_with) {
      malformed(who + " is adversarial but has no paired_with");
    }
    if (!inst.paired_with) continue;
    if (inst.tag == Tag::unspecified) malformed(who + " has paired_with but no benign/adversarial tag");
    const auto partner = inst.paired_with->value;
    if (partner >= instances.size() || partner == inst.id.value) {
      malformed(who + " paired_with names an invalid instance");
    }
    const Tag expected = inst.tag == Tag::adversarial ? Tag::benign : Tag::adversarial;
    if (instances[partner].tag != expected) {
      malformed(who + " is " + std::string(to_string(inst.tag)) + " but its pair " +
                std::to_string(partner) + " is not " + std::string(to_string(expected)));
    }
  }
}

json to_json(const Manifest& manifest) {
  json layers = json::array();
  for (const auto& layer : manifest.layers) {
    layers.push_back({{"name", layer.name}, {"neuron_count", layer.neuron_count}});
  }
  json classes = json::array();
  for (const auto& cls : manifest.classes) {
    classes.push_back({{"name", cls.name}, {"color", cls.color}});
  }
  json instances = json::array();
  for (const auto& inst : manifest.instances) {
    json entry = {{"id", inst.id.value},
                  {"class_id", inst.class_id.value},
                  {"tag", std::string(to_string(inst.tag))}};
    if (inst.paired_with) entry["paired_with"] = inst.paired_with->value;
    if (inst.thumbnail) entry["thumbnail"] = *inst.thumbnail;
    instances.push_back(std::move(entry));
  }
  return {{"dataset_name", manifest.dataset_name},
          {"layers", std::move(layers)},
          {"classes", std::move(classes)},
          {"instances", std::move(instances)}};
}

Manifest manifest_from_json(const json& root) {
  if (!root.is_object()) malformed("top level must be an object");
  Manifest manifest;
  manifest.dataset_name = require_string(root, "dataset_name", "manifest");

  const json& layers = require(root, "layers", "manifest");
  const json& classes = require(root, "classes", "manifest");
  const json& instances = require(root, "instances", "manifest");
  if (!layers.is_array() || !classes.is_array() || !instances.is_array()) {
    malformed("layers, classes and instances must be arrays");
  }

  for (std::size_t i = 0; i < layers.size(); ++i) {
    const std::string where = "layers[" + std::to_string(i) + "]";
    if (!layers[i].is_object()) malformed(where + " must be an object");
    LayerMeta layer;
    layer.name = require_string(layers[i], "name", where);
    layer.neuron_count = require_index(require(layers[i], "neuron_count", where), where + ".neuron_count");
    manifest.layers.push_back(std::move(layer));
  }
  for (std::size_t i = 0; i < classes.size(); ++i) {
    const std::string where = "classes[" + std::to_string(i) + "]";
    if (!classes[i].is_object()) malformed(where + " must be an object");
    manifest.classes.push_back(
        {require_string(classes[i], "name", where), require_string(classes[i], "color", where)});
  }
  for (std::size_t i = 0; i < instances.size(); ++i) {
    const std::string where = "instances[" + std::to_string(i) + "]";
    const json& entry = instances[i];
    if (!entry.is_object()) malformed(where + " must be an object");
    InstanceMeta inst;
    inst.id = InstanceId{require_index(require(entry, "id", where), where + ".id")};
    inst.class_id = ClassId{require_index(require(entry, "class_id", where), where + ".class_id")};
    inst.tag = entry.contains("tag") ? parse_tag(require_string(entry, "tag", where)) : Tag::unspecified;
    if (auto it = entry.find("paired_with"); it != entry.end() && !it->is_null()) {
      inst.paired_with = InstanceId{require_index(*it, where + ".paired_with")};
    }
    if (auto it = entry.find("thumbnail"); it != entry.end() && !it->is_null()) {
      if (!it->is_string()) malformed(where + ".thumbnail must be a string");
      inst.thumbnail = it->get<std::string>();
    }
    manifest.instances.push_back(std::move(inst));
  }

  manifest.validate();
  return manifest;
}

}  // namespace nd
