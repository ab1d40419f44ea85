#include "nd/activation_store.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include "nd/error.hpp"

namespace nd {

namespace fs = std::filesystem;

namespace {

std::uint32_t read_u32_le(const unsigned char* bytes) {
  return static_cast<std::uint32_t>(bytes[0]) | (static_cast<std::uint32_t>(bytes[1]) << 8) |
         (static_cast<std::uint32_t>(bytes[2]) << 16) | (static_cast<std::uint32_t>(bytes[3]) << 24);
}

void append_u32_le(std::string& out, std::uint32_t value) {
  for (int shift = 0; shift < 32; shift += 8) out.push_back(static_cast<char>((value >> shift) & 0xFF));
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::MissingFile, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

[[noreturn]] void header_mismatch(const fs::path& path, const std::string& what) {
  throw Error(ErrorCode::HeaderMismatch, path.string() + ": " + what);
}

std::vector<float> parse_activation_file(const fs::path& path, const LayerMeta& layer,
                                         std::size_t instance_count) {
  const std::string bytes = read_file(path);
  if (bytes.size() < activation_file::kHeaderBytes) {
    header_mismatch(path, "file shorter than the 16-byte header");
  }
  const auto* raw = reinterpret_cast<const unsigned char*>(bytes.data());
  if (std::memcmp(raw, activation_file::kMagic, 4) != 0) header_mismatch(path, "bad magic (expected NDAC)");
  const std::uint32_t version = read_u32_le(raw + 4);
  if (version != activation_file::kVersion) {
    header_mismatch(path, "unsupported format version " + std::to_string(version));
  }
  const std::uint32_t rows = read_u32_le(raw + 8);
  const std::uint32_t cols = read_u32_le(raw + 12);
  if (rows != instance_count || cols != layer.neuron_count) {
    std::ostringstream msg;
    msg << "header declares shape [" << rows << " x " << cols << "] but manifest expects ["
        << instance_count << " x " << layer.neuron_count << "]";
    header_mismatch(path, msg.str());
  }
  const std::size_t expected = activation_file::kHeaderBytes + 4 * std::size_t{rows} * cols;
  if (bytes.size() != expected) {
    header_mismatch(path, "file is " + std::to_string(bytes.size()) + " bytes, expected " +
                              std::to_string(expected));
  }

  std::vector<float> values(std::size_t{rows} * cols);
  const unsigned char* payload = raw + activation_file::kHeaderBytes;
  for (std::size_t i = 0; i < values.size(); ++i) {
    values[i] = std::bit_cast<float>(read_u32_le(payload + 4 * i));
  }
  return values;
}

}  // namespace

ActivationStore::ActivationStore(Manifest manifest, std::vector<std::vector<float>> layers)
    : manifest_(std::move(manifest)), layers_(std::move(layers)) {
  manifest_.validate();
  if (layers_.size() != manifest_.layers.size()) {
    throw Error(ErrorCode::HeaderMismatch, "expected " + std::to_string(manifest_.layers.size()) +
                                               " activation matrices, got " +
                                               std::to_string(layers_.size()));
  }
  const std::size_t rows = manifest_.instances.size();
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto& meta = manifest_.layers[l];
    const auto& matrix = layers_[l];
    if (matrix.size() != rows * meta.neuron_count) {
      throw Error(ErrorCode::HeaderMismatch, "layer '" + meta.name + "' has " +
                                                 std::to_string(matrix.size()) + " values, expected " +
                                                 std::to_string(rows * meta.neuron_count));
    }
    auto bad = std::find_if(matrix.begin(), matrix.end(), [](float v) { return !std::isfinite(v); });
    if (bad != matrix.end()) {
      const auto offset = static_cast<std::size_t>(bad - matrix.begin());
      std::ostringstream msg;
      msg << "non-finite activation " << *bad << " at layer '" << meta.name << "', instance "
          << offset / meta.neuron_count << ", neuron " << offset % meta.neuron_count;
      throw Error(ErrorCode::NonFiniteValue, msg.str());
    }
  }
}

ActivationStore ActivationStore::ingest(const fs::path& dump_directory) {
  const fs::path manifest_path = dump_directory / "manifest.json";
  if (!fs::is_regular_file(manifest_path)) {
    throw Error(ErrorCode::MissingFile, "missing " + manifest_path.string());
  }
  nlohmann::json root;
  try {
    root = nlohmann::json::parse(read_file(manifest_path));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::MalformedManifest, manifest_path.string() + ": " + e.what());
  }
  Manifest manifest = manifest_from_json(root);

  std::vector<std::vector<float>> layers;
  layers.reserve(manifest.layers.size());
  for (const auto& layer : manifest.layers) {
    const fs::path path = dump_directory / "activations" / (layer.name + ".f32");
    if (!fs::is_regular_file(path)) throw Error(ErrorCode::MissingFile, "missing " + path.string());
    layers.push_back(parse_activation_file(path, layer, manifest.instances.size()));
  }
  return ActivationStore(std::move(manifest), std::move(layers));
}

std::size_t ActivationStore::neuron_count(LayerId layer) const { return this->layer(layer).neuron_count; }

std::span<const float> ActivationStore::activation_vector(LayerId layer, InstanceId instance) const {
  check(instance);
  const std::size_t width = neuron_count(layer);
  return std::span<const float>(layers_[layer.value]).subspan(instance.value * width, width);
}

std::span<const float> ActivationStore::layer_matrix(LayerId layer) const {
  check(layer);
  return layers_[layer.value];
}

std::vector<InstanceId> ActivationStore::instances_of_class(ClassId cls) const {
  check(cls);
  std::vector<InstanceId> members;
  for (const auto& inst : manifest_.instances) {
    if (inst.class_id == cls) members.push_back(inst.id);
  }
  return members;
}

LayerId ActivationStore::layer_id(std::string_view name) const {
  for (std::size_t i = 0; i < manifest_.layers.size(); ++i) {
    if (manifest_.layers[i].name == name) return LayerId{static_cast<std::uint32_t>(i)};
  }
  throw Error(ErrorCode::UnknownLayer, "unknown layer '" + std::string(name) + "'");
}

ClassId ActivationStore::class_id(std::string_view name) const {
  for (std::size_t i = 0; i < manifest_.classes.size(); ++i) {
    if (manifest_.classes[i].name == name) return ClassId{static_cast<std::uint32_t>(i)};
  }
  throw Error(ErrorCode::UnknownClass, "unknown class '" + std::string(name) + "'");
}

void ActivationStore::check(LayerId layer) const {
  if (layer.value >= manifest_.layers.size()) {
    throw Error(ErrorCode::UnknownLayer, "unknown layer id " + std::to_string(layer.value));
  }
}

void ActivationStore::check(ClassId cls) const {
  if (cls.value >= manifest_.classes.size()) {
    throw Error(ErrorCode::UnknownClass, "unknown class id " + std::to_string(cls.value));
  }
}

void ActivationStore::check(InstanceId instance) const {
  if (instance.value >= manifest_.instances.size()) {
    throw Error(ErrorCode::UnknownInstance, "unknown instance id " + std::to_string(instance.value));
  }
}

const LayerMeta& ActivationStore::layer(LayerId layer) const {
  check(layer);
  return manifest_.layers[layer.value];
}

const ClassMeta& ActivationStore::class_meta(ClassId cls) const {
  check(cls);
  return manifest_.classes[cls.value];
}

const InstanceMeta& ActivationStore::instance(InstanceId instance) const {
  check(instance);
  return manifest_.instances[instance.value];
}

void write_dump(const fs::path& dump_directory, const Manifest& manifest,
                const std::vector<std::vector<float>>& layers) {
  std::error_code ec;
  fs::create_directories(dump_directory / "activations", ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create " + dump_directory.string() + ": " + ec.message());

  {
    std::ofstream out(dump_directory / "manifest.json", std::ios::binary | std::ios::trunc);
    out << to_json(manifest).dump(2) << '\n';
    if (!out) throw Error(ErrorCode::IoError, "cannot write manifest.json");
  }

  const std::size_t rows = manifest.instances.size();
  for (std::size_t l = 0; l < manifest.layers.size(); ++l) {
    const auto& meta = manifest.layers[l];
    std::string bytes(activation_file::kMagic, 4);
    append_u32_le(bytes, activation_file::kVersion);
    append_u32_le(bytes, static_cast<std::uint32_t>(rows));
    append_u32_le(bytes, meta.neuron_count);
    bytes.reserve(bytes.size() + 4 * layers.at(l).size());
    for (float v : layers[l]) append_u32_le(bytes, std::bit_cast<std::uint32_t>(v));

    const fs::path path = dump_directory / "activations" / (meta.name + ".f32");
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  }
}

}  // namespace nd
