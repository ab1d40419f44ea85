#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include "nd/ids.hpp"
#include "nd/manifest.hpp"

namespace nd {

/// On-disk layout of `activations/<layer>.f32`.
namespace activation_file {
inline constexpr char kMagic[4] = {'N', 'D', 'A', 'C'};
inline constexpr std::uint32_t kVersion = 1;
inline constexpr std::size_t kHeaderBytes = 16;
}  // namespace activation_file

/// Immutable, fully validated activations for every (layer, instance, neuron),
/// plus the manifest describing them. Each layer is a row-major
/// [instance_count x neuron_count] float32 matrix; row i belongs to instance i.
class ActivationStore {
 public:
  /// Validates the manifest and the matrices (shape, finiteness).
  ActivationStore(Manifest manifest, std::vector<std::vector<float>> layers);

  /// Reads `manifest.json` and `activations/<layer>.f32` from a dump directory.
  static ActivationStore ingest(const std::filesystem::path& dump_directory);

  const Manifest& manifest() const noexcept { return manifest_; }

  std::size_t layer_count() const noexcept { return manifest_.layers.size(); }
  std::size_t class_count() const noexcept { return manifest_.classes.size(); }
  std::size_t instance_count() const noexcept { return manifest_.instances.size(); }

  std::size_t neuron_count(LayerId layer) const;

  /// One instance's row. Values are exactly the ingested floats.
  std::span<const float> activation_vector(LayerId layer, InstanceId instance) const;

  float value(LayerId layer, InstanceId instance, std::size_t neuron) const {
    return activation_vector(layer, instance)[neuron];
  }

  /// The whole row-major matrix of a layer.
  std::span<const float> layer_matrix(LayerId layer) const;

  /// Ascending ids of the instances labeled with `cls`. Empty is allowed.
  std::vector<InstanceId> instances_of_class(ClassId cls) const;

  LayerId layer_id(std::string_view name) const;
  ClassId class_id(std::string_view name) const;

  void check(LayerId layer) const;
  void check(ClassId cls) const;
  void check(InstanceId instance) const;

  const LayerMeta& layer(LayerId layer) const;
  const ClassMeta& class_meta(ClassId cls) const;
  const InstanceMeta& instance(InstanceId instance) const;

  bool operator==(const ActivationStore&) const = default;

 private:
  Manifest manifest_;
  std::vector<std::vector<float>> layers_;
};

/// Writes a dump directory (manifest + one activation file per layer) in the
/// format ingest() reads. Used by the synthetic generator.
void write_dump(const std::filesystem::path& dump_directory, const Manifest& manifest,
                const std::vector<std::vector<float>>& layers);

}  // namespace nd
