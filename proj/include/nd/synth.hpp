#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "nd/manifest.hpp"

namespace nd {

/// Parameters of the synthetic benchmark dump.
///
/// Each class draws every neuron from N(mean, sigma^2); along each neuron the
/// class means sit on a ladder spaced `separation * sigma` apart (rung order
/// shuffled per neuron). The first `pairs` instances of every class are tagged
/// benign and each gets an adversarial partner: its own activations plus a
/// small perturbation, labeled with the next class (the class the model is
/// fooled into).
struct SynthConfig {
  std::uint32_t classes = 2;
  std::uint32_t neurons = 16;
  std::uint32_t instances = 200;  // per class, excluding adversarial partners
  std::uint32_t pairs = 100;      // benign/adversarial pairs per class
  std::uint32_t layers = 2;
  double separation = 4.0;
  double sigma = 1.0;
  double perturbation = 0.1;  // in units of sigma
  std::uint64_t seed = 7;
  bool thumbnails = true;
};

struct SynthDump {
  Manifest manifest;
  std::vector<std::vector<float>> layers;
  /// Raw 24-bit BMP bytes keyed by the manifest thumbnail path.
  std::vector<std::pair<std::string, std::string>> thumbnails;
};

/// Deterministic in `config`. Throws nd::Error(MalformedSpec) for invalid
/// parameters.
SynthDump generate_synthetic(const SynthConfig& config);

void write_synthetic(const std::filesystem::path& dump_directory, const SynthDump& dump);

/// Names used for the first ten classes; further classes are "class_<i>".
std::string synth_class_name(std::uint32_t index);
std::string synth_class_color(std::uint32_t index);

}  // namespace nd
