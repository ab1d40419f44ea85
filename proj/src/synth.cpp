#include "nd/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>

#include "nd/activation_store.hpp"
#include "nd/error.hpp"

namespace nd {

namespace {

constexpr std::array<const char*, 10> kClassNames = {"cat",  "dog",  "airplane", "automobile", "bird",
                                                     "deer", "frog", "horse",    "ship",       "truck"};
constexpr std::array<const char*, 10> kPalette = {"#ff7f0e", "#9467bd", "#1f77b4", "#2ca02c", "#8c564b",
                                                  "#e377c2", "#7f7f7f", "#bcbd22", "#17becf", "#d62728"};

constexpr int kThumbSide = 8;

void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xFF));
  out.push_back(static_cast<char>(v >> 8));
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int shift = 0; shift < 32; shift += 8) out.push_back(static_cast<char>((v >> shift) & 0xFF));
}

using Pixels = std::array<std::array<std::uint8_t, 3>, kThumbSide * kThumbSide>;

// Uncompressed 24-bit BMP; 8 pixels * 3 bytes per row needs no padding.
std::string encode_bmp(const Pixels& pixels) {
  constexpr std::uint32_t kPixelBytes = kThumbSide * kThumbSide * 3;
  std::string out = "BM";
  put_u32(out, 54 + kPixelBytes);
  put_u32(out, 0);
  put_u32(out, 54);
  put_u32(out, 40);
  put_u32(out, kThumbSide);
  put_u32(out, kThumbSide);
  put_u16(out, 1);
  put_u16(out, 24);
  put_u32(out, 0);
  put_u32(out, kPixelBytes);
  put_u32(out, 2835);
  put_u32(out, 2835);
  put_u32(out, 0);
  put_u32(out, 0);
  for (int y = kThumbSide - 1; y >= 0; --y) {
    for (int x = 0; x < kThumbSide; ++x) {
      const auto& px = pixels[y * kThumbSide + x];
      out.push_back(static_cast<char>(px[2]));  // BGR
      out.push_back(static_cast<char>(px[1]));
      out.push_back(static_cast<char>(px[0]));
    }
  }
  return out;
}

void check(bool ok, const char* what) {
  if (!ok) throw Error(ErrorCode::MalformedSpec, std::string("synth: ") + what);
}

}  // namespace

std::string synth_class_name(std::uint32_t index) {
  if (index < kClassNames.size()) return kClassNames[index];
  return "class_" + std::to_string(index);
}

std::string synth_class_color(std::uint32_t index) {
  if (index < kPalette.size()) return kPalette[index];
  // Odd multiplier: a bijection on 24-bit values, so colors stay distinct.
  const std::uint32_t rgb = (index * 0x9E3779u) & 0xFFFFFFu;
  char buffer[8];
  std::snprintf(buffer, sizeof buffer, "#%06x", rgb);
  return buffer;
}

SynthDump generate_synthetic(const SynthConfig& config) {
  check(config.classes >= 1, "need at least one class");
  check(config.neurons >= 1, "need at least one neuron");
  check(config.layers >= 1, "need at least one layer");
  check(config.pairs <= config.instances, "pairs cannot exceed instances per class");
  check(config.separation >= 0.0 && std::isfinite(config.separation), "separation must be >= 0");
  check(config.sigma > 0.0 && std::isfinite(config.sigma), "sigma must be > 0");
  check(config.perturbation >= 0.0 && std::isfinite(config.perturbation), "perturbation must be >= 0");

  const std::uint32_t pairs = config.classes >= 2 ? config.pairs : 0;
  const std::uint32_t k = config.classes;
  const std::uint32_t n = config.neurons;
  const std::size_t plain = std::size_t{k} * config.instances;
  const std::size_t total = plain + std::size_t{k} * pairs;

  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  SynthDump dump;
  auto& manifest = dump.manifest;
  char name[160];
  std::snprintf(name, sizeof name, "synthetic-k%u-n%u-m%u-sep%g-seed%llu", k, n, config.instances,
                config.separation, static_cast<unsigned long long>(config.seed));
  manifest.dataset_name = name;
  for (std::uint32_t l = 0; l < config.layers; ++l) {
    manifest.layers.push_back({"dense_" + std::to_string(l + 1), n});
  }
  for (std::uint32_t c = 0; c < k; ++c) manifest.classes.push_back({synth_class_name(c), synth_class_color(c)});

  // Instance ids: class blocks first, then the adversarial partners.
  for (std::uint32_t c = 0; c < k; ++c) {
    for (std::uint32_t i = 0; i < config.instances; ++i) {
      const auto id = static_cast<std::uint32_t>(std::size_t{c} * config.instances + i);
      manifest.instances.push_back({InstanceId{id}, ClassId{c}, Tag::unspecified, std::nullopt, std::nullopt});
    }
  }
  std::vector<std::pair<std::uint32_t, std::uint32_t>> pair_ids;  // (benign, adversarial)
  for (std::uint32_t c = 0; c < k; ++c) {
    for (std::uint32_t i = 0; i < pairs; ++i) {
      const auto benign = static_cast<std::uint32_t>(std::size_t{c} * config.instances + i);
      const auto adversarial = static_cast<std::uint32_t>(plain + std::size_t{c} * pairs + i);
      manifest.instances[benign].tag = Tag::benign;
      manifest.instances[benign].paired_with = InstanceId{adversarial};
      manifest.instances.push_back({InstanceId{adversarial}, ClassId{(c + 1) % k}, Tag::adversarial,
                                    InstanceId{benign}, std::nullopt});
      pair_ids.emplace_back(benign, adversarial);
    }
  }

  for (std::uint32_t l = 0; l < config.layers; ++l) {
    // means[c * n + j]
    std::vector<double> means(std::size_t{k} * n);
    std::vector<std::uint32_t> rungs(k);
    for (std::uint32_t j = 0; j < n; ++j) {
      std::iota(rungs.begin(), rungs.end(), 0u);
      std::shuffle(rungs.begin(), rungs.end(), rng);
      for (std::uint32_t c = 0; c < k; ++c) {
        means[std::size_t{c} * n + j] =
            config.separation * config.sigma * (static_cast<double>(rungs[c]) - (k - 1) / 2.0);
      }
    }

    std::vector<float> matrix(total * n);
    for (std::uint32_t c = 0; c < k; ++c) {
      for (std::uint32_t i = 0; i < config.instances; ++i) {
        const std::size_t row = std::size_t{c} * config.instances + i;
        for (std::uint32_t j = 0; j < n; ++j) {
          matrix[row * n + j] =
              static_cast<float>(means[std::size_t{c} * n + j] + config.sigma * normal(rng));
        }
      }
    }
    for (const auto& [benign, adversarial] : pair_ids) {
      for (std::uint32_t j = 0; j < n; ++j) {
        matrix[std::size_t{adversarial} * n + j] = static_cast<float>(
            matrix[std::size_t{benign} * n + j] + config.perturbation * config.sigma * normal(rng));
      }
    }
    dump.layers.push_back(std::move(matrix));
  }

  if (config.thumbnails) {
    std::uniform_int_distribution<int> byte(0, 255);
    std::uniform_int_distribution<int> cell(0, kThumbSide * kThumbSide - 1);
    for (const auto& [benign, adversarial] : pair_ids) {
      Pixels pixels{};
      for (auto& px : pixels) {
        for (auto& channel : px) channel = static_cast<std::uint8_t>(byte(rng));
      }
      Pixels attacked = pixels;
      auto& target = attacked[cell(rng)];
      // Invert so the changed pixel always differs from the original.
      for (auto& channel : target) channel = static_cast<std::uint8_t>(255 - channel);

      for (auto [id, image] : {std::pair{benign, &pixels}, std::pair{adversarial, &attacked}}) {
        std::string path = "thumbnails/" + std::to_string(id) + ".bmp";
        manifest.instances[id].thumbnail = path;
        dump.thumbnails.emplace_back(std::move(path), encode_bmp(*image));
      }
    }
  }

  manifest.validate();
  return dump;
}

void write_synthetic(const std::filesystem::path& dump_directory, const SynthDump& dump) {
  write_dump(dump_directory, dump.manifest, dump.layers);
  if (dump.thumbnails.empty()) return;
  std::filesystem::create_directories(dump_directory / "thumbnails");
  for (const auto& [path, bytes] : dump.thumbnails) {
    std::ofstream out(dump_directory / path, std::ios::binary | std::ios::trunc);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + (dump_directory / path).string());
  }
}

}  // namespace nd
