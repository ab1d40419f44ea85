#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "nd/activation_store.hpp"
#include "nd/ids.hpp"

namespace nd {

inline constexpr std::size_t kDefaultBinCount = 32;

struct DistributionConfig {
  std::size_t bin_count = kDefaultBinCount;
};

/// Uniform bin grid over [lo, hi]. Bins are half-open [e_i, e_{i+1}) except
/// the last, which also holds hi. When lo == hi the grid has one bin [lo, lo].
struct BinGrid {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t bin_count = 1;

  bool degenerate() const noexcept { return lo == hi; }

  /// Edge i for i in [0, bin_count]; edge(0) == lo and edge(bin_count) == hi.
  double edge(std::size_t i) const noexcept;
  std::vector<double> edges() const;

  /// Bin holding `value`, or nullopt when it lies outside [lo, hi].
  std::optional<std::size_t> bin_of(double value) const noexcept;

  bool operator==(const BinGrid&) const = default;
};

struct NeuronDistribution {
  BinGrid grid;
  std::vector<std::uint64_t> counts;
  std::vector<double> densities;  // counts / max(counts); all zero when empty
  std::optional<double> median;   // exact sample median; absent when empty
  std::uint64_t sample_count = 0;
};

struct ClassSubset {
  ClassId id;
};
struct InstancesSubset {
  std::vector<InstanceId> ids;
};
struct SingleSubset {
  InstanceId id;
};
using SubsetSpec = std::variant<ClassSubset, InstancesSubset, SingleSubset>;

struct LayerDistribution {
  LayerId layer;
  SubsetSpec subset;
  std::vector<NeuronDistribution> neurons;
};

/// Canonical per-neuron grids: range of each neuron over every instance in the
/// store. All subsets of a layer are binned against these.
std::vector<BinGrid> compute_grids(const ActivationStore& store, LayerId layer,
                                   const DistributionConfig& config = {});

/// Instance ids a subset refers to, validated. Explicit lists must be
/// non-empty and free of duplicates.
std::vector<InstanceId> resolve_subset(const ActivationStore& store, const SubsetSpec& subset);

LayerDistribution distribution(const ActivationStore& store, LayerId layer, const SubsetSpec& subset,
                               const DistributionConfig& config = {});

/// Same as above against precomputed canonical grids (one per neuron).
LayerDistribution distribution(const ActivationStore& store, LayerId layer, const SubsetSpec& subset,
                               std::span<const BinGrid> grids);

/// Per-neuron exact median over a class (midpoint of the central pair for
/// even sizes). Throws EmptyClass for classes without members.
std::vector<double> median_vector(const ActivationStore& store, LayerId layer, ClassId cls);

/// Per-neuron empirical quantile with linear interpolation between order
/// statistics. quantile(..., 0.5) is identical to median_vector.
std::vector<double> quantile(const ActivationStore& store, LayerId layer, ClassId cls, double p);

/// Quantile of already sorted samples (non-empty).
double sorted_quantile(std::span<const double> sorted, double p);

}  // namespace nd
