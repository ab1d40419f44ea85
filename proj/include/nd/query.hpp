#pragma once

#include <cstddef>
#include <span>
#include <variant>
#include <vector>

#include "nd/activation_store.hpp"
#include "nd/ids.hpp"

namespace nd {

struct ClassMedianItem {
  ClassId id;
};
struct InstanceItem {
  InstanceId id;
};
/// A per-neuron vector usable as a sort key.
using SortItem = std::variant<ClassMedianItem, InstanceItem>;

/// Element-wise a - b.
struct DifferenceKey {
  SortItem a;
  SortItem b;
};
using SortKey = std::variant<SortItem, DifferenceKey>;

enum class Direction { descending, ascending };

struct SortSpec {
  SortKey key;
  Direction direction = Direction::descending;
};

struct NeuronOrder {
  std::vector<std::size_t> permutation;  // neuron indices, display order
  std::vector<double> keys;              // sort key of permutation[i]
};

std::vector<double> resolve_item(const ActivationStore& store, LayerId layer, const SortItem& item);

std::vector<double> sort_keys(const ActivationStore& store, LayerId layer, const SortKey& key);

/// Orders neuron indices by key; equal keys keep ascending index order.
NeuronOrder order_by_keys(std::span<const double> keys, Direction direction);

NeuronOrder sort_neurons(const ActivationStore& store, LayerId layer, const SortSpec& spec);

}  // namespace nd
