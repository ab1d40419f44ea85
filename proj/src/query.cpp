#include "nd/query.hpp"

#include <algorithm>
#include <numeric>

#include "nd/distribution.hpp"

namespace nd {

std::vector<double> resolve_item(const ActivationStore& store, LayerId layer, const SortItem& item) {
  if (const auto* median = std::get_if<ClassMedianItem>(&item)) {
    return median_vector(store, layer, median->id);
  }
  const auto row = store.activation_vector(layer, std::get<InstanceItem>(item).id);
  return {row.begin(), row.end()};
}

std::vector<double> sort_keys(const ActivationStore& store, LayerId layer, const SortKey& key) {
  if (const auto* item = std::get_if<SortItem>(&key)) return resolve_item(store, layer, *item);
  const auto& diff = std::get<DifferenceKey>(key);
  auto keys = resolve_item(store, layer, diff.a);
  const auto rhs = resolve_item(store, layer, diff.b);
  for (std::size_t n = 0; n < keys.size(); ++n) keys[n] -= rhs[n];
  return keys;
}

NeuronOrder order_by_keys(std::span<const double> keys, Direction direction) {
  NeuronOrder order;
  order.permutation.resize(keys.size());
  std::iota(order.permutation.begin(), order.permutation.end(), std::size_t{0});
  if (direction == Direction::descending) {
    std::stable_sort(order.permutation.begin(), order.permutation.end(),
                     [&](std::size_t a, std::size_t b) { return keys[a] > keys[b]; });
  } else {
    std::stable_sort(order.permutation.begin(), order.permutation.end(),
                     [&](std::size_t a, std::size_t b) { return keys[a] < keys[b]; });
  }
  order.keys.reserve(keys.size());
  for (auto n : order.permutation) order.keys.push_back(keys[n]);
  return order;
}

NeuronOrder sort_neurons(const ActivationStore& store, LayerId layer, const SortSpec& spec) {
  const auto keys = sort_keys(store, layer, spec.key);
  return order_by_keys(keys, spec.direction);
}

}  // namespace nd
