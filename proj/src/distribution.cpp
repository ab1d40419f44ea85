#include "nd/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "nd/error.hpp"

namespace nd {

double BinGrid::edge(std::size_t i) const noexcept {
  if (i >= bin_count) return hi;
  return lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(bin_count);
}

std::vector<double> BinGrid::edges() const {
  std::vector<double> out(bin_count + 1);
  for (std::size_t i = 0; i <= bin_count; ++i) out[i] = edge(i);
  return out;
}

std::optional<std::size_t> BinGrid::bin_of(double value) const noexcept {
  if (!(value >= lo && value <= hi)) return std::nullopt;
  if (degenerate()) return 0;
  const double scaled = (value - lo) / (hi - lo) * static_cast<double>(bin_count);
  auto index = static_cast<std::size_t>(std::clamp(std::floor(scaled), 0.0, double(bin_count - 1)));
  // The closed-form guess can be off by one near an edge; the published
  // edges are authoritative.
  while (index > 0 && value < edge(index)) --index;
  while (index + 1 < bin_count && value >= edge(index + 1)) ++index;
  return index;
}

std::vector<BinGrid> compute_grids(const ActivationStore& store, LayerId layer,
                                   const DistributionConfig& config) {
  if (config.bin_count == 0) throw Error(ErrorCode::BadBinCount, "bin count must be positive");
  const std::size_t width = store.neuron_count(layer);
  const auto matrix = store.layer_matrix(layer);
  const std::size_t rows = store.instance_count();

  std::vector<BinGrid> grids(width);
  if (rows == 0) return grids;  // nothing observed: degenerate [0, 0]

  std::vector<float> lo(matrix.begin(), matrix.begin() + width);
  std::vector<float> hi = lo;
  for (std::size_t r = 1; r < rows; ++r) {
    const float* row = matrix.data() + r * width;
    for (std::size_t n = 0; n < width; ++n) {
      lo[n] = std::min(lo[n], row[n]);
      hi[n] = std::max(hi[n], row[n]);
    }
  }
  for (std::size_t n = 0; n < width; ++n) {
    grids[n].lo = lo[n];
    grids[n].hi = hi[n];
    grids[n].bin_count = lo[n] == hi[n] ? 1 : config.bin_count;
  }
  return grids;
}

std::vector<InstanceId> resolve_subset(const ActivationStore& store, const SubsetSpec& subset) {
  return std::visit(
      [&](const auto& spec) -> std::vector<InstanceId> {
        using T = std::decay_t<decltype(spec)>;
        if constexpr (std::is_same_v<T, ClassSubset>) {
          return store.instances_of_class(spec.id);
        } else if constexpr (std::is_same_v<T, SingleSubset>) {
          store.check(spec.id);
          return {spec.id};
        } else {
          if (spec.ids.empty()) throw Error(ErrorCode::EmptySubset, "explicit instance list is empty");
          std::unordered_set<InstanceId> seen;
          for (auto id : spec.ids) {
            store.check(id);
            if (!seen.insert(id).second) {
              throw Error(ErrorCode::DuplicateId,
                          "instance " + std::to_string(id.value) + " listed twice in subset");
            }
          }
          return spec.ids;
        }
      },
      subset);
}

LayerDistribution distribution(const ActivationStore& store, LayerId layer, const SubsetSpec& subset,
                               const DistributionConfig& config) {
  const auto grids = compute_grids(store, layer, config);
  return distribution(store, layer, subset, grids);
}

LayerDistribution distribution(const ActivationStore& store, LayerId layer, const SubsetSpec& subset,
                               std::span<const BinGrid> grids) {
  const std::size_t width = store.neuron_count(layer);
  const auto members = resolve_subset(store, subset);
  if (grids.size() != width) {
    throw Error(ErrorCode::LayerWidthMismatch, "grid count does not match layer width");
  }

  LayerDistribution result{layer, subset, {}};
  result.neurons.resize(width);
  for (std::size_t n = 0; n < width; ++n) {
    auto& dist = result.neurons[n];
    dist.grid = grids[n];
    dist.counts.assign(dist.grid.bin_count, 0);
    dist.densities.assign(dist.grid.bin_count, 0.0);
    dist.sample_count = members.size();
  }

  const auto matrix = store.layer_matrix(layer);
  std::vector<double> column(members.size());
  for (std::size_t n = 0; n < width; ++n) {
    auto& dist = result.neurons[n];
    for (std::size_t i = 0; i < members.size(); ++i) {
      const double v = matrix[members[i].value * width + n];
      column[i] = v;
      // In-store values always lie on the canonical grid.
      dist.counts[*dist.grid.bin_of(v)] += 1;
    }
    if (members.empty()) continue;

    const auto peak = *std::max_element(dist.counts.begin(), dist.counts.end());
    for (std::size_t b = 0; b < dist.counts.size(); ++b) {
      dist.densities[b] = static_cast<double>(dist.counts[b]) / static_cast<double>(peak);
    }
    std::sort(column.begin(), column.end());
    dist.median = sorted_quantile(column, 0.5);
  }
  return result;
}

double sorted_quantile(std::span<const double> sorted, double p) {
  const std::size_t n = sorted.size();
  const double h = p * static_cast<double>(n - 1);
  const auto k = static_cast<std::size_t>(std::floor(h));
  if (k + 1 >= n) return sorted[n - 1];
  const double t = h - static_cast<double>(k);
  const double a = sorted[k];
  const double b = sorted[k + 1];
  if (t == 0.0 || a == b) return a;
  // (1-t)a + tb: for t = 0.5 this is the exact midpoint (a+b)/2.
  return std::clamp((1.0 - t) * a + t * b, a, b);
}

namespace {

std::vector<double> class_quantile(const ActivationStore& store, LayerId layer, ClassId cls, double p) {
  const std::size_t width = store.neuron_count(layer);
  const auto members = store.instances_of_class(cls);
  if (members.empty()) {
    throw Error(ErrorCode::EmptyClass, "class '" + store.class_meta(cls).name + "' has no instances");
  }
  const auto matrix = store.layer_matrix(layer);
  std::vector<double> out(width);
  std::vector<double> column(members.size());
  for (std::size_t n = 0; n < width; ++n) {
    for (std::size_t i = 0; i < members.size(); ++i) column[i] = matrix[members[i].value * width + n];
    std::sort(column.begin(), column.end());
    out[n] = sorted_quantile(column, p);
  }
  return out;
}

}  // namespace

std::vector<double> median_vector(const ActivationStore& store, LayerId layer, ClassId cls) {
  return class_quantile(store, layer, cls, 0.5);
}

std::vector<double> quantile(const ActivationStore& store, LayerId layer, ClassId cls, double p) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw Error(ErrorCode::BadProbability, "quantile probability must lie in [0, 1]");
  }
  return class_quantile(store, layer, cls, p);
}

}  // namespace nd
