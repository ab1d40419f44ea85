#include "nd/json_io.hpp"

#include <charconv>
#include <cstdlib>

namespace nd::json_io {

using nlohmann::json;

json float_number(float value) {
  char buffer[32];
  const auto result = std::to_chars(buffer, buffer + sizeof buffer, value);
  *result.ptr = '\0';
  const double parsed = std::strtod(buffer, nullptr);
  // Decimal -> double -> float could in principle double-round; fall back to
  // the exact widening in that case.
  if (static_cast<float>(parsed) == value) return parsed;
  return static_cast<double>(value);
}

std::string body(const json& value) { return value.dump() + "\n"; }

std::string thumbnail_url(InstanceId instance) {
  return "/api/thumbnails/" + std::to_string(instance.value);
}

json manifest(const ActivationStore& store) {
  json out = to_json(store.manifest());
  for (auto& entry : out["instances"]) {
    if (entry.contains("thumbnail")) {
      entry["thumbnail_url"] = thumbnail_url(InstanceId{entry["id"].get<std::uint32_t>()});
    }
  }
  return out;
}

json subset_distribution(const ActivationStore& store, const LayerDistribution& dist,
                         std::string_view label) {
  json out = {{"subset", std::string(label)}};
  std::visit(
      [&](const auto& spec) {
        using T = std::decay_t<decltype(spec)>;
        if constexpr (std::is_same_v<T, ClassSubset>) {
          out["kind"] = "class";
          out["class"] = store.class_meta(spec.id).name;
        } else if constexpr (std::is_same_v<T, SingleSubset>) {
          const auto& inst = store.instance(spec.id);
          out["kind"] = "instance";
          out["instance"] = spec.id.value;
          out["tag"] = std::string(to_string(inst.tag));
        } else {
          json ids = json::array();
          for (auto id : spec.ids) ids.push_back(id.value);
          out["kind"] = "instances";
          out["instances"] = std::move(ids);
        }
      },
      dist.subset);

  out["sample_count"] = dist.neurons.empty() ? 0 : dist.neurons.front().sample_count;
  json neurons = json::array();
  for (const auto& neuron : dist.neurons) {
    json entry = {{"edges", neuron.grid.edges()},
                  {"counts", neuron.counts},
                  {"densities", neuron.densities}};
    entry["median"] = neuron.median ? json(*neuron.median) : json(nullptr);
    neurons.push_back(std::move(entry));
  }
  out["neurons"] = std::move(neurons);

  if (const auto* single = std::get_if<SingleSubset>(&dist.subset)) {
    json values = json::array();
    for (float v : store.activation_vector(dist.layer, single->id)) values.push_back(float_number(v));
    out["values"] = std::move(values);
  }
  return out;
}

json layer_distributions(const ActivationStore& store, LayerId layer,
                         const std::vector<std::pair<std::string, LayerDistribution>>& subsets) {
  json list = json::array();
  for (const auto& [label, dist] : subsets) list.push_back(subset_distribution(store, dist, label));
  return {{"layer", store.layer(layer).name},
          {"neuron_count", store.neuron_count(layer)},
          {"subsets", std::move(list)}};
}

json neuron_order(const ActivationStore& store, LayerId layer, std::string_view key, Direction direction,
                  const NeuronOrder& order) {
  return {{"layer", store.layer(layer).name},
          {"key", std::string(key)},
          {"direction", direction == Direction::ascending ? "asc" : "desc"},
          {"permutation", order.permutation},
          {"keys", order.keys}};
}

json divergence_report(const ActivationStore& store, const DivergenceReport& report) {
  json layers = json::array();
  json layer_names = json::array();
  for (const auto& layer : report.layers) {
    const auto& name = store.layer(layer.layer).name;
    layer_names.push_back(name);
    layers.push_back({{"layer", name}, {"divergence", layer.divergence}, {"scores", layer.scores}});
  }
  return {{"instance", report.instance ? json(report.instance->value) : json(nullptr)},
          {"class", store.class_meta(report.class_id).name},
          {"divergence", report.divergence},
          {"layers", std::move(layers)},
          {"params",
           {{"layers", std::move(layer_names)}, {"bin_count", report.params.distribution.bin_count}}}};
}

json roc_table(const RocTable& table) {
  json points = json::array();
  for (const auto& p : table.points) {
    points.push_back({{"threshold", p.threshold}, {"tpr", p.tpr}, {"fpr", p.fpr}});
  }
  return {{"auc", table.auc},
          {"points", std::move(points)},
          {"benign_scores", table.benign_scores},
          {"attacked_scores", table.attacked_scores}};
}

}  // namespace nd::json_io
