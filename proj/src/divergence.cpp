#include "nd/divergence.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_set>

#include "nd/error.hpp"

namespace nd {

namespace {

// Class distributions for every layer in a parameter set, computed once per
// class on first use.
class ClassDistributions {
 public:
  ClassDistributions(const ActivationStore& store, const DivergenceParams& params)
      : store_(store), params_(params) {
    for (auto layer : params.layers) grids_.push_back(compute_grids(store, layer, params.distribution));
  }

  const std::vector<LayerDistribution>& get(ClassId cls) {
    auto it = cache_.find(cls.value);
    if (it != cache_.end()) return it->second;
    if (store_.instances_of_class(cls).empty()) {
      throw Error(ErrorCode::EmptyClass, "class '" + store_.class_meta(cls).name + "' has no instances");
    }
    std::vector<LayerDistribution> per_layer;
    for (std::size_t i = 0; i < params_.layers.size(); ++i) {
      per_layer.push_back(distribution(store_, params_.layers[i], ClassSubset{cls}, grids_[i]));
    }
    return cache_.emplace(cls.value, std::move(per_layer)).first->second;
  }

 private:
  const ActivationStore& store_;
  const DivergenceParams& params_;
  std::vector<std::vector<BinGrid>> grids_;
  std::map<std::uint32_t, std::vector<LayerDistribution>> cache_;
};

template <typename ValuesOf>
DivergenceReport score_with(const std::vector<LayerDistribution>& class_layers, ClassId cls,
                            const DivergenceParams& params, ValuesOf values_of) {
  DivergenceReport report;
  report.class_id = cls;
  report.params = params;
  double total = 0.0;
  for (std::size_t i = 0; i < params.layers.size(); ++i) {
    const auto& dist = class_layers[i];
    const std::span<const float> values = values_of(i);
    LayerDivergence layer{params.layers[i], std::vector<double>(values.size()), 0.0};
    double sum = 0.0;
    for (std::size_t n = 0; n < values.size(); ++n) {
      layer.scores[n] = neuron_score(dist.neurons[n], values[n]);
      sum += layer.scores[n];
    }
    layer.divergence = sum / static_cast<double>(values.size());
    total += layer.divergence;
    report.layers.push_back(std::move(layer));
  }
  report.divergence = total / static_cast<double>(params.layers.size());
  return report;
}

}  // namespace

DivergenceParams default_divergence_params(const ActivationStore& store) {
  DivergenceParams params;
  const auto count = static_cast<std::uint32_t>(store.layer_count());
  for (std::uint32_t l = count >= 2 ? count - 2 : 0; l < count; ++l) params.layers.push_back(LayerId{l});
  return params;
}

void validate(const ActivationStore& store, const DivergenceParams& params) {
  if (params.layers.empty()) throw Error(ErrorCode::EmptyLayerList, "layer list is empty");
  if (params.distribution.bin_count == 0) throw Error(ErrorCode::BadBinCount, "bin count must be positive");
  std::unordered_set<LayerId> seen;
  for (auto layer : params.layers) {
    store.check(layer);
    if (!seen.insert(layer).second) {
      throw Error(ErrorCode::DuplicateLayer, "layer '" + store.layer(layer).name + "' listed twice");
    }
  }
}

double neuron_score(const NeuronDistribution& class_distribution, double value) {
  const auto bin = class_distribution.grid.bin_of(value);
  if (!bin) return 1.0;
  return 1.0 - class_distribution.densities[*bin];
}

DivergenceReport score_instance(const ActivationStore& store, InstanceId instance, ClassId cls,
                                const DivergenceParams& params) {
  validate(store, params);
  store.check(instance);
  store.check(cls);
  ClassDistributions classes(store, params);
  auto report = score_with(classes.get(cls), cls, params, [&](std::size_t i) {
    return store.activation_vector(params.layers[i], instance);
  });
  report.instance = instance;
  return report;
}

DivergenceReport score_vector(const ActivationStore& store, std::span<const std::vector<float>> values,
                              ClassId cls, const DivergenceParams& params) {
  validate(store, params);
  store.check(cls);
  if (values.size() != params.layers.size()) {
    throw Error(ErrorCode::LayerWidthMismatch, "expected one activation vector per scored layer");
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto& meta = store.layer(params.layers[i]);
    if (values[i].size() != meta.neuron_count) {
      throw Error(ErrorCode::LayerWidthMismatch,
                  "layer '" + meta.name + "' has " + std::to_string(meta.neuron_count) +
                      " neurons but the supplied vector has " + std::to_string(values[i].size()));
    }
  }
  ClassDistributions classes(store, params);
  return score_with(classes.get(cls), cls, params,
                    [&](std::size_t i) { return std::span<const float>(values[i]); });
}

bool detect(const DivergenceReport& report, double threshold) {
  if (!(threshold >= 0.0 && threshold <= 1.0)) {
    throw Error(ErrorCode::BadThreshold, "threshold must lie in [0, 1]");
  }
  return report.divergence > threshold;
}

std::vector<double> uniform_thresholds(std::size_t count) {
  if (count < 2) throw Error(ErrorCode::BadThreshold, "threshold grid needs at least 2 points");
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i) {
    out[i] = static_cast<double>(i) / static_cast<double>(count - 1);
  }
  return out;
}

RocTable roc_from_scores(std::vector<double> benign, std::vector<double> attacked,
                         std::span<const double> thresholds) {
  if (benign.empty()) throw Error(ErrorCode::EmptySet, "benign set is empty");
  if (attacked.empty()) throw Error(ErrorCode::EmptySet, "attacked set is empty");
  if (thresholds.empty()) throw Error(ErrorCode::BadThreshold, "threshold grid is empty");
  std::vector<double> grid(thresholds.begin(), thresholds.end());
  if (!std::all_of(grid.begin(), grid.end(), [](double t) { return std::isfinite(t); })) {
    throw Error(ErrorCode::BadThreshold, "thresholds must be finite");
  }
  std::sort(grid.begin(), grid.end());

  const auto rate_above = [](const std::vector<double>& scores, double t) {
    const auto flagged = std::count_if(scores.begin(), scores.end(), [t](double s) { return s > t; });
    return static_cast<double>(flagged) / static_cast<double>(scores.size());
  };

  RocTable table;
  for (double t : grid) table.points.push_back({t, rate_above(attacked, t), rate_above(benign, t)});

  // Walk from the strictest threshold to the loosest: both rates grow.
  double auc = 0.0;
  double prev_fpr = 0.0;
  double prev_tpr = 0.0;
  for (auto it = table.points.rbegin(); it != table.points.rend(); ++it) {
    auc += (it->fpr - prev_fpr) * (it->tpr + prev_tpr) / 2.0;
    prev_fpr = it->fpr;
    prev_tpr = it->tpr;
  }
  auc += (1.0 - prev_fpr) * (1.0 + prev_tpr) / 2.0;
  table.auc = auc;
  table.benign_scores = std::move(benign);
  table.attacked_scores = std::move(attacked);
  return table;
}

ClassAssignment manifest_classes(const ActivationStore& store) {
  return [&store](InstanceId id) { return store.instance(id).class_id; };
}

RocTable sweep(const ActivationStore& store, std::span<const InstanceId> benign,
               std::span<const InstanceId> attacked, const ClassAssignment& assign,
               const DivergenceParams& params, std::span<const double> thresholds) {
  if (benign.empty()) throw Error(ErrorCode::EmptySet, "benign set is empty");
  if (attacked.empty()) throw Error(ErrorCode::EmptySet, "attacked set is empty");
  validate(store, params);

  ClassDistributions classes(store, params);
  const auto score_all = [&](std::span<const InstanceId> ids) {
    std::vector<double> scores;
    scores.reserve(ids.size());
    for (auto id : ids) {
      store.check(id);
      const ClassId cls = assign(id);
      store.check(cls);
      const auto report = score_with(classes.get(cls), cls, params, [&](std::size_t i) {
        return store.activation_vector(params.layers[i], id);
      });
      scores.push_back(report.divergence);
    }
    return scores;
  };
  auto benign_scores = score_all(benign);
  auto attacked_scores = score_all(attacked);
  return roc_from_scores(std::move(benign_scores), std::move(attacked_scores), thresholds);
}

}  // namespace nd
