#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "nd/activation_store.hpp"
#include "nd/distribution.hpp"
#include "nd/ids.hpp"

namespace nd {

struct DivergenceParams {
  std::vector<LayerId> layers;  // non-empty, distinct
  DistributionConfig distribution;
};

/// Last two layers of the manifest (or the only one).
DivergenceParams default_divergence_params(const ActivationStore& store);

void validate(const ActivationStore& store, const DivergenceParams& params);

struct LayerDivergence {
  LayerId layer;
  std::vector<double> scores;  // per neuron, in [0, 1]
  double divergence = 0.0;     // mean of scores
};

/// How far one activation pattern sits from a class's distribution mass.
/// Per neuron the score is 1 minus the class density of the canonical bin
/// holding the value (1 when the value is off the grid).
struct DivergenceReport {
  std::optional<InstanceId> instance;  // absent when a raw vector was scored
  ClassId class_id;
  DivergenceParams params;
  std::vector<LayerDivergence> layers;  // same order as params.layers
  double divergence = 0.0;              // mean of the per-layer values
};

DivergenceReport score_instance(const ActivationStore& store, InstanceId instance, ClassId cls,
                                const DivergenceParams& params);

/// Scores an external activation vector; `values[i]` belongs to
/// `params.layers[i]` and must match that layer's width.
DivergenceReport score_vector(const ActivationStore& store, std::span<const std::vector<float>> values,
                              ClassId cls, const DivergenceParams& params);

/// Per-neuron score of `value` against one neuron's class distribution.
double neuron_score(const NeuronDistribution& class_distribution, double value);

/// True when the report's overall divergence exceeds `threshold` (in [0, 1]).
bool detect(const DivergenceReport& report, double threshold);

struct RocPoint {
  double threshold = 0.0;
  double tpr = 0.0;
  double fpr = 0.0;
};

struct RocTable {
  std::vector<RocPoint> points;  // ascending threshold
  double auc = 0.0;
  std::vector<double> benign_scores;
  std::vector<double> attacked_scores;
};

/// `count` evenly spaced thresholds covering [0, 1] (count >= 2).
std::vector<double> uniform_thresholds(std::size_t count);

/// ROC over precomputed divergence scores. A sample is flagged when its score
/// exceeds the threshold; attacked samples are the positives. AUC is the
/// trapezoid area under the (FPR, TPR) points closed with (0,0) and (1,1).
RocTable roc_from_scores(std::vector<double> benign, std::vector<double> attacked,
                         std::span<const double> thresholds);

/// Class each instance is scored against.
using ClassAssignment = std::function<ClassId(InstanceId)>;

/// Assigns every instance its manifest class_id.
ClassAssignment manifest_classes(const ActivationStore& store);

RocTable sweep(const ActivationStore& store, std::span<const InstanceId> benign,
               std::span<const InstanceId> attacked, const ClassAssignment& assign,
               const DivergenceParams& params, std::span<const double> thresholds);

}  // namespace nd
