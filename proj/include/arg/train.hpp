#pragma once

#include <string>
#include <vector>

#include "arg/config.hpp"
#include "arg/data.hpp"
#include "arg/model.hpp"

namespace arg {

struct Metrics {
  double activity_accuracy = 0.0;
  std::vector<double> per_class_action_accuracy;  // length A, NaN-free (0 when unseen)
  Matrix activity_confusion;                      // C x C, rows = truth, cols = prediction
  std::vector<double> loss_curve;                 // per-epoch mean training loss, may be empty
};

/// Stage 1: trains embedder and both heads with the relation graph
/// disabled. Deterministic given (dataset, config, seed).
ModelParams train_stage1(const Dataset& ds, const TrainConfig& cfg,
                         std::vector<double>* loss_curve = nullptr);

/// Stage 2: freezes the embedder and trains relation parameters, GCN
/// weights and heads on top of a stage-1 model. Optional frame dropout.
ModelParams train_stage2(const Dataset& ds, const ModelParams& stage1,
                         const TrainConfig& cfg,
                         std::vector<double>* loss_curve = nullptr);

Metrics evaluate(const Dataset& ds, const ModelParams& m, const TrainConfig& cfg);

/// Line-oriented `key<TAB>value` report plus the C x C confusion block and
/// the resolved config echoed for provenance. Byte-deterministic.
std::string metrics_report(const Metrics& metrics, const TrainConfig& cfg,
                           const Dataset& ds);

/// One optimizer step exposed for verification: plain SGD update over a
/// flat parameter vector, skipping the first `frozen` entries.
void sgd_step(std::vector<double>& params, const std::vector<double>& grad,
              double lr, std::size_t frozen);

/// Mean-over-clips gradient of the summed loss for a batch of clips, in
/// ModelParams::flatten() order; also returns the mean loss.
std::vector<double> batch_gradient(const std::vector<const ClipSample*>& batch,
                                   const ModelParams& m, const TrainConfig& cfg,
                                   bool use_graph, double* mean_loss = nullptr);

}  // namespace arg
