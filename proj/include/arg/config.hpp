#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "arg/relation.hpp"

namespace arg {

enum class Optimizer { Sgd, Adam };

/// Full training/inference configuration. Defaults follow the reference
/// setup: batch 16, learning rate 1e-4, 100 epochs, d_k = 256, distance
/// threshold 1/5 of the frame width, action loss weight 1.
struct TrainConfig {
  std::vector<RelationMode> modes{RelationMode::EmbeddedDotProduct};  // one per graph
  int embed_dim = 256;       // d_k
  int spatial_dim = 32;      // d_s; accepted for config fidelity, unused
  DistanceRule distance;     // default: fraction 0.2 of frame width
  double action_loss_weight = 1.0;  // lambda
  int batch_size = 16;
  double learning_rate = 1e-4;
  int epochs = 100;
  Optimizer optimizer = Optimizer::Sgd;
  std::uint64_t seed = 0;
  double frame_dropout = 0.0;  // stage-2 per-frame drop probability
  int stage = 1;               // 1 or 2
  int gcn_layers = 1;
  bool same_frame_only = false;
  bool uncentered_ncc = false;

  int num_graphs() const { return static_cast<int>(modes.size()); }
  void validate() const;
};

/// Applies one "key=value" override; throws on unknown keys or bad values.
void apply_config_entry(TrainConfig& cfg, const std::string& key,
                        const std::string& value);

/// Flat key=value text, one entry per line, '#' comments and blanks ignored.
TrainConfig parse_config_text(const std::string& text, TrainConfig base = {});

/// Deterministic serialization of the fully resolved config.
std::string serialize_config(const TrainConfig& cfg);

}  // namespace arg
