#pragma once

#include <optional>
#include <vector>

#include "arg/config.hpp"
#include "arg/data.hpp"
#include "arg/matrix.hpp"
#include "arg/relation.hpp"
#include "arg/tape.hpp"

namespace arg {

/// Learnable state for one relation graph: the embedded dot-product maps
/// (used only in dot mode) and the graph-convolution weight stack.
struct GraphParams {
  Matrix w_theta, b_theta;   // d x d_k, 1 x d_k
  Matrix w_phi, b_phi;       // d x d_k, 1 x d_k
  std::vector<Matrix> w_gcn; // gcn_layers matrices, each d x d

  bool operator==(const GraphParams& o) const = default;
};

struct ModelParams {
  Matrix w_emb, b_emb;             // d x d, 1 x d embedder
  std::vector<GraphParams> graphs; // one per relation graph
  Matrix w_action, b_action;       // d x A, 1 x A
  Matrix w_activity, b_activity;   // d x C, 1 x C

  std::size_t embedder_param_count() const { return w_emb.size() + b_emb.size(); }
  std::vector<double> flatten() const;
  void unflatten(const std::vector<double>& flat);

  bool operator==(const ModelParams& o) const = default;
};

/// Uniform [-1/sqrt(fan_in), +1/sqrt(fan_in)] initialization, seeded.
ModelParams init_model(int feature_dim, int num_actions, int num_activities,
                       const TrainConfig& cfg, std::uint64_t seed);

struct Prediction {
  std::vector<int> action_class;                  // per actor
  std::vector<std::vector<double>> action_probs;  // per actor, length A
  int activity_class = 0;
  std::vector<double> activity_probs;             // length C
};

// Plain forward primitives (spec surface; also used as test oracles).
Matrix gcn_layer(const Matrix& graph, const Matrix& features, const Matrix& w);
Matrix fuse_features(const Matrix& features, const std::vector<Matrix>& relational);
Matrix activity_logits(const Matrix& fused, const Matrix& w, const Matrix& b);
Matrix action_logits(const Matrix& fused, const Matrix& w, const Matrix& b);

/// Combined loss CE(activity) + lambda * mean CE over labeled actors.
/// Labels of -1 mark unlabeled entries.
double loss(const Matrix& action_logits, const std::vector<int>& action_labels,
            const Matrix& activity_logits, int activity_label, double lambda);

/// Parameter node handles on a tape.
struct TapedParams {
  ValueId w_emb, b_emb;
  struct G {
    ValueId w_theta, b_theta, w_phi, b_phi;
    std::vector<ValueId> w_gcn;
  };
  std::vector<G> graphs;
  ValueId w_action, b_action, w_activity, b_activity;
};

TapedParams insert_params(Tape& tape, const ModelParams& m);

struct ClipForward {
  ValueId action_logits;    // N x A
  ValueId activity_logits;  // 1 x C
};

/// Differentiable forward pass for one clip. use_graph=false gives the
/// stage-1 reduction (fused features = embedded features). Dot-product
/// graphs are built on the tape from raw actor features so gradients reach
/// theta/phi; NCC and SAD graphs enter as constants (stop-gradient).
ClipForward forward_clip(Tape& tape, const TapedParams& params,
                         const ClipSample& clip, const TrainConfig& cfg,
                         bool use_graph);

/// Loss node for one clip; throws if neither the activity nor any actor
/// carries a label.
ValueId clip_loss(Tape& tape, const ClipForward& fwd, const ClipSample& clip,
                  double lambda);

Prediction predict(const ClipSample& clip, const ModelParams& m,
                   const TrainConfig& cfg);

/// Collects gradients of all parameters from a tape into flatten() order.
std::vector<double> collect_gradients(const Tape& tape, const TapedParams& ids);

}  // namespace arg
