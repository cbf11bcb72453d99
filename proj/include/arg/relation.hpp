#pragma once

#include <vector>

#include "arg/data.hpp"
#include "arg/matrix.hpp"

namespace arg {

enum class RelationMode { EmbeddedDotProduct, NCC, SAD };

const char* relation_mode_name(RelationMode m);
RelationMode relation_mode_from_name(const std::string& name);

/// How the distance threshold is resolved for a clip.
struct DistanceRule {
  bool fraction_of_width = true;
  double value = 0.2;  // fraction in (0,1] or absolute pixels > 0

  double resolve(double frame_width) const {
    return fraction_of_width ? value * frame_width : value;
  }
};

struct RelationParams {
  int embed_dim = 256;  // d_k scaling of the embedded dot-product
  // Linear maps theta/phi, stored as d x d_k weights plus 1 x d_k biases.
  // Only consulted in EmbeddedDotProduct mode.
  Matrix w_theta, b_theta, w_phi, b_phi;
  DistanceRule distance;
  bool same_frame_only = false;  // restrict edges to same-frame actor pairs
  bool uncentered_ncc = false;   // raw cosine instead of mean-centered
};

struct RelationGraph {
  Matrix weights;  // N x N, row-stochastic, zero outside the position mask
  RelationMode mode = RelationMode::EmbeddedDotProduct;
};

/// Embedded dot-product similarity theta(x_i)' phi(x_j) / sqrt(d_k).
double appearance_dot(const std::vector<double>& xi, const std::vector<double>& xj,
                      const RelationParams& p);

/// Zero-lag normalized correlation of mean-centered vectors; in [-1, 1],
/// 0 when either vector is constant. Set uncentered for raw cosine.
double appearance_ncc(const std::vector<double>& xi, const std::vector<double>& xj,
                      bool uncentered = false);

/// Negated mean absolute difference, -SAD(x_i, x_j) / d; <= 0, 0 iff equal.
double appearance_sad(const std::vector<double>& xi, const std::vector<double>& xj);

/// Binary N x N mask: 1 iff the Euclidean center distance is <= mu
/// (inclusive). Diagonal is always 1.
Matrix position_mask(const std::vector<std::pair<double, double>>& centers, double mu);

/// Position mask for a clip, resolving mu from the distance rule and
/// optionally zeroing cross-frame pairs (diagonal stays 1).
Matrix clip_position_mask(const ClipSample& clip, const RelationParams& p);

/// Raw appearance score matrix for the chosen mode.
Matrix appearance_scores(const ClipSample& clip, RelationMode mode,
                         const RelationParams& p);

/// Masked row softmax of precomputed scores; seam shared with
/// build_relation_graph.
RelationGraph relation_graph_from_scores(const Matrix& scores, const Matrix& mask,
                                         RelationMode mode);

RelationGraph build_relation_graph(const ClipSample& clip, RelationMode mode,
                                   const RelationParams& p);

std::vector<RelationGraph> build_multi_graph(
    const ClipSample& clip,
    const std::vector<std::pair<RelationMode, RelationParams>>& graphs);

}  // namespace arg
