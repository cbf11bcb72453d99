#include "arg/relation.hpp"

#include <cmath>
#include <stdexcept>

namespace arg {

const char* relation_mode_name(RelationMode m) {
  switch (m) {
    case RelationMode::EmbeddedDotProduct: return "dot";
    case RelationMode::NCC: return "ncc";
    case RelationMode::SAD: return "sad";
  }
  return "?";
}

RelationMode relation_mode_from_name(const std::string& name) {
  if (name == "dot") return RelationMode::EmbeddedDotProduct;
  if (name == "ncc") return RelationMode::NCC;
  if (name == "sad") return RelationMode::SAD;
  throw std::invalid_argument("unknown relation mode '" + name + "' (expected dot|ncc|sad)");
}

namespace {

std::vector<double> apply_linear(const Matrix& w, const Matrix& b,
                                 const std::vector<double>& x) {
  if (w.rows() != x.size() || b.cols() != w.cols() || b.rows() != 1)
    throw std::invalid_argument("appearance_dot: embedding map dimension mismatch");
  std::vector<double> y(w.cols());
  for (std::size_t j = 0; j < w.cols(); ++j) {
    double s = b(0, j);
    for (std::size_t k = 0; k < w.rows(); ++k) s += x[k] * w(k, j);
    y[j] = s;
  }
  return y;
}

}  // namespace

double appearance_dot(const std::vector<double>& xi, const std::vector<double>& xj,
                      const RelationParams& p) {
  if (xi.size() != xj.size())
    throw std::invalid_argument("appearance_dot: feature length mismatch");
  const std::vector<double> ti = apply_linear(p.w_theta, p.b_theta, xi);
  const std::vector<double> pj = apply_linear(p.w_phi, p.b_phi, xj);
  double s = 0.0;
  for (std::size_t k = 0; k < ti.size(); ++k) s += ti[k] * pj[k];
  return s / std::sqrt(static_cast<double>(p.embed_dim));
}

double appearance_ncc(const std::vector<double>& xi, const std::vector<double>& xj,
                      bool uncentered) {
  if (xi.size() != xj.size())
    throw std::invalid_argument("appearance_ncc: feature length mismatch");
  if (xi.size() < 2) throw std::invalid_argument("appearance_ncc: requires d >= 2");
  const std::size_t d = xi.size();
  double mi = 0.0, mj = 0.0;
  if (!uncentered) {
    for (std::size_t k = 0; k < d; ++k) { mi += xi[k]; mj += xj[k]; }
    mi /= static_cast<double>(d);
    mj /= static_cast<double>(d);
  }
  double num = 0.0, di = 0.0, dj = 0.0;
  for (std::size_t k = 0; k < d; ++k) {
    const double a = xi[k] - mi, b = xj[k] - mj;
    num += a * b;
    di += a * a;
    dj += b * b;
  }
  if (di == 0.0 || dj == 0.0) return 0.0;  // constant vector convention
  return num / std::sqrt(di * dj);
}

double appearance_sad(const std::vector<double>& xi, const std::vector<double>& xj) {
  if (xi.size() != xj.size())
    throw std::invalid_argument("appearance_sad: feature length mismatch");
  double s = 0.0;
  for (std::size_t k = 0; k < xi.size(); ++k) s += std::abs(xi[k] - xj[k]);
  return -s / static_cast<double>(xi.size());
}

Matrix position_mask(const std::vector<std::pair<double, double>>& centers, double mu) {
  if (!(mu > 0)) throw std::invalid_argument("position_mask: mu must be > 0");
  const std::size_t n = centers.size();
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      const double dx = centers[i].first - centers[j].first;
      const double dy = centers[i].second - centers[j].second;
      const double v = std::sqrt(dx * dx + dy * dy) <= mu ? 1.0 : 0.0;
      m(i, j) = v;
      m(j, i) = v;
    }
  }
  return m;
}

Matrix clip_position_mask(const ClipSample& clip, const RelationParams& p) {
  std::vector<std::pair<double, double>> centers;
  centers.reserve(clip.actors.size());
  for (const ActorInstance& a : clip.actors) centers.push_back(box_center(a.box));
  Matrix m = position_mask(centers, p.distance.resolve(clip.frame_width));
  if (p.same_frame_only) {
    for (std::size_t i = 0; i < m.rows(); ++i)
      for (std::size_t j = 0; j < m.cols(); ++j)
        if (i != j && clip.actors[i].frame_index != clip.actors[j].frame_index)
          m(i, j) = 0.0;
  }
  return m;
}

Matrix appearance_scores(const ClipSample& clip, RelationMode mode,
                         const RelationParams& p) {
  const std::size_t n = clip.actors.size();
  Matrix s(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const auto& xi = clip.actors[i].feature;
      const auto& xj = clip.actors[j].feature;
      switch (mode) {
        case RelationMode::EmbeddedDotProduct: s(i, j) = appearance_dot(xi, xj, p); break;
        case RelationMode::NCC: s(i, j) = appearance_ncc(xi, xj, p.uncentered_ncc); break;
        case RelationMode::SAD: s(i, j) = appearance_sad(xi, xj); break;
      }
    }
  }
  return s;
}

RelationGraph relation_graph_from_scores(const Matrix& scores, const Matrix& mask,
                                         RelationMode mode) {
  return RelationGraph{masked_row_softmax(scores, mask), mode};
}

RelationGraph build_relation_graph(const ClipSample& clip, RelationMode mode,
                                   const RelationParams& p) {
  return relation_graph_from_scores(appearance_scores(clip, mode, p),
                                    clip_position_mask(clip, p), mode);
}

std::vector<RelationGraph> build_multi_graph(
    const ClipSample& clip,
    const std::vector<std::pair<RelationMode, RelationParams>>& graphs) {
  if (graphs.empty())
    throw std::invalid_argument("build_multi_graph: needs at least one graph spec");
  std::vector<RelationGraph> out;
  out.reserve(graphs.size());
  for (const auto& [mode, params] : graphs)
    out.push_back(build_relation_graph(clip, mode, params));
  return out;
}

}  // namespace arg
