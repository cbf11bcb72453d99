#include "arg/model.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace arg {

namespace {

void append(std::vector<double>& out, const Matrix& m) {
  out.insert(out.end(), m.data().begin(), m.data().end());
}

void take(const std::vector<double>& flat, std::size_t& pos, Matrix& m) {
  if (pos + m.size() > flat.size())
    throw std::invalid_argument("unflatten: flat vector too short");
  std::copy(flat.begin() + pos, flat.begin() + pos + m.size(), m.data().begin());
  pos += m.size();
}

Matrix feature_matrix(const ClipSample& clip, std::size_t d) {
  Matrix x(clip.actors.size(), d);
  for (std::size_t i = 0; i < clip.actors.size(); ++i) {
    if (clip.actors[i].feature.size() != d)
      throw std::invalid_argument("clip '" + clip.clip_id + "': feature length " +
                                  std::to_string(clip.actors[i].feature.size()) +
                                  " != model dimension " + std::to_string(d));
    for (std::size_t j = 0; j < d; ++j) x(i, j) = clip.actors[i].feature[j];
  }
  return x;
}

std::vector<double> softmax_row(const Matrix& logits, std::size_t row) {
  std::vector<double> p(logits.cols());
  double m = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < logits.cols(); ++j) m = std::max(m, logits(row, j));
  double denom = 0.0;
  for (std::size_t j = 0; j < logits.cols(); ++j) {
    p[j] = std::exp(logits(row, j) - m);
    denom += p[j];
  }
  for (double& v : p) v /= denom;
  return p;
}

int argmax(const std::vector<double>& v) {
  int best = 0;
  for (int i = 1; i < static_cast<int>(v.size()); ++i)
    if (v[i] > v[best]) best = i;  // ties keep the lowest index
  return best;
}

}  // namespace

std::vector<double> ModelParams::flatten() const {
  std::vector<double> out;
  append(out, w_emb);
  append(out, b_emb);
  for (const GraphParams& g : graphs) {
    append(out, g.w_theta);
    append(out, g.b_theta);
    append(out, g.w_phi);
    append(out, g.b_phi);
    for (const Matrix& w : g.w_gcn) append(out, w);
  }
  append(out, w_action);
  append(out, b_action);
  append(out, w_activity);
  append(out, b_activity);
  return out;
}

void ModelParams::unflatten(const std::vector<double>& flat) {
  std::size_t pos = 0;
  take(flat, pos, w_emb);
  take(flat, pos, b_emb);
  for (GraphParams& g : graphs) {
    take(flat, pos, g.w_theta);
    take(flat, pos, g.b_theta);
    take(flat, pos, g.w_phi);
    take(flat, pos, g.b_phi);
    for (Matrix& w : g.w_gcn) take(flat, pos, w);
  }
  take(flat, pos, w_action);
  take(flat, pos, b_action);
  take(flat, pos, w_activity);
  take(flat, pos, b_activity);
  if (pos != flat.size())
    throw std::invalid_argument("unflatten: flat vector length mismatch");
}

ModelParams init_model(int feature_dim, int num_actions, int num_activities,
                       const TrainConfig& cfg, std::uint64_t seed) {
  if (feature_dim < 1 || num_actions < 1 || num_activities < 1)
    throw std::invalid_argument("init_model: dimensions must be positive");
  std::mt19937_64 rng(seed);
  auto init = [&rng](std::size_t rows, std::size_t cols, std::size_t fan_in) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    std::uniform_real_distribution<double> u(-bound, bound);
    Matrix m(rows, cols);
    for (double& v : m.data()) v = u(rng);
    return m;
  };
  const std::size_t d = static_cast<std::size_t>(feature_dim);
  const std::size_t dk = static_cast<std::size_t>(cfg.embed_dim);

  ModelParams m;
  m.w_emb = init(d, d, d);
  m.b_emb = init(1, d, d);
  m.graphs.resize(cfg.num_graphs());
  for (GraphParams& g : m.graphs) {
    g.w_theta = init(d, dk, d);
    g.b_theta = init(1, dk, d);
    g.w_phi = init(d, dk, d);
    g.b_phi = init(1, dk, d);
    g.w_gcn.resize(cfg.gcn_layers);
    for (Matrix& w : g.w_gcn) w = init(d, d, d);
  }
  m.w_action = init(d, num_actions, d);
  m.b_action = init(1, num_actions, d);
  m.w_activity = init(d, num_activities, d);
  m.b_activity = init(1, num_activities, d);
  return m;
}

Matrix gcn_layer(const Matrix& graph, const Matrix& features, const Matrix& w) {
  return relu(matmul(matmul(graph, features), w));
}

Matrix fuse_features(const Matrix& features, const std::vector<Matrix>& relational) {
  Matrix out = features;
  for (const Matrix& z : relational) out = add(out, z);
  return out;
}

Matrix activity_logits(const Matrix& fused, const Matrix& w, const Matrix& b) {
  Matrix pooled = col_max(fused);
  Matrix out = matmul(pooled, w);
  for (std::size_t j = 0; j < out.cols(); ++j) out(0, j) += b(0, j);
  return out;
}

Matrix action_logits(const Matrix& fused, const Matrix& w, const Matrix& b) {
  Matrix out = matmul(fused, w);
  for (std::size_t i = 0; i < out.rows(); ++i)
    for (std::size_t j = 0; j < out.cols(); ++j) out(i, j) += b(0, j);
  return out;
}

double loss(const Matrix& action_logits, const std::vector<int>& action_labels,
            const Matrix& activity_logits, int activity_label, double lambda) {
  auto row_ce = [](const Matrix& logits, std::size_t row, int label) {
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < logits.cols(); ++j) m = std::max(m, logits(row, j));
    double lse = 0.0;
    for (std::size_t j = 0; j < logits.cols(); ++j) lse += std::exp(logits(row, j) - m);
    return m + std::log(lse) - logits(row, static_cast<std::size_t>(label));
  };
  bool any_action = false;
  for (int l : action_labels) any_action = any_action || l >= 0;
  if (activity_label < 0 && !any_action)
    throw std::invalid_argument("loss: no labels present, nothing to train on");

  double total = 0.0;
  if (activity_label >= 0) total += row_ce(activity_logits, 0, activity_label);
  if (lambda != 0.0 && any_action) {
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < action_labels.size(); ++i) {
      if (action_labels[i] < 0) continue;
      sum += row_ce(action_logits, i, action_labels[i]);
      ++count;
    }
    total += lambda * sum / static_cast<double>(count);
  }
  return total;
}

TapedParams insert_params(Tape& tape, const ModelParams& m) {
  TapedParams t;
  t.w_emb = tape.leaf(m.w_emb, true);
  t.b_emb = tape.leaf(m.b_emb, true);
  for (const GraphParams& g : m.graphs) {
    TapedParams::G tg;
    tg.w_theta = tape.leaf(g.w_theta, true);
    tg.b_theta = tape.leaf(g.b_theta, true);
    tg.w_phi = tape.leaf(g.w_phi, true);
    tg.b_phi = tape.leaf(g.b_phi, true);
    for (const Matrix& w : g.w_gcn) tg.w_gcn.push_back(tape.leaf(w, true));
    t.graphs.push_back(std::move(tg));
  }
  t.w_action = tape.leaf(m.w_action, true);
  t.b_action = tape.leaf(m.b_action, true);
  t.w_activity = tape.leaf(m.w_activity, true);
  t.b_activity = tape.leaf(m.b_activity, true);
  return t;
}

ClipForward forward_clip(Tape& tape, const TapedParams& params,
                         const ClipSample& clip, const TrainConfig& cfg,
                         bool use_graph) {
  if (clip.actors.empty())
    throw std::invalid_argument("forward_clip: clip has no actors");
  const std::size_t d = tape.value(params.w_emb).rows();
  const Matrix x = feature_matrix(clip, d);
  const ValueId xc = tape.constant(x);

  // embedded features
  const ValueId emb = tape.add_row(tape.matmul(xc, params.w_emb), params.b_emb);

  ValueId fused = emb;
  if (use_graph) {
    if (params.graphs.size() != static_cast<std::size_t>(cfg.num_graphs()))
      throw std::invalid_argument("forward_clip: graph count mismatch between model and config");
    for (std::size_t gi = 0; gi < params.graphs.size(); ++gi) {
      const TapedParams::G& tg = params.graphs[gi];
      const RelationMode mode = cfg.modes[gi];

      RelationParams rp;
      rp.embed_dim = cfg.embed_dim;
      rp.distance = cfg.distance;
      rp.same_frame_only = cfg.same_frame_only;
      rp.uncentered_ncc = cfg.uncentered_ncc;
      const Matrix mask = clip_position_mask(clip, rp);

      ValueId graph;
      if (mode == RelationMode::EmbeddedDotProduct) {
        const ValueId theta = tape.add_row(tape.matmul(xc, tg.w_theta), tg.b_theta);
        const ValueId phi = tape.add_row(tape.matmul(xc, tg.w_phi), tg.b_phi);
        const ValueId scores = tape.scale(
            tape.matmul(theta, tape.transpose(phi)),
            1.0 / std::sqrt(static_cast<double>(cfg.embed_dim)));
        graph = tape.masked_row_softmax(scores, mask);
      } else {
        graph = tape.constant(
            relation_graph_from_scores(appearance_scores(clip, mode, rp), mask, mode)
                .weights);
      }

      ValueId h = emb;
      for (const ValueId& w : tg.w_gcn)
        h = tape.relu(tape.matmul(tape.matmul(graph, h), w));
      fused = tape.add(fused, h);
    }
  }

  ClipForward out;
  out.action_logits = tape.add_row(tape.matmul(fused, params.w_action), params.b_action);
  out.activity_logits =
      tape.add_row(tape.matmul(tape.col_max(fused), params.w_activity), params.b_activity);
  return out;
}

ValueId clip_loss(Tape& tape, const ClipForward& fwd, const ClipSample& clip,
                  double lambda) {
  std::vector<int> action_labels;
  action_labels.reserve(clip.actors.size());
  bool any_action = false;
  for (const ActorInstance& a : clip.actors) {
    action_labels.push_back(a.action_label.value_or(-1));
    any_action = any_action || a.action_label.has_value();
  }
  const bool has_activity = clip.activity_label.has_value();
  if (!has_activity && !any_action)
    throw std::invalid_argument("clip '" + clip.clip_id + "': no labels, nothing to train on");

  ValueId total;
  if (has_activity) {
    total = tape.softmax_cross_entropy(fwd.activity_logits,
                                       std::vector<int>{*clip.activity_label});
  }
  if (any_action && lambda != 0.0) {
    ValueId act = tape.scale(
        tape.softmax_cross_entropy(fwd.action_logits, action_labels), lambda);
    total = total.valid() ? tape.add(total, act) : act;
  }
  if (!total.valid()) {
    // activity unlabeled and lambda = 0 with labeled actors: constant zero
    total = tape.constant(Matrix(1, 1));
  }
  return total;
}

Prediction predict(const ClipSample& clip, const ModelParams& m,
                   const TrainConfig& cfg) {
  Tape tape;
  const TapedParams ids = insert_params(tape, m);
  const ClipForward fwd = forward_clip(tape, ids, clip, cfg, cfg.stage == 2);

  const Matrix& act = tape.value(fwd.action_logits);
  const Matrix& gact = tape.value(fwd.activity_logits);

  Prediction p;
  for (std::size_t i = 0; i < act.rows(); ++i) {
    p.action_probs.push_back(softmax_row(act, i));
    p.action_class.push_back(argmax(p.action_probs.back()));
  }
  p.activity_probs = softmax_row(gact, 0);
  p.activity_class = argmax(p.activity_probs);
  return p;
}

std::vector<double> collect_gradients(const Tape& tape, const TapedParams& ids) {
  std::vector<double> out;
  append(out, tape.grad(ids.w_emb));
  append(out, tape.grad(ids.b_emb));
  for (const TapedParams::G& g : ids.graphs) {
    append(out, tape.grad(g.w_theta));
    append(out, tape.grad(g.b_theta));
    append(out, tape.grad(g.w_phi));
    append(out, tape.grad(g.b_phi));
    for (const ValueId& w : g.w_gcn) append(out, tape.grad(w));
  }
  append(out, tape.grad(ids.w_action));
  append(out, tape.grad(ids.b_action));
  append(out, tape.grad(ids.w_activity));
  append(out, tape.grad(ids.b_activity));
  return out;
}

}  // namespace arg
