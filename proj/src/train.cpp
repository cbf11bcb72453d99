#include "arg/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

namespace arg {

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

struct AdamState {
  std::vector<double> m, v;
  std::size_t t = 0;
  static constexpr double beta1 = 0.9;
  static constexpr double beta2 = 0.999;
  static constexpr double eps = 1e-8;
};

void adam_step(std::vector<double>& params, const std::vector<double>& grad,
               double lr, std::size_t frozen, AdamState& st) {
  if (st.m.empty()) {
    st.m.assign(params.size(), 0.0);
    st.v.assign(params.size(), 0.0);
  }
  ++st.t;
  const double bc1 = 1.0 - std::pow(AdamState::beta1, static_cast<double>(st.t));
  const double bc2 = 1.0 - std::pow(AdamState::beta2, static_cast<double>(st.t));
  for (std::size_t i = frozen; i < params.size(); ++i) {
    st.m[i] = AdamState::beta1 * st.m[i] + (1 - AdamState::beta1) * grad[i];
    st.v[i] = AdamState::beta2 * st.v[i] + (1 - AdamState::beta2) * grad[i] * grad[i];
    params[i] -= lr * (st.m[i] / bc1) / (std::sqrt(st.v[i] / bc2) + AdamState::eps);
  }
}

/// Drops each frame independently with probability p; keeps the clip
/// unchanged if every frame would be dropped.
ClipSample drop_frames(const ClipSample& clip, double p, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<bool> keep(clip.frame_count);
  bool any = false;
  for (int f = 0; f < clip.frame_count; ++f) {
    keep[f] = unit(rng) >= p;
    any = any || keep[f];
  }
  if (!any) return clip;
  ClipSample out = clip;
  out.actors.clear();
  for (const ActorInstance& a : clip.actors)
    if (keep[a.frame_index]) out.actors.push_back(a);
  if (out.actors.empty()) return clip;
  return out;
}

void check_trainable(const Dataset& ds) {
  if (ds.clips.empty()) throw std::invalid_argument("train: empty dataset");
  bool labeled = false;
  for (const ClipSample& c : ds.clips)
    labeled = labeled || c.activity_label.has_value();
  if (!labeled) throw std::invalid_argument("train: no labeled activities in dataset");
}

ModelParams run_training(const Dataset& ds, ModelParams m, const TrainConfig& cfg,
                         bool use_graph, std::size_t frozen,
                         std::vector<double>* loss_curve) {
  cfg.validate();
  check_trainable(ds);

  std::vector<double> params = m.flatten();
  AdamState adam;
  std::mt19937_64 rng(cfg.seed + 0x9e3779b97f4a7c15ULL);

  std::vector<std::size_t> order(ds.clips.size());
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t end =
          std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));

      std::vector<ClipSample> dropped;  // owns frame-dropout variants
      std::vector<const ClipSample*> batch;
      dropped.reserve(end - start);
      for (std::size_t k = start; k < end; ++k) {
        const ClipSample& clip = ds.clips[order[k]];
        if (use_graph && cfg.frame_dropout > 0.0)
          dropped.push_back(drop_frames(clip, cfg.frame_dropout, rng));
        else
          dropped.push_back(clip);
      }
      for (const ClipSample& c : dropped) batch.push_back(&c);

      m.unflatten(params);
      double mean_loss = 0.0;
      const std::vector<double> grad =
          batch_gradient(batch, m, cfg, use_graph, &mean_loss);
      if (cfg.optimizer == Optimizer::Sgd)
        sgd_step(params, grad, cfg.learning_rate, frozen);
      else
        adam_step(params, grad, cfg.learning_rate, frozen, adam);
      epoch_loss += mean_loss;
      ++batches;
    }
    if (loss_curve) loss_curve->push_back(batches ? epoch_loss / batches : 0.0);
  }
  m.unflatten(params);
  return m;
}

}  // namespace

void sgd_step(std::vector<double>& params, const std::vector<double>& grad,
              double lr, std::size_t frozen) {
  if (params.size() != grad.size())
    throw std::invalid_argument("sgd_step: size mismatch");
  for (std::size_t i = frozen; i < params.size(); ++i) params[i] -= lr * grad[i];
}

std::vector<double> batch_gradient(const std::vector<const ClipSample*>& batch,
                                   const ModelParams& m, const TrainConfig& cfg,
                                   bool use_graph, double* mean_loss) {
  if (batch.empty()) throw std::invalid_argument("batch_gradient: empty batch");
  std::vector<double> total;
  double loss_sum = 0.0;
  for (const ClipSample* clip : batch) {
    Tape tape;
    const TapedParams ids = insert_params(tape, m);
    const ClipForward fwd = forward_clip(tape, ids, *clip, cfg, use_graph);
    const ValueId l = clip_loss(tape, fwd, *clip, cfg.action_loss_weight);
    tape.backward(l);
    loss_sum += tape.value(l)(0, 0);
    std::vector<double> g = collect_gradients(tape, ids);
    if (total.empty())
      total = std::move(g);
    else
      for (std::size_t i = 0; i < total.size(); ++i) total[i] += g[i];
  }
  const double inv = 1.0 / static_cast<double>(batch.size());
  for (double& v : total) v *= inv;
  if (mean_loss) *mean_loss = loss_sum * inv;
  return total;
}

ModelParams train_stage1(const Dataset& ds, const TrainConfig& cfg,
                         std::vector<double>* loss_curve) {
  if (cfg.stage != 1) throw std::invalid_argument("train_stage1: cfg.stage must be 1");
  ModelParams m = init_model(ds.feature_dim, ds.num_actions(), ds.num_activities(),
                             cfg, cfg.seed);
  return run_training(ds, std::move(m), cfg, /*use_graph=*/false, /*frozen=*/0,
                      loss_curve);
}

ModelParams train_stage2(const Dataset& ds, const ModelParams& stage1,
                         const TrainConfig& cfg, std::vector<double>* loss_curve) {
  if (cfg.stage != 2) throw std::invalid_argument("train_stage2: cfg.stage must be 2");
  return run_training(ds, stage1, cfg, /*use_graph=*/true,
                      stage1.embedder_param_count(), loss_curve);
}

Metrics evaluate(const Dataset& ds, const ModelParams& m, const TrainConfig& cfg) {
  if (ds.clips.empty()) throw std::invalid_argument("evaluate: empty dataset");
  const int num_c = ds.num_activities();
  const int num_a = ds.num_actions();

  Metrics out;
  out.activity_confusion = Matrix(num_c, num_c);
  std::vector<std::size_t> action_total(num_a, 0), action_hit(num_a, 0);

  std::size_t clip_total = 0, clip_hit = 0;
  for (const ClipSample& clip : ds.clips) {
    const Prediction p = predict(clip, m, cfg);
    if (clip.activity_label) {
      ++clip_total;
      out.activity_confusion(*clip.activity_label, p.activity_class) += 1.0;
      if (p.activity_class == *clip.activity_label) ++clip_hit;
    }
    for (std::size_t i = 0; i < clip.actors.size(); ++i) {
      if (!clip.actors[i].action_label) continue;
      const int truth = *clip.actors[i].action_label;
      ++action_total[truth];
      if (p.action_class[i] == truth) ++action_hit[truth];
    }
  }
  if (clip_total == 0) throw std::invalid_argument("evaluate: no labeled clips");
  out.activity_accuracy = static_cast<double>(clip_hit) / clip_total;
  out.per_class_action_accuracy.resize(num_a, 0.0);
  for (int a = 0; a < num_a; ++a)
    if (action_total[a] > 0)
      out.per_class_action_accuracy[a] =
          static_cast<double>(action_hit[a]) / action_total[a];
  return out;
}

std::string metrics_report(const Metrics& metrics, const TrainConfig& cfg,
                           const Dataset& ds) {
  std::ostringstream out;
  out << "activity_accuracy\t" << fmt_double(metrics.activity_accuracy) << '\n';
  for (std::size_t a = 0; a < metrics.per_class_action_accuracy.size(); ++a)
    out << "action_accuracy." << ds.action_names[a] << '\t'
        << fmt_double(metrics.per_class_action_accuracy[a]) << '\n';
  out << "confusion_rows\t" << metrics.activity_confusion.rows() << '\n';
  for (std::size_t i = 0; i < metrics.activity_confusion.rows(); ++i) {
    out << "confusion";
    for (std::size_t j = 0; j < metrics.activity_confusion.cols(); ++j)
      out << '\t' << static_cast<long long>(metrics.activity_confusion(i, j));
    out << '\n';
  }
  for (std::size_t e = 0; e < metrics.loss_curve.size(); ++e)
    out << "epoch_loss." << e << '\t' << fmt_double(metrics.loss_curve[e]) << '\n';
  std::istringstream cfg_lines(serialize_config(cfg));
  std::string line;
  while (std::getline(cfg_lines, line)) {
    const std::size_t eq = line.find('=');
    out << "config." << line.substr(0, eq) << '\t' << line.substr(eq + 1) << '\n';
  }
  return out.str();
}

}  // namespace arg
