#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "arg/checkpoint.hpp"
#include "arg/config.hpp"
#include "arg/data.hpp"
#include "arg/model.hpp"
#include "arg/relation.hpp"
#include "arg/render.hpp"
#include "arg/train.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

arg::TrainConfig resolve_config(const std::string& config_path,
                                const std::vector<std::string>& overrides) {
  arg::TrainConfig cfg;
  if (!config_path.empty()) cfg = arg::parse_config_text(read_file(config_path));
  for (const std::string& kv : overrides) {
    const std::size_t eq = kv.find('=');
    if (eq == std::string::npos)
      throw CLI::ValidationError("--set expects key=value, got '" + kv + "'");
    try {
      arg::apply_config_entry(cfg, kv.substr(0, eq), kv.substr(eq + 1));
    } catch (const std::invalid_argument& e) {
      throw CLI::ValidationError(e.what());
    }
  }
  cfg.validate();
  return cfg;
}

void log_config(const arg::TrainConfig& cfg) {
  std::istringstream in(arg::serialize_config(cfg));
  std::string line;
  while (std::getline(in, line)) std::cerr << "config: " << line << '\n';
}

std::string fmt_prob(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

int cmd_synth(const arg::SynthConfig& scfg, std::uint64_t seed,
              const std::string& out_path) {
  arg::Dataset ds = arg::generate_synthetic_dataset(scfg, seed);
  const std::string text = arg::serialize_dataset(ds);
  if (out_path.empty() || out_path == "-")
    std::cout << text;
  else
    write_file(out_path, text);
  std::cerr << "synth: " << ds.clips.size() << " clips written\n";
  return kExitOk;
}

int cmd_train(const std::string& data_path, arg::TrainConfig cfg, bool two_stage,
              const std::string& ckpt_path, const std::string& report_path) {
  arg::Dataset ds = arg::parse_clip_file(read_file(data_path));

  cfg.stage = 1;
  log_config(cfg);
  std::vector<double> curve;
  arg::ModelParams m = arg::train_stage1(ds, cfg, &curve);
  if (two_stage) {
    cfg.stage = 2;
    m = arg::train_stage2(ds, m, cfg, &curve);
  }

  arg::Metrics metrics = arg::evaluate(ds, m, cfg);
  metrics.loss_curve = std::move(curve);
  const std::string report = arg::metrics_report(metrics, cfg, ds);
  if (report_path.empty() || report_path == "-")
    std::cout << report;
  else
    write_file(report_path, report);
  if (!ckpt_path.empty()) arg::save_checkpoint(m, cfg, ckpt_path);
  return kExitOk;
}

int cmd_eval(const std::string& data_path, const std::string& ckpt_path,
             const std::string& report_path) {
  arg::Dataset ds = arg::parse_clip_file(read_file(data_path));
  auto [m, cfg] = arg::load_checkpoint(ckpt_path);
  log_config(cfg);
  const arg::Metrics metrics = arg::evaluate(ds, m, cfg);
  const std::string report = arg::metrics_report(metrics, cfg, ds);
  if (report_path.empty() || report_path == "-")
    std::cout << report;
  else
    write_file(report_path, report);
  return kExitOk;
}

int cmd_predict(const std::string& data_path, const std::string& ckpt_path,
                const std::string& out_path) {
  arg::Dataset ds = arg::parse_clip_file(read_file(data_path));
  auto [m, cfg] = arg::load_checkpoint(ckpt_path);
  log_config(cfg);
  std::ostringstream out;
  for (const arg::ClipSample& clip : ds.clips) {
    const arg::Prediction p = arg::predict(clip, m, cfg);
    out << clip.clip_id << '\t' << p.activity_class << '\t'
        << fmt_prob(p.activity_probs[p.activity_class]) << '\t';
    for (std::size_t i = 0; i < p.action_class.size(); ++i) {
      if (i) out << ',';
      out << p.action_class[i];
    }
    out << '\n';
  }
  if (out_path.empty() || out_path == "-")
    std::cout << out.str();
  else
    write_file(out_path, out.str());
  return kExitOk;
}

int cmd_graph(const std::string& data_path, const std::string& clip_id,
              arg::TrainConfig cfg, const std::string& ckpt_path) {
  arg::Dataset ds = arg::parse_clip_file(read_file(data_path));

  const arg::ClipSample* clip = nullptr;
  if (clip_id.empty()) {
    clip = &ds.clips.front();
  } else {
    for (const arg::ClipSample& c : ds.clips)
      if (c.clip_id == clip_id) { clip = &c; break; }
    if (!clip) throw std::runtime_error("no clip with id '" + clip_id + "'");
  }

  arg::ModelParams m;
  if (!ckpt_path.empty()) {
    auto loaded = arg::load_checkpoint(ckpt_path);
    m = std::move(loaded.first);
    cfg = std::move(loaded.second);
  } else {
    m = arg::init_model(ds.feature_dim, ds.num_actions(), ds.num_activities(), cfg,
                        cfg.seed);
  }
  log_config(cfg);

  for (std::size_t gi = 0; gi < cfg.modes.size(); ++gi) {
    arg::RelationParams rp;
    rp.embed_dim = cfg.embed_dim;
    rp.distance = cfg.distance;
    rp.same_frame_only = cfg.same_frame_only;
    rp.uncentered_ncc = cfg.uncentered_ncc;
    rp.w_theta = m.graphs[gi].w_theta;
    rp.b_theta = m.graphs[gi].b_theta;
    rp.w_phi = m.graphs[gi].w_phi;
    rp.b_phi = m.graphs[gi].b_phi;
    const arg::RelationGraph g = arg::build_relation_graph(*clip, cfg.modes[gi], rp);
    std::cout << "# graph " << gi << " mode=" << arg::relation_mode_name(cfg.modes[gi])
              << " clip=" << clip->clip_id << '\n';
    for (std::size_t i = 0; i < g.weights.rows(); ++i) {
      for (std::size_t j = 0; j < g.weights.cols(); ++j) {
        if (j) std::cout << ' ';
        char buf[40];
        std::snprintf(buf, sizeof(buf), "%.17g", g.weights(i, j));
        std::cout << buf;
      }
      std::cout << '\n';
    }
  }
  return kExitOk;
}

int cmd_render(const std::string& data_path, const std::string& ckpt_path,
               const std::string& clip_id, const std::string& out_dir) {
  arg::Dataset ds = arg::parse_clip_file(read_file(data_path));
  auto [m, cfg] = arg::load_checkpoint(ckpt_path);
  log_config(cfg);
  std::size_t rendered = 0;
  for (const arg::ClipSample& clip : ds.clips) {
    if (!clip_id.empty() && clip.clip_id != clip_id) continue;
    const arg::Prediction p = arg::predict(clip, m, cfg);
    const std::string svg =
        arg::render_svg(clip, p, ds.action_names, ds.activity_names);
    if (out_dir.empty() || out_dir == "-") {
      std::cout << svg;
    } else {
      std::filesystem::create_directories(out_dir);
      write_file((std::filesystem::path(out_dir) / (clip.clip_id + ".svg")).string(),
                 svg);
    }
    ++rendered;
  }
  if (rendered == 0) throw std::runtime_error("no matching clip to render");
  std::cerr << "render: " << rendered << " clip(s)\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Actor-relation-graph group activity recognition"};
  app.require_subcommand(1);

  std::string config_path, data_path, ckpt_path, report_path, out_path, clip_id,
      out_dir;
  std::vector<std::string> overrides;
  std::uint64_t seed = 0;

  auto add_config_flags = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "key=value config file");
    sub->add_option("--set", overrides,
                    "config override key=value (repeatable, wins over --config)");
  };

  // synth
  arg::SynthConfig scfg;
  CLI::App* synth = app.add_subcommand("synth", "generate a synthetic dataset file");
  synth->add_option("--out", out_path, "output dataset path ('-' = stdout)");
  synth->add_option("--clips", scfg.num_clips, "number of clips");
  synth->add_option("--actions", scfg.num_actions, "action class count A");
  synth->add_option("--activities", scfg.num_activities, "activity class count C");
  synth->add_option("--dim", scfg.feature_dim, "feature dimension d");
  synth->add_option("--actors-min", scfg.min_actors, "min actors per clip");
  synth->add_option("--actors-max", scfg.max_actors, "max actors per clip");
  synth->add_option("--frames", scfg.frames_per_clip, "frames per clip T");
  synth->add_option("--width", scfg.frame_width, "frame width in pixels");
  synth->add_option("--height", scfg.frame_height, "frame height in pixels");
  synth->add_option("--sigma-within", scfg.sigma_within, "within-class feature noise");
  synth->add_option("--sigma-between", scfg.sigma_between, "between-class center scale");
  synth->add_option("--seed", seed, "generator seed");

  // train
  bool two_stage = true;
  CLI::App* train = app.add_subcommand(
      "train", "train stage 1 (and by default stage 2), write checkpoint + report");
  train->add_option("--data", data_path, "training dataset file")->required();
  add_config_flags(train);
  train->add_flag("!--stage1-only", two_stage, "stop after stage 1");
  train->add_option("--checkpoint", ckpt_path, "checkpoint output path");
  train->add_option("--report", report_path, "metrics report path ('-' = stdout)");

  // eval
  CLI::App* eval = app.add_subcommand("eval", "evaluate a checkpoint on a labeled set");
  eval->add_option("--data", data_path, "dataset file")->required();
  eval->add_option("--checkpoint", ckpt_path, "checkpoint path")->required();
  eval->add_option("--report", report_path, "metrics report path ('-' = stdout)");

  // predict
  CLI::App* predict = app.add_subcommand(
      "predict",
      "per-clip predictions; one line per clip:\n"
      "clip_id<TAB>activity_id<TAB>activity_prob<TAB>action_id,action_id,...");
  predict->add_option("--data", data_path, "dataset file")->required();
  predict->add_option("--checkpoint", ckpt_path, "checkpoint path")->required();
  predict->add_option("--out", out_path, "output path ('-' = stdout)");

  // graph
  CLI::App* graph = app.add_subcommand(
      "graph", "dump a clip's relation graph(s) as a numeric matrix");
  graph->add_option("--data", data_path, "dataset file")->required();
  graph->add_option("--clip", clip_id, "clip id (default: first clip)");
  graph->add_option("--checkpoint", ckpt_path,
                    "checkpoint supplying config + dot-product parameters");
  add_config_flags(graph);

  // render
  CLI::App* render = app.add_subcommand("render", "emit SVG overlays per clip");
  render->add_option("--data", data_path, "dataset file")->required();
  render->add_option("--checkpoint", ckpt_path, "checkpoint path")->required();
  render->add_option("--clip", clip_id, "render only this clip id");
  render->add_option("--out-dir", out_dir,
                     "directory for <clip_id>.svg files ('-' = stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*synth) return cmd_synth(scfg, seed, out_path);

    arg::TrainConfig cfg;
    try {
      if (*train || *graph) cfg = resolve_config(config_path, overrides);
    } catch (const CLI::Error& e) {
      std::cerr << "error: " << e.what() << '\n';
      return kExitUsage;
    }

    if (*train) return cmd_train(data_path, cfg, two_stage, ckpt_path, report_path);
    if (*eval) return cmd_eval(data_path, ckpt_path, report_path);
    if (*predict) return cmd_predict(data_path, ckpt_path, out_path);
    if (*graph) return cmd_graph(data_path, clip_id, cfg, ckpt_path);
    if (*render) return cmd_render(data_path, ckpt_path, clip_id, out_dir);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitOk;
}
