#include "arg/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
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

double parse_number(const std::string& tok, std::size_t line_no) {
  std::size_t pos = 0;
  double v;
  try {
    v = std::stod(tok, &pos);
  } catch (const std::exception&) {
    throw ParseError("line " + std::to_string(line_no) + ": not a number: '" + tok + "'");
  }
  if (pos != tok.size())
    throw ParseError("line " + std::to_string(line_no) + ": trailing junk in number: '" + tok + "'");
  if (!std::isfinite(v))
    throw ParseError("line " + std::to_string(line_no) + ": non-finite number: '" + tok + "'");
  return v;
}

int parse_int(const std::string& tok, std::size_t line_no) {
  double v = parse_number(tok, line_no);
  if (v != std::floor(v))
    throw ParseError("line " + std::to_string(line_no) + ": expected integer, got '" + tok + "'");
  return static_cast<int>(v);
}

std::optional<int> parse_label(const std::string& tok, int limit, const char* kind,
                               std::size_t line_no) {
  if (tok == "-") return std::nullopt;
  int v = parse_int(tok, line_no);
  if (v < 0 || v >= limit)
    throw ParseError("line " + std::to_string(line_no) + ": " + kind + " label " +
                     std::to_string(v) + " out of range [0, " + std::to_string(limit) + ")");
  return v;
}

std::vector<std::string> default_names(const char* prefix, int n) {
  std::vector<std::string> names;
  names.reserve(n);
  for (int i = 0; i < n; ++i) names.push_back(std::string(prefix) + std::to_string(i));
  return names;
}

}  // namespace

bool BoundingBox::valid() const {
  return std::isfinite(x_min) && std::isfinite(y_min) && std::isfinite(x_max) &&
         std::isfinite(y_max) && x_max > x_min && y_max > y_min;
}

std::pair<double, double> box_center(const BoundingBox& b) {
  return {(b.x_min + b.x_max) / 2.0, (b.y_min + b.y_max) / 2.0};
}

Dataset parse_clip_file(const std::string& text) {
  Dataset ds;
  bool have_header = false;
  ClipSample* current = nullptr;

  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::vector<std::string> tok;
    std::string t;
    while (ls >> t) {
      if (t[0] == '#') break;
      tok.push_back(t);
    }
    if (tok.empty()) continue;

    const std::string& kw = tok[0];
    if (kw == "HEADER") {
      if (have_header) throw ParseError("line " + std::to_string(line_no) + ": duplicate HEADER");
      if (tok.size() != 4)
        throw ParseError("line " + std::to_string(line_no) + ": HEADER expects 'HEADER d A C'");
      ds.feature_dim = parse_int(tok[1], line_no);
      int a = parse_int(tok[2], line_no);
      int c = parse_int(tok[3], line_no);
      if (ds.feature_dim < 1 || a < 1 || c < 1)
        throw ParseError("line " + std::to_string(line_no) + ": HEADER counts must be positive");
      ds.action_names = default_names("action", a);
      ds.activity_names = default_names("activity", c);
      have_header = true;
    } else if (kw == "CLIP") {
      if (!have_header) throw ParseError("line " + std::to_string(line_no) + ": CLIP before HEADER");
      if (tok.size() != 6)
        throw ParseError("line " + std::to_string(line_no) +
                         ": CLIP expects 'CLIP id width height T activity_label'");
      ClipSample clip;
      clip.clip_id = tok[1];
      clip.frame_width = parse_number(tok[2], line_no);
      clip.frame_height = parse_number(tok[3], line_no);
      clip.frame_count = parse_int(tok[4], line_no);
      if (clip.frame_width <= 0 || clip.frame_height <= 0)
        throw ParseError("line " + std::to_string(line_no) + ": frame dimensions must be positive");
      if (clip.frame_count < 1)
        throw ParseError("line " + std::to_string(line_no) + ": frame count must be >= 1");
      clip.activity_label = parse_label(tok[5], ds.num_activities(), "activity", line_no);
      ds.clips.push_back(std::move(clip));
      current = &ds.clips.back();
    } else if (kw == "ACTOR") {
      if (!current) throw ParseError("line " + std::to_string(line_no) + ": ACTOR before CLIP");
      const std::size_t expected = 7 + static_cast<std::size_t>(ds.feature_dim);
      if (tok.size() != expected)
        throw ParseError("line " + std::to_string(line_no) + ": feature length mismatch, expected " +
                         std::to_string(ds.feature_dim) + " values, got " +
                         std::to_string(tok.size() >= 7 ? tok.size() - 7 : 0));
      ActorInstance actor;
      actor.frame_index = parse_int(tok[1], line_no);
      actor.box.x_min = parse_number(tok[2], line_no);
      actor.box.y_min = parse_number(tok[3], line_no);
      actor.box.x_max = parse_number(tok[4], line_no);
      actor.box.y_max = parse_number(tok[5], line_no);
      if (!actor.box.valid())
        throw ParseError("line " + std::to_string(line_no) + ": invalid box (requires x_max > x_min, y_max > y_min)");
      if (actor.frame_index < 0 || actor.frame_index >= current->frame_count)
        throw ParseError("line " + std::to_string(line_no) + ": frame_index " +
                         std::to_string(actor.frame_index) + " outside [0, " +
                         std::to_string(current->frame_count) + ")");
      actor.action_label = parse_label(tok[6], ds.num_actions(), "action", line_no);
      actor.feature.reserve(ds.feature_dim);
      for (int k = 0; k < ds.feature_dim; ++k)
        actor.feature.push_back(parse_number(tok[7 + k], line_no));
      current->actors.push_back(std::move(actor));
    } else {
      throw ParseError("line " + std::to_string(line_no) + ": unknown record '" + kw + "'");
    }
  }
  if (!have_header) throw ParseError("missing HEADER line");
  for (const ClipSample& c : ds.clips)
    if (c.actors.empty()) throw ParseError("clip '" + c.clip_id + "' has no actors");
  ValidationReport rep = validate_dataset(ds);
  if (!rep.ok()) throw ParseError("invalid dataset: " + rep.violations.front());
  return ds;
}

std::string serialize_dataset(const Dataset& ds) {
  std::ostringstream out;
  out << "HEADER " << ds.feature_dim << ' ' << ds.num_actions() << ' '
      << ds.num_activities() << '\n';
  for (const ClipSample& c : ds.clips) {
    out << "CLIP " << c.clip_id << ' ' << fmt_double(c.frame_width) << ' '
        << fmt_double(c.frame_height) << ' ' << c.frame_count << ' ';
    if (c.activity_label) out << *c.activity_label; else out << '-';
    out << '\n';
    for (const ActorInstance& a : c.actors) {
      out << "ACTOR " << a.frame_index << ' ' << fmt_double(a.box.x_min) << ' '
          << fmt_double(a.box.y_min) << ' ' << fmt_double(a.box.x_max) << ' '
          << fmt_double(a.box.y_max) << ' ';
      if (a.action_label) out << *a.action_label; else out << '-';
      for (double f : a.feature) out << ' ' << fmt_double(f);
      out << '\n';
    }
  }
  return out.str();
}

ValidationReport validate_dataset(const Dataset& ds) {
  ValidationReport rep;
  auto bad = [&rep](const std::string& msg) { rep.violations.push_back(msg); };
  if (ds.feature_dim < 1) bad("feature_dim must be >= 1");
  if (ds.action_names.empty()) bad("no action classes declared");
  if (ds.activity_names.empty()) bad("no activity classes declared");
  for (const ClipSample& c : ds.clips) {
    if (c.actors.empty()) bad("clip '" + c.clip_id + "': no actors");
    if (c.frame_width <= 0 || c.frame_height <= 0)
      bad("clip '" + c.clip_id + "': non-positive frame dimensions");
    if (c.activity_label &&
        (*c.activity_label < 0 || *c.activity_label >= ds.num_activities()))
      bad("clip '" + c.clip_id + "': activity label " +
          std::to_string(*c.activity_label) + " out of range");
    for (std::size_t i = 0; i < c.actors.size(); ++i) {
      const ActorInstance& a = c.actors[i];
      const std::string where = "clip '" + c.clip_id + "' actor " + std::to_string(i);
      if (!a.box.valid()) bad(where + ": invalid box");
      if (a.frame_index < 0 || a.frame_index >= c.frame_count)
        bad(where + ": frame_index " + std::to_string(a.frame_index) +
            " outside [0, " + std::to_string(c.frame_count) + ")");
      if (static_cast<int>(a.feature.size()) != ds.feature_dim)
        bad(where + ": feature length " + std::to_string(a.feature.size()) +
            " != " + std::to_string(ds.feature_dim));
      for (double f : a.feature)
        if (!std::isfinite(f)) { bad(where + ": non-finite feature entry"); break; }
      if (a.action_label && (*a.action_label < 0 || *a.action_label >= ds.num_actions()))
        bad(where + ": action label " + std::to_string(*a.action_label) + " out of range");
    }
  }
  return rep;
}

Image extract_patch(const Image& frame, const BoundingBox& b,
                    std::size_t out_h, std::size_t out_w) {
  if (frame.pixels.empty() || frame.height == 0 || frame.width == 0)
    throw std::invalid_argument("extract_patch: empty frame");
  if (out_h < 1 || out_w < 1)
    throw std::invalid_argument("extract_patch: output dims must be >= 1");

  const double W = static_cast<double>(frame.width);
  const double H = static_cast<double>(frame.height);
  const double x0 = std::clamp(b.x_min, 0.0, W);
  const double x1 = std::clamp(b.x_max, 0.0, W);
  const double y0 = std::clamp(b.y_min, 0.0, H);
  const double y1 = std::clamp(b.y_max, 0.0, H);

  Image out;
  out.height = out_h;
  out.width = out_w;
  out.channels = frame.channels;
  out.pixels.resize(out_h * out_w * frame.channels);

  auto sample = [&](double y, double x, std::size_t c) {
    y = std::clamp(y, 0.0, H - 1.0);
    x = std::clamp(x, 0.0, W - 1.0);
    const std::size_t yl = static_cast<std::size_t>(std::floor(y));
    const std::size_t xl = static_cast<std::size_t>(std::floor(x));
    const std::size_t yh = std::min(yl + 1, frame.height - 1);
    const std::size_t xh = std::min(xl + 1, frame.width - 1);
    const double fy = y - static_cast<double>(yl);
    const double fx = x - static_cast<double>(xl);
    return (1 - fy) * ((1 - fx) * frame.at(yl, xl, c) + fx * frame.at(yl, xh, c)) +
           fy * ((1 - fx) * frame.at(yh, xl, c) + fx * frame.at(yh, xh, c));
  };

  for (std::size_t r = 0; r < out_h; ++r) {
    const double sy = y0 + (static_cast<double>(r) + 0.5) * (y1 - y0) / static_cast<double>(out_h) - 0.5;
    for (std::size_t cidx = 0; cidx < out_w; ++cidx) {
      const double sx = x0 + (static_cast<double>(cidx) + 0.5) * (x1 - x0) / static_cast<double>(out_w) - 0.5;
      for (std::size_t ch = 0; ch < frame.channels; ++ch)
        out.at(r, cidx, ch) = sample(sy, sx, ch);
    }
  }
  return out;
}

Dataset generate_synthetic_dataset(const SynthConfig& cfg, std::uint64_t seed) {
  if (cfg.num_actions < 1 || cfg.num_activities < 1 || cfg.feature_dim < 1 ||
      cfg.num_clips < 1 || cfg.min_actors < 1 || cfg.max_actors < cfg.min_actors ||
      cfg.frames_per_clip < 1 || cfg.frame_width <= 0 || cfg.frame_height <= 0)
    throw std::invalid_argument("generate_synthetic_dataset: invalid counts in config");
  if (!(cfg.sigma_between > cfg.sigma_within && cfg.sigma_within > 0))
    throw std::invalid_argument("generate_synthetic_dataset: requires sigma_between > sigma_within > 0");
  if (cfg.num_activities < cfg.num_actions)
    throw std::invalid_argument("generate_synthetic_dataset: majority labels need num_activities >= num_actions");

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  Dataset ds;
  ds.feature_dim = cfg.feature_dim;
  ds.action_names = default_names("action", cfg.num_actions);
  ds.activity_names = default_names("activity", cfg.num_activities);

  // One cluster center per action class.
  std::vector<std::vector<double>> centers(cfg.num_actions);
  for (auto& c : centers) {
    c.resize(cfg.feature_dim);
    for (double& v : c) v = cfg.sigma_between * normal(rng);
  }

  const double box_w = 40.0, box_h = 80.0;
  // Group spread stays well inside the default distance threshold
  // (frame_width / 5) so clip graphs are densely connected.
  const double spread = cfg.frame_width / 12.0;

  for (int ci = 0; ci < cfg.num_clips; ++ci) {
    ClipSample clip;
    clip.clip_id = "synth" + std::to_string(ci);
    clip.frame_width = cfg.frame_width;
    clip.frame_height = cfg.frame_height;
    clip.frame_count = cfg.frames_per_clip;

    const int n = cfg.min_actors +
                  static_cast<int>(unit(rng) * (cfg.max_actors - cfg.min_actors + 1)) %
                      (cfg.max_actors - cfg.min_actors + 1);
    const double gx = spread + unit(rng) * (cfg.frame_width - 2 * spread);
    const double gy = spread + unit(rng) * (cfg.frame_height - 2 * spread);

    // a strict majority takes the dominant action so the group activity is
    // recoverable from the action multiset; the rest are uniform
    const int dominant = static_cast<int>(unit(rng) * cfg.num_actions) % cfg.num_actions;
    const int majority_size = n / 2 + 1;

    std::vector<int> counts(cfg.num_actions, 0);
    for (int ai = 0; ai < n; ++ai) {
      ActorInstance actor;
      actor.frame_index = static_cast<int>(unit(rng) * cfg.frames_per_clip) % cfg.frames_per_clip;
      const int action = ai < majority_size
                             ? dominant
                             : static_cast<int>(unit(rng) * cfg.num_actions) %
                                   cfg.num_actions;
      actor.action_label = action;
      ++counts[action];
      actor.feature.resize(cfg.feature_dim);
      for (int k = 0; k < cfg.feature_dim; ++k)
        actor.feature[k] = centers[action][k] + cfg.sigma_within * normal(rng);
      const double cx = gx + (unit(rng) * 2 - 1) * spread;
      const double cy = gy + (unit(rng) * 2 - 1) * spread;
      actor.box = {cx - box_w / 2, cy - box_h / 2, cx + box_w / 2, cy + box_h / 2};
      clip.actors.push_back(std::move(actor));
    }
    // majority action id, ties broken by lowest class id
    int best = 0;
    for (int a = 1; a < cfg.num_actions; ++a)
      if (counts[a] > counts[best]) best = a;
    clip.activity_label = best;
    ds.clips.push_back(std::move(clip));
  }
  return ds;
}

}  // namespace arg
