#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace arg {

struct BoundingBox {
  double x_min = 0, y_min = 0, x_max = 0, y_max = 0;
  bool valid() const;
};

/// Center coordinates (cx, cy) of a box.
std::pair<double, double> box_center(const BoundingBox& b);

struct ActorInstance {
  int frame_index = 0;
  BoundingBox box;
  std::vector<double> feature;          // appearance feature, length d
  std::optional<int> action_label;      // in [0, A) when present
};

struct ClipSample {
  std::string clip_id;
  double frame_width = 0, frame_height = 0;
  int frame_count = 0;                  // T
  std::vector<ActorInstance> actors;    // N >= 1, file order preserved
  std::optional<int> activity_label;    // in [0, C) when present
};

struct Dataset {
  std::vector<ClipSample> clips;
  std::vector<std::string> action_names;    // size A
  std::vector<std::string> activity_names;  // size C
  int feature_dim = 0;                      // d

  int num_actions() const { return static_cast<int>(action_names.size()); }
  int num_activities() const { return static_cast<int>(activity_names.size()); }
};

struct ValidationReport {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

/// Parse error with the offending line number in the message.
struct ParseError : std::runtime_error {
  explicit ParseError(const std::string& msg) : std::runtime_error(msg) {}
};

Dataset parse_clip_file(const std::string& text);
std::string serialize_dataset(const Dataset& ds);
ValidationReport validate_dataset(const Dataset& ds);

/// Channels-last image, values are arbitrary reals.
struct Image {
  std::size_t height = 0, width = 0, channels = 1;
  std::vector<double> pixels;  // height * width * channels

  double at(std::size_t y, std::size_t x, std::size_t c) const {
    return pixels[(y * width + x) * channels + c];
  }
  double& at(std::size_t y, std::size_t x, std::size_t c) {
    return pixels[(y * width + x) * channels + c];
  }
};

/// Bilinear crop-resize of a box region to out_h x out_w. Box coordinates
/// outside the frame are clamped to frame bounds before sampling.
Image extract_patch(const Image& frame, const BoundingBox& b,
                    std::size_t out_h, std::size_t out_w);

struct SynthConfig {
  int num_actions = 3;        // A
  int num_activities = 3;     // C
  int feature_dim = 16;       // d
  int num_clips = 10;
  int min_actors = 4;
  int max_actors = 8;
  int frames_per_clip = 3;
  double frame_width = 720, frame_height = 480;
  double sigma_within = 1.0;
  double sigma_between = 5.0;  // must exceed sigma_within
};

/// Deterministic clustered dataset: per-action feature cluster centers,
/// spatially grouped actors, clip activity = majority action id (ties to
/// the lowest id). Requires num_activities >= num_actions so every
/// majority label is representable.
Dataset generate_synthetic_dataset(const SynthConfig& cfg, std::uint64_t seed);

}  // namespace arg
