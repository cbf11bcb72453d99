#include <doctest.h>

#include <random>
#include <string>

#include "arg/data.hpp"

using namespace arg;

namespace {

const char* kMinimalFile =
    "HEADER 2 2 2\n"
    "CLIP c0 100 80 1 1\n"
    "ACTOR 0 10 10 20 30 0 0.5 1.0\n";

}  // namespace

TEST_CASE("parse_clip_file minimal valid record") {
  Dataset ds = parse_clip_file(kMinimalFile);
  REQUIRE(ds.clips.size() == 1);
  CHECK(ds.feature_dim == 2);
  CHECK(ds.num_actions() == 2);
  CHECK(ds.num_activities() == 2);
  const ClipSample& c = ds.clips[0];
  CHECK(c.clip_id == "c0");
  REQUIRE(c.actors.size() == 1);
  CHECK(c.actors[0].feature == std::vector<double>{0.5, 1.0});
  CHECK(*c.activity_label == 1);
  CHECK(*c.actors[0].action_label == 0);
}

TEST_CASE("parse_clip_file reports feature length mismatch with line number") {
  const std::string bad =
      "HEADER 2 2 2\n"
      "CLIP c0 100 80 1 1\n"
      "ACTOR 0 10 10 20 30 0 0.5\n";
  CHECK_THROWS_WITH_AS(parse_clip_file(bad),
                       doctest::Contains("line 3"), ParseError);
}

TEST_CASE("parse_clip_file rejects degenerate boxes") {
  const std::string bad =
      "HEADER 2 2 2\n"
      "CLIP c0 100 80 1 1\n"
      "ACTOR 0 10 10 10 30 0 0.5 1.0\n";
  CHECK_THROWS_WITH_AS(parse_clip_file(bad), doctest::Contains("invalid box"),
                       ParseError);
}

TEST_CASE("parse_clip_file rejects out-of-range labels and non-finite numbers") {
  CHECK_THROWS_AS(parse_clip_file("HEADER 2 2 2\nCLIP c0 100 80 1 5\n"), ParseError);
  CHECK_THROWS_AS(parse_clip_file("HEADER 2 2 2\n"
                                  "CLIP c0 100 80 1 0\n"
                                  "ACTOR 0 1 1 2 2 0 nan 1.0\n"),
                  ParseError);
}

TEST_CASE("unlabeled markers parse as missing labels") {
  Dataset ds = parse_clip_file(
      "HEADER 1 2 2\n"
      "CLIP c0 100 80 2 -\n"
      "# a comment\n"
      "\n"
      "ACTOR 1 10 10 20 30 - 3.5\n");
  CHECK(!ds.clips[0].activity_label.has_value());
  CHECK(!ds.clips[0].actors[0].action_label.has_value());
  CHECK(ds.clips[0].actors[0].frame_index == 1);
}

TEST_CASE("parse then serialize round-trips") {
  std::mt19937_64 rng(21);
  for (int it = 0; it < 20; ++it) {
    SynthConfig cfg;
    cfg.num_clips = 3;
    cfg.feature_dim = 4;
    Dataset ds = generate_synthetic_dataset(cfg, rng());
    const std::string text = serialize_dataset(ds);
    Dataset again = parse_clip_file(text);
    CHECK(serialize_dataset(again) == text);
    REQUIRE(again.clips.size() == ds.clips.size());
    for (std::size_t i = 0; i < ds.clips.size(); ++i) {
      CHECK(again.clips[i].actors.size() == ds.clips[i].actors.size());
      for (std::size_t a = 0; a < ds.clips[i].actors.size(); ++a)
        CHECK(again.clips[i].actors[a].feature == ds.clips[i].actors[a].feature);
    }
  }
}

TEST_CASE("validate_dataset flags invariant violations") {
  Dataset ds = parse_clip_file(kMinimalFile);
  CHECK(validate_dataset(ds).ok());

  SUBCASE("frame index at T") {
    ds.clips[0].actors[0].frame_index = ds.clips[0].frame_count;
    ValidationReport rep = validate_dataset(ds);
    REQUIRE(rep.violations.size() == 1);
    CHECK(rep.violations[0].find("c0") != std::string::npos);
    CHECK(rep.violations[0].find("frame_index") != std::string::npos);
  }
  SUBCASE("activity label at C") {
    ds.clips[0].activity_label = ds.num_activities();
    ValidationReport rep = validate_dataset(ds);
    REQUIRE(rep.violations.size() == 1);
    CHECK(rep.violations[0].find("out of range") != std::string::npos);
  }
}

TEST_CASE("box_center") {
  auto [cx, cy] = box_center({0, 0, 10, 20});
  CHECK(cx == 5);
  CHECK(cy == 10);

  // translation covariance
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(-100.0, 100.0);
  std::uniform_real_distribution<double> pos(0.1, 50.0);
  for (int it = 0; it < 100; ++it) {
    const double a = u(rng), b = u(rng), w = pos(rng), h = pos(rng);
    auto [x, y] = box_center({a, b, a + 2 * w, b + 2 * h});
    CHECK(x == doctest::Approx(a + w).epsilon(1e-12));
    CHECK(y == doctest::Approx(b + h).epsilon(1e-12));
  }

  CHECK(!BoundingBox{3, 3, 3, 8}.valid());
}

TEST_CASE("extract_patch identity resample") {
  Image frame;
  frame.height = 4;
  frame.width = 5;
  frame.channels = 2;
  frame.pixels.resize(4 * 5 * 2);
  for (std::size_t i = 0; i < frame.pixels.size(); ++i)
    frame.pixels[i] = static_cast<double>(i) * 0.37;

  Image patch = extract_patch(frame, {0, 0, 5, 4}, 4, 5);
  CHECK(patch.pixels == frame.pixels);
}

TEST_CASE("extract_patch of a constant frame is constant") {
  Image frame;
  frame.height = 6;
  frame.width = 6;
  frame.pixels.assign(36, 7.25);
  Image patch = extract_patch(frame, {1.3, 0.7, 4.9, 5.1}, 3, 8);
  for (double v : patch.pixels) CHECK(v == doctest::Approx(7.25).epsilon(1e-14));
}

TEST_CASE("extract_patch clamps out-of-frame boxes") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Image frame;
  frame.height = 8;
  frame.width = 10;
  frame.pixels.resize(80);
  for (double& v : frame.pixels) v = u(rng);

  // reference: clamp explicitly, then sample the in-frame box
  BoundingBox overshoot{-3.5, 2.0, 14.0, 11.0};
  BoundingBox clamped{0.0, 2.0, 10.0, 8.0};
  Image a = extract_patch(frame, overshoot, 5, 7);
  Image b = extract_patch(frame, clamped, 5, 7);
  CHECK(a.pixels == b.pixels);
}

TEST_CASE("extract_patch shift invariance of bilinear sampling") {
  std::mt19937_64 rng(33);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Image frame;
  frame.height = 7;
  frame.width = 7;
  frame.pixels.resize(49);
  for (double& v : frame.pixels) v = u(rng);

  Image shifted = frame;
  for (double& v : shifted.pixels) v += 3.75;

  BoundingBox box{0.8, 1.2, 6.1, 5.9};
  Image a = extract_patch(frame, box, 4, 4);
  Image b = extract_patch(shifted, box, 4, 4);
  for (std::size_t i = 0; i < a.pixels.size(); ++i)
    CHECK(b.pixels[i] - a.pixels[i] == doctest::Approx(3.75).epsilon(1e-12));
}

TEST_CASE("extract_patch rejects an empty frame") {
  CHECK_THROWS_AS(extract_patch(Image{}, {0, 0, 1, 1}, 2, 2), std::invalid_argument);
}

TEST_CASE("generate_synthetic_dataset determinism and shape") {
  SynthConfig cfg;
  cfg.num_clips = 10;
  cfg.min_actors = 4;
  cfg.max_actors = 8;
  Dataset a = generate_synthetic_dataset(cfg, 42);
  Dataset b = generate_synthetic_dataset(cfg, 42);
  CHECK(serialize_dataset(a) == serialize_dataset(b));

  CHECK(a.clips.size() == 10);
  for (const ClipSample& c : a.clips) {
    CHECK(c.actors.size() >= 4);
    CHECK(c.actors.size() <= 8);
  }
}

TEST_CASE("synthetic activity label is the majority action") {
  std::mt19937_64 rng(55);
  for (int it = 0; it < 50; ++it) {
    SynthConfig cfg;
    cfg.num_clips = 5;
    Dataset ds = generate_synthetic_dataset(cfg, rng());
    for (const ClipSample& c : ds.clips) {
      std::vector<int> counts(ds.num_actions(), 0);
      for (const ActorInstance& a : c.actors) ++counts[*a.action_label];
      int best = 0;
      for (int k = 1; k < ds.num_actions(); ++k)
        if (counts[k] > counts[best]) best = k;
      CHECK(*c.activity_label == best);
    }
  }
}

TEST_CASE("generated datasets always validate") {
  std::mt19937_64 rng(77);
  for (int it = 0; it < 100; ++it) {
    SynthConfig cfg;
    cfg.num_actions = 1 + static_cast<int>(rng() % 5);
    cfg.num_activities = cfg.num_actions + static_cast<int>(rng() % 3);
    cfg.feature_dim = 1 + static_cast<int>(rng() % 32);
    cfg.num_clips = 1 + static_cast<int>(rng() % 8);
    cfg.min_actors = 1 + static_cast<int>(rng() % 4);
    cfg.max_actors = cfg.min_actors + static_cast<int>(rng() % 6);
    cfg.frames_per_clip = 1 + static_cast<int>(rng() % 5);
    cfg.sigma_within = 0.1 + (rng() % 100) / 50.0;
    cfg.sigma_between = cfg.sigma_within * (2.0 + (rng() % 100) / 10.0);
    Dataset ds = generate_synthetic_dataset(cfg, rng());
    CHECK(validate_dataset(ds).ok());
  }
}

TEST_CASE("generate_synthetic_dataset rejects invalid configs") {
  SynthConfig cfg;
  cfg.sigma_between = 0.5;  // below sigma_within
  CHECK_THROWS_AS(generate_synthetic_dataset(cfg, 1), std::invalid_argument);
  SynthConfig cfg2;
  cfg2.num_clips = 0;
  CHECK_THROWS_AS(generate_synthetic_dataset(cfg2, 1), std::invalid_argument);
}
