#include <doctest.h>

#include <cmath>
#include <random>

#include "arg/data.hpp"
#include "arg/matrix.hpp"
#include "arg/relation.hpp"

using namespace arg;

namespace {

std::vector<double> random_vec(std::size_t d, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  std::vector<double> v(d);
  for (double& x : v) x = u(rng);
  return v;
}

RelationParams identity_dot_params(std::size_t d) {
  RelationParams p;
  p.embed_dim = static_cast<int>(d);
  p.w_theta = Matrix::identity(d);
  p.b_theta = Matrix(1, d);
  p.w_phi = Matrix::identity(d);
  p.b_phi = Matrix(1, d);
  return p;
}

ClipSample make_clip(const std::vector<std::vector<double>>& features,
                     const std::vector<std::pair<double, double>>& centers,
                     double frame_width = 1000) {
  ClipSample clip;
  clip.clip_id = "t";
  clip.frame_width = frame_width;
  clip.frame_height = frame_width;
  clip.frame_count = 1;
  for (std::size_t i = 0; i < features.size(); ++i) {
    ActorInstance a;
    a.feature = features[i];
    const auto [cx, cy] = centers[i];
    a.box = {cx - 5, cy - 5, cx + 5, cy + 5};
    clip.actors.push_back(a);
  }
  return clip;
}

/// Independent brute-force evaluation of the normalized relation matrix:
/// plain exp and explicit sums, no shared code with the library path.
Matrix brute_force_graph(const ClipSample& clip, RelationMode mode,
                         const RelationParams& p) {
  const std::size_t n = clip.actors.size();
  const double mu = p.distance.resolve(clip.frame_width);
  Matrix g(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    double denom = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const auto [xi, yi] = box_center(clip.actors[i].box);
      const auto [xj, yj] = box_center(clip.actors[j].box);
      const double dist = std::hypot(xi - xj, yi - yj);
      const double fs = dist <= mu ? 1.0 : 0.0;
      double fa = 0.0;
      const auto& a = clip.actors[i].feature;
      const auto& b = clip.actors[j].feature;
      switch (mode) {
        case RelationMode::EmbeddedDotProduct: fa = appearance_dot(a, b, p); break;
        case RelationMode::NCC: fa = appearance_ncc(a, b); break;
        case RelationMode::SAD: fa = appearance_sad(a, b); break;
      }
      g(i, j) = fs * std::exp(fa);
      denom += g(i, j);
    }
    for (std::size_t j = 0; j < n; ++j) g(i, j) /= denom;
  }
  return g;
}

}  // namespace

TEST_CASE("appearance_dot with identity maps") {
  RelationParams p = identity_dot_params(2);
  std::vector<double> x{1, 0};
  CHECK(appearance_dot(x, x, p) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));

  std::vector<double> zero{0, 0};
  CHECK(appearance_dot(zero, x, p) == 0.0);
}

TEST_CASE("appearance_dot scaling follows sqrt(d_k) with zero-padded maps") {
  // same embedding values, padded to d_k = 4: only the scale changes
  RelationParams p;
  p.embed_dim = 4;
  p.w_theta = Matrix(2, 4);
  p.w_phi = Matrix(2, 4);
  for (std::size_t i = 0; i < 2; ++i) {
    p.w_theta(i, i) = 1.0;
    p.w_phi(i, i) = 1.0;
  }
  p.b_theta = Matrix(1, 4);
  p.b_phi = Matrix(1, 4);
  std::vector<double> x{1, 0};
  // independent evaluation: theta(x)'phi(x) = 1, scale = 1/sqrt(4)
  CHECK(appearance_dot(x, x, p) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("appearance_ncc values and conventions") {
  CHECK(appearance_ncc({1, 2, 3}, {2, 4, 6}) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(appearance_ncc({1, 2, 3}, {3, 2, 1}) == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(appearance_ncc({1, 2, 3}, {5, 5, 5}) == 0.0);
  CHECK_THROWS_AS(appearance_ncc({1}, {1}), std::invalid_argument);
}

TEST_CASE("appearance_ncc bounded and affine invariant") {
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> alpha(0.1, 4.0);
  std::uniform_real_distribution<double> beta(-5.0, 5.0);
  for (int it = 0; it < 10000; ++it) {
    const std::size_t d = 2 + rng() % 8;
    std::vector<double> x = random_vec(d, rng), y = random_vec(d, rng);
    const double v = appearance_ncc(x, y);
    CHECK(v >= -1.0 - 1e-12);
    CHECK(v <= 1.0 + 1e-12);

    const double a = alpha(rng), b = beta(rng);
    std::vector<double> ax = x;
    for (double& e : ax) e = a * e + b;
    CHECK(appearance_ncc(ax, y) == doctest::Approx(v).epsilon(1e-7));
    for (double& e : ax) e = -e;
    CHECK(appearance_ncc(ax, y) == doctest::Approx(-v).epsilon(1e-7));
  }
}

TEST_CASE("uncentered NCC is raw cosine") {
  std::vector<double> x{1, 0}, y{1, 1};
  CHECK(appearance_ncc(x, y, /*uncentered=*/true) ==
        doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("appearance_sad values and symmetry") {
  std::vector<double> x{1, 2, 3};
  CHECK(appearance_sad(x, x) == 0.0);
  CHECK(appearance_sad({1, 2, 3}, {2, 2, 5}) == doctest::Approx(-1.0).epsilon(1e-12));

  std::mt19937_64 rng(103);
  for (int it = 0; it < 100; ++it) {
    std::vector<double> a = random_vec(5, rng), b = random_vec(5, rng);
    CHECK(appearance_sad(a, b) == appearance_sad(b, a));
    CHECK(appearance_sad(a, b) <= 0.0);
  }
}

TEST_CASE("raw SAD satisfies the metric axioms") {
  std::mt19937_64 rng(107);
  auto raw_sad = [](const std::vector<double>& a, const std::vector<double>& b) {
    return -appearance_sad(a, b) * static_cast<double>(a.size());
  };
  for (int it = 0; it < 10000; ++it) {
    const std::size_t d = 2 + rng() % 6;
    std::vector<double> a = random_vec(d, rng), b = random_vec(d, rng),
                        c = random_vec(d, rng);
    CHECK(raw_sad(a, b) >= 0.0);
    CHECK(raw_sad(a, a) == 0.0);
    CHECK(raw_sad(a, b) == raw_sad(b, a));
    CHECK(raw_sad(a, c) <= raw_sad(a, b) + raw_sad(b, c) + 1e-12);
  }
}

TEST_CASE("position_mask distance threshold is inclusive Euclidean") {
  CHECK(position_mask({{0, 0}, {3, 4}}, 6.0)(0, 1) == 1.0);  // distance 5
  CHECK(position_mask({{0, 0}, {3, 4}}, 5.0)(0, 1) == 1.0);  // inclusive
  CHECK(position_mask({{0, 0}, {3, 4}}, 4.0)(0, 1) == 0.0);
  Matrix single = position_mask({{7, 7}}, 1.0);
  CHECK(single.rows() == 1);
  CHECK(single(0, 0) == 1.0);
  CHECK_THROWS_AS(position_mask({{0, 0}}, 0.0), std::invalid_argument);
}

TEST_CASE("build_relation_graph on two identical nearby actors") {
  for (RelationMode mode : {RelationMode::EmbeddedDotProduct, RelationMode::NCC,
                            RelationMode::SAD}) {
    ClipSample clip = make_clip({{1, 2, 3}, {1, 2, 3}}, {{100, 100}, {110, 100}});
    RelationParams p = identity_dot_params(3);
    p.embed_dim = 3;
    RelationGraph g = build_relation_graph(clip, mode, p);
    for (std::size_t i = 0; i < 2; ++i)
      for (std::size_t j = 0; j < 2; ++j)
        CHECK(g.weights(i, j) == doctest::Approx(0.5).epsilon(1e-12));
  }
}

TEST_CASE("distant actors keep only self edges") {
  ClipSample clip = make_clip({{1, 0}, {0, 1}}, {{0, 0}, {900, 900}});
  RelationParams p = identity_dot_params(2);
  RelationGraph g = build_relation_graph(clip, RelationMode::SAD, p);
  CHECK(g.weights(0, 0) == 1.0);
  CHECK(g.weights(0, 1) == 0.0);
  CHECK(g.weights(1, 0) == 0.0);
  CHECK(g.weights(1, 1) == 1.0);
}

TEST_CASE("relation_graph_from_scores seam reproduces the softmax row") {
  Matrix scores(3, 3);
  for (std::size_t i = 0; i < 3; ++i) {
    scores(i, 0) = 0.0;
    scores(i, 1) = std::log(2.0);
    scores(i, 2) = std::log(3.0);
  }
  Matrix mask(3, 3, 1.0);
  RelationGraph g = relation_graph_from_scores(scores, mask, RelationMode::SAD);
  CHECK(g.weights(0, 0) == doctest::Approx(1.0 / 6).epsilon(1e-12));
  CHECK(g.weights(0, 1) == doctest::Approx(2.0 / 6).epsilon(1e-12));
  CHECK(g.weights(0, 2) == doctest::Approx(3.0 / 6).epsilon(1e-12));
}

TEST_CASE("graph matches brute force for small N") {
  std::mt19937_64 rng(113);
  std::uniform_real_distribution<double> coord(0.0, 400.0);
  for (int it = 0; it < 100; ++it) {
    const std::size_t n = 1 + rng() % 4;
    const std::size_t d = 3 + rng() % 4;
    std::vector<std::vector<double>> feats;
    std::vector<std::pair<double, double>> centers;
    for (std::size_t i = 0; i < n; ++i) {
      feats.push_back(random_vec(d, rng));
      centers.emplace_back(coord(rng), coord(rng));
    }
    ClipSample clip = make_clip(feats, centers, 1000);
    for (RelationMode mode : {RelationMode::EmbeddedDotProduct, RelationMode::NCC,
                              RelationMode::SAD}) {
      RelationParams p = identity_dot_params(d);
      RelationGraph g = build_relation_graph(clip, mode, p);
      CHECK(max_abs_diff(g.weights, brute_force_graph(clip, mode, p)) < 1e-12);
    }
  }
}

TEST_CASE("permutation equivariance of the relation graph") {
  std::mt19937_64 rng(127);
  std::uniform_real_distribution<double> coord(0.0, 300.0);
  for (int it = 0; it < 30; ++it) {
    const std::size_t n = 2 + rng() % 5;
    std::vector<std::vector<double>> feats;
    std::vector<std::pair<double, double>> centers;
    for (std::size_t i = 0; i < n; ++i) {
      feats.push_back(random_vec(4, rng));
      centers.emplace_back(coord(rng), coord(rng));
    }
    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    std::shuffle(perm.begin(), perm.end(), rng);

    std::vector<std::vector<double>> pfeats(n);
    std::vector<std::pair<double, double>> pcenters(n);
    for (std::size_t i = 0; i < n; ++i) {
      pfeats[i] = feats[perm[i]];
      pcenters[i] = centers[perm[i]];
    }
    ClipSample clip = make_clip(feats, centers);
    ClipSample pclip = make_clip(pfeats, pcenters);

    for (RelationMode mode : {RelationMode::EmbeddedDotProduct, RelationMode::NCC,
                              RelationMode::SAD}) {
      RelationParams p = identity_dot_params(4);
      Matrix g = build_relation_graph(clip, mode, p).weights;
      Matrix pg = build_relation_graph(pclip, mode, p).weights;
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
          CHECK(pg(i, j) == g(perm[i], perm[j]));  // exact
    }
  }
}

TEST_CASE("per-row score shifts leave the graph unchanged") {
  std::mt19937_64 rng(131);
  std::uniform_real_distribution<double> u(-4.0, 4.0);
  for (int it = 0; it < 30; ++it) {
    const std::size_t n = 2 + rng() % 4;
    Matrix s(n, n), mask(n, n, 1.0);
    for (double& v : s.data()) v = u(rng);
    Matrix shifted = s;
    for (std::size_t i = 0; i < n; ++i) {
      const double c = u(rng);
      for (std::size_t j = 0; j < n; ++j) shifted(i, j) += c;
    }
    CHECK(max_abs_diff(
              relation_graph_from_scores(s, mask, RelationMode::SAD).weights,
              relation_graph_from_scores(shifted, mask, RelationMode::SAD).weights) <
          1e-12);
  }
}

TEST_CASE("same_frame_only restricts edges across frames") {
  ClipSample clip = make_clip({{1, 0}, {0, 1}}, {{100, 100}, {110, 100}});
  clip.frame_count = 2;
  clip.actors[1].frame_index = 1;
  RelationParams p = identity_dot_params(2);
  p.same_frame_only = true;
  RelationGraph g = build_relation_graph(clip, RelationMode::SAD, p);
  CHECK(g.weights(0, 1) == 0.0);
  CHECK(g.weights(0, 0) == 1.0);
}

TEST_CASE("build_multi_graph") {
  std::mt19937_64 rng(137);
  ClipSample clip = make_clip({random_vec(3, rng), random_vec(3, rng)},
                              {{50, 50}, {60, 60}});
  RelationParams p = identity_dot_params(3);

  SUBCASE("singleton equals build_relation_graph") {
    auto graphs = build_multi_graph(clip, {{RelationMode::NCC, p}});
    REQUIRE(graphs.size() == 1);
    CHECK(graphs[0].weights ==
          build_relation_graph(clip, RelationMode::NCC, p).weights);
  }
  SUBCASE("identical params give equal graphs") {
    auto graphs = build_multi_graph(
        clip, {{RelationMode::SAD, p}, {RelationMode::SAD, p}});
    CHECK(graphs[0].weights == graphs[1].weights);
  }
  SUBCASE("different theta/phi give different graphs") {
    RelationParams q = p;
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (double& v : q.w_theta.data()) v = u(rng);
    for (double& v : q.w_phi.data()) v = u(rng);
    auto graphs = build_multi_graph(clip, {{RelationMode::EmbeddedDotProduct, p},
                                           {RelationMode::EmbeddedDotProduct, q}});
    CHECK(max_abs_diff(graphs[0].weights, graphs[1].weights) > 0.0);
  }
  SUBCASE("empty spec rejected") {
    CHECK_THROWS_AS(build_multi_graph(clip, {}), std::invalid_argument);
  }
}

TEST_CASE("distance rule resolves mu from frame width") {
  ClipSample clip = make_clip({{1, 1, 0}, {1, 0, 1}}, {{0, 100}, {150, 100}}, 1000);
  RelationParams p = identity_dot_params(3);
  p.distance = DistanceRule{true, 0.2};  // mu = 200, within reach
  CHECK(build_relation_graph(clip, RelationMode::SAD, p).weights(0, 1) > 0.0);
  p.distance = DistanceRule{true, 0.1};  // mu = 100 < 150
  CHECK(build_relation_graph(clip, RelationMode::SAD, p).weights(0, 1) == 0.0);
  p.distance = DistanceRule{false, 150.0};  // absolute pixels, inclusive
  CHECK(build_relation_graph(clip, RelationMode::SAD, p).weights(0, 1) > 0.0);
}
