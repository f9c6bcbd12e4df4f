#include <doctest.h>

#include <beltlab/aug/augment.hpp>

#include "support/builders.hpp"

using namespace beltlab;
using namespace beltlab::aug;

TEST_CASE("select_indices reproduces the published down-sampling recipes") {
  SUBCASE("ratio 2: one of every two steps") {
    CHECK(select_indices(6, Rational{2, 1}) == std::vector<int>{0, 2, 4});
  }
  SUBCASE("ratio 1: identity") {
    CHECK(select_indices(6, Rational{1, 1}) == std::vector<int>{0, 1, 2, 3, 4, 5});
  }
  SUBCASE("ratio 3/2 keeps two of every three") {
    // floor(j*1.5) for j = 0..4 -> 0, 1, 3, 4, 6
    CHECK(select_indices(7, Rational{3, 2}) == std::vector<int>{0, 1, 3, 4, 6});
  }
  SUBCASE("up-sampling ratios are rejected") {
    CHECK_THROWS(select_indices(6, Rational{1, 2}));
  }
}

TEST_CASE("select_indices: sound for every length up to 500") {
  for (int t = 1; t <= 500; ++t) {
    for (const Rational r : {Rational{2, 1}, Rational{3, 2}, Rational{1, 1}, Rational{7, 4}}) {
      const auto idx = select_indices(t, r);
      REQUIRE(!idx.empty());
      CHECK(idx.front() == 0);
      for (std::size_t i = 1; i < idx.size(); ++i) CHECK(idx[i] > idx[i - 1]);
      CHECK(idx.back() <= t - 1);
      if (r == Rational{2, 1})
        for (std::size_t i = 0; i < idx.size(); ++i) CHECK(idx[i] == 2 * static_cast<int>(i));
      if (r == Rational{3, 2})
        for (int v : idx) CHECK(v % 3 != 2);  // drops every third step
    }
  }
}

TEST_CASE("downsample: lengths and provenance") {
  std::vector<JointVector> js;
  for (int i = 0; i < 140; ++i) {
    JointVector q = JointVector::Zero();
    q[0] = 0.01 * i;
    q[4] = 1.0;
    js.push_back(q);
  }
  const Episode e = testsupport::trajectory_episode(js);

  SUBCASE("ratio 1 keeps content, multiplies provenance") {
    const Episode out = downsample(e, Rational{1, 1});
    CHECK(out.frames == e.frames);
    CHECK(out.meta.velocity_ratio == Rational{1, 1});
  }
  SUBCASE("T=140 at ratio 2 gives exactly 70 frames") {
    // |{0, 2, ..., 138}| = 70, counted by the select_indices oracle
    CHECK(select_indices(140, Rational{2, 1}).size() == 70);
    const Episode out = downsample(e, Rational{2, 1});
    CHECK(out.length() == 70);
    CHECK(out.meta.velocity_ratio == Rational{2, 1});
    CHECK(out.frames[1].joints[0] == doctest::Approx(double(float(0.02))));
    CHECK(out.frames[1].step_index == 1);
  }
  SUBCASE("constant-content episodes are fixed points content-wise") {
    std::vector<JointVector> flat(10, js[3]);
    const Episode c = testsupport::trajectory_episode(flat);
    const Episode once = downsample(c, Rational{2, 1});
    for (const Frame& f : once.frames) CHECK(f.joints == c.frames[0].joints);
  }
}

TEST_CASE("phase_shift: padding, trimming, identity") {
  std::vector<JointVector> js;
  for (int i = 0; i < 4; ++i) {
    JointVector q = JointVector::Zero();
    q[0] = 0.1 * i;
    q[4] = 1.0;
    js.push_back(q);
  }
  const Episode e = testsupport::trajectory_episode(js);

  SUBCASE("delay +2 repeats frame 0") {
    const Episode out = phase_shift(e, 2);
    REQUIRE(out.length() == 6);
    CHECK(out.frames[0].joints == e.frames[0].joints);
    CHECK(out.frames[1].joints == e.frames[0].joints);
    CHECK(out.frames[2].joints == e.frames[0].joints);
    CHECK(out.frames[3].joints == e.frames[1].joints);
    CHECK(out.meta.delay_steps == 2);
  }
  SUBCASE("delay 0 is the identity") {
    const Episode out = phase_shift(e, 0);
    CHECK(out.frames == e.frames);
  }
  SUBCASE("delay -1 trims the first frame") {
    const Episode out = phase_shift(e, -1);
    REQUIRE(out.length() == 3);
    CHECK(out.frames[0].joints == e.frames[1].joints);
    CHECK(out.frames[0].step_index == 0);
    CHECK(out.meta.delay_steps == -1);
  }
  SUBCASE("delay that empties the episode is rejected") {
    CHECK_THROWS(phase_shift(e, -4));
  }
}

TEST_CASE("phase semantics: output[t] = input[max(0, t-d)] over random episodes") {
  Rng rng(1234);
  for (int trial = 0; trial < 300; ++trial) {
    const int t_len = 1 + static_cast<int>(rng.uniform_int(0, 19));
    Episode e = testsupport::random_episode(rng, t_len, 2, 2, 1);
    const int d = static_cast<int>(rng.uniform_int(-t_len + 1, 25));
    const Episode out = phase_shift(e, d);
    REQUIRE(out.length() == t_len + d);
    for (int t = 0; t < out.length(); ++t) {
      const int src = std::max(0, t - d);
      CHECK(out.frames[static_cast<std::size_t>(t)].image ==
            e.frames[static_cast<std::size_t>(src)].image);
      CHECK(out.frames[static_cast<std::size_t>(t)].joints ==
            e.frames[static_cast<std::size_t>(src)].joints);
    }
  }
}

TEST_CASE("equalize_length pads by repeating the final frame") {
  std::vector<JointVector> a(7, JointVector::Constant(0.2)), b(4, JointVector::Constant(0.4));
  for (auto* v : {&a, &b})
    for (auto& q : *v) q[4] = 1.0;
  std::vector<Episode> eps{testsupport::trajectory_episode(a), testsupport::trajectory_episode(b)};
  eps[0].meta.episode_id = "a";
  eps[1].meta.episode_id = "b";

  SUBCASE("equal lengths stay unchanged") {
    auto out = equalize_length({eps[0], eps[0]});
    CHECK(out[0].length() == 7);
    CHECK(out[1].length() == 7);
  }
  SUBCASE("shorter episodes repeat their last frame") {
    auto out = equalize_length(eps);
    REQUIRE(out[1].length() == 7);
    CHECK(out[1].valid_length() == 4);
    for (int t = 4; t < 7; ++t) {
      CHECK(out[1].frames[static_cast<std::size_t>(t)].joints == eps[1].frames[3].joints);
      CHECK(out[1].frames[static_cast<std::size_t>(t)].step_index == t);
    }
  }
  SUBCASE("a target below the longest episode is rejected") {
    CHECK_THROWS(equalize_length(eps, 5));
  }
}

TEST_CASE("augment_grid: 3 demos x 3 ratios x 3 delays = 27 unique episodes") {
  Rng rng(55);
  std::vector<Episode> demos;
  for (int d = 0; d < 3; ++d) {
    Episode e = testsupport::random_episode(rng, 30, 4, 4, 3);
    e.meta.episode_id = "demo" + std::to_string(d);
    e.meta.teach_position = d == 0 ? TeachPosition::A : d == 1 ? TeachPosition::C : TeachPosition::E;
    demos.push_back(std::move(e));
  }
  AugmentSpec spec;  // defaults: {1, 3/2, 2} x {0, 10, 20}
  const GridResult grid = augment_grid(demos, spec);
  CHECK(grid.episodes.size() == 27);
  CHECK(grid.manifest.entries.size() == 27);
  grid.manifest.validate();  // unique provenance keys

  // Every episode is equalized to the longest cell: T = 30 + 20.
  for (const Episode& e : grid.episodes) CHECK(e.length() == 50);

  SUBCASE("the identity cell matches its demo over the valid prefix") {
    const Episode* identity = nullptr;
    for (const Episode& e : grid.episodes)
      if (e.meta.parent_episode_id == "demo0" && e.meta.velocity_ratio == Rational{1, 1} &&
          e.meta.delay_steps == 0)
        identity = &e;
    REQUIRE(identity != nullptr);
    CHECK(identity->valid_length() == 30);
    for (int t = 0; t < 30; ++t)
      CHECK(identity->frames[static_cast<std::size_t>(t)].image == demos[0].frames[static_cast<std::size_t>(t)].image);
  }
  SUBCASE("grid episodes carry provenance") {
    for (const Episode& e : grid.episodes) {
      CHECK(e.meta.source == Source::augmented);
      CHECK(e.meta.parent_episode_id.has_value());
    }
  }
}

TEST_CASE("augment_grid: evaluation grid of untaught ratios and delays has 4 cells") {
  Rng rng(56);
  std::vector<Episode> demos{testsupport::random_episode(rng, 30, 4, 4, 3)};
  demos[0].meta.episode_id = "demo";
  AugmentSpec spec;
  spec.velocity_ratios = {Rational{5, 4}, Rational{7, 4}};  // 1.25, 1.75
  spec.delay_steps = {5, 15};
  const GridResult grid = augment_grid(demos, spec);
  CHECK(grid.episodes.size() == 4);
}

TEST_CASE("augment_grid rejects invalid demos by id") {
  Rng rng(57);
  std::vector<Episode> demos{testsupport::random_episode(rng, 5, 2, 2, 1)};
  demos[0].meta.episode_id = "broken_demo";
  demos[0].frames[2].step_index = 9;
  CHECK_THROWS_WITH_AS(augment_grid(demos, AugmentSpec{}), doctest::Contains("broken_demo"),
                       std::invalid_argument);
}

TEST_CASE("first-frame commutation: shifted, downsampled episodes keep frame 0") {
  Rng rng(58);
  const Episode e = testsupport::random_episode(rng, 24, 3, 3, 1);
  for (const Rational r : {Rational{3, 2}, Rational{2, 1}})
    for (int d : {1, 5, 11}) {
      const Episode out = phase_shift(downsample(e, r), d);
      CHECK(out.frames[0].image == e.frames[0].image);
      CHECK(out.frames[0].joints == e.frames[0].joints);
    }
}
