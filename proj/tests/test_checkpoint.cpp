#include <doctest.h>

#include <beltlab/checkpoint.hpp>
#include <beltlab/nn/model.hpp>

#include <sstream>

#include "support/builders.hpp"

using namespace beltlab;
using namespace beltlab::nn;

TEST_CASE("fresh parameters serialize with every declared array present") {
  ModelParams p = init_params(ModelSpec{}, JointLimits{}, 0);
  std::ostringstream out;
  write_checkpoint(p, nullptr, out);
  const std::string text = out.str();
  for (const char* name : {"conv0_w", "conv1_w", "conv2_w", "proj_w", "lstm_wx", "lstm_wh",
                           "lstm_b", "head_w", "head_b"})
    CHECK(text.find(std::string("\"") + name + "\"") != std::string::npos);
}

TEST_CASE("save then load reproduces forward outputs bit-exactly") {
  ModelSpec spec;
  spec.image_h = 4;
  spec.image_w = 4;
  spec.conv = {{2, 3, 2}};
  spec.feature_dim = 3;
  spec.hidden_dim = 4;
  ModelParams p = init_params(spec, JointLimits{}, 12);

  std::stringstream buf;
  write_checkpoint(p, nullptr, buf);
  const Checkpoint back = read_checkpoint(buf);

  Rng rng(13);
  const Episode e = testsupport::random_episode(rng, 5, 4, 4, 3);
  const SequenceResult a = forward_sequence(e, p);
  const SequenceResult b = forward_sequence(e, back.params);
  CHECK((a.predictions - b.predictions).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("non-finite parameters are refused") {
  ModelParams p = init_params(ModelSpec{}, JointLimits{}, 0);
  p.head_w(0, 0) = std::numeric_limits<double>::quiet_NaN();
  std::ostringstream out;
  CHECK_THROWS_AS(write_checkpoint(p, nullptr, out), CheckpointError);
}

TEST_CASE("a hand-mutated array shape is rejected, naming the array") {
  ModelSpec spec;
  spec.image_h = 2;
  spec.image_w = 2;
  spec.conv = {{1, 3, 2}};
  spec.feature_dim = 2;
  spec.hidden_dim = 2;
  ModelParams p = init_params(spec, JointLimits{}, 1);
  std::stringstream buf;
  write_checkpoint(p, nullptr, buf);
  std::string text = buf.str();
  // head_w is [5 x 2]; claim it is [5 x 3]
  const std::string needle = "\"head_w\":{\"data\"";
  REQUIRE(text.find(needle) != std::string::npos);
  const auto shape_at = text.find("\"shape\":[5,2]", text.find(needle));
  REQUIRE(shape_at != std::string::npos);
  text.replace(shape_at, 13, "\"shape\":[5,3]");
  std::stringstream bad(text);
  CHECK_THROWS_WITH_AS(read_checkpoint(bad), doctest::Contains("head_w"), CheckpointError);
}

TEST_CASE("optimizer state and train info ride along") {
  ModelSpec spec;
  spec.image_h = 2;
  spec.image_w = 2;
  spec.conv = {{1, 3, 2}};
  spec.feature_dim = 2;
  spec.hidden_dim = 2;
  ModelParams p = init_params(spec, JointLimits{}, 2);
  AdamState st{p.zeros_like(), p.zeros_like(), 42};
  st.m.head_b[0] = 0.5;
  TrainInfo info{7, 100, 90, 1.25e-3};

  std::stringstream buf;
  write_checkpoint(p, &st, buf, &info);
  const Checkpoint back = read_checkpoint(buf);
  REQUIRE(back.optimizer.has_value());
  CHECK(back.optimizer->t == 42);
  CHECK(back.optimizer->m.head_b[0] == 0.5);
  REQUIRE(back.info.has_value());
  CHECK(back.info->seed == 7);
  CHECK(back.info->best_loss == 1.25e-3);
}
