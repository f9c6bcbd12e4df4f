#include <doctest.h>

#include <beltlab/nn/model.hpp>
#include <beltlab/nn/train.hpp>

#include "support/builders.hpp"

using namespace beltlab;
using namespace beltlab::nn;

namespace {

ModelSpec tiny_spec(ModelKind kind) {
  ModelSpec s;
  s.kind = kind;
  s.image_h = 2;
  s.image_w = 2;
  s.image_c = 3;
  s.conv = {{2, 3, 2}};
  s.feature_dim = 2;
  s.hidden_dim = 3;
  return s;
}

}  // namespace

TEST_CASE("conv_encode: an all-zero image with zero parameters gives zero features") {
  ModelSpec spec = tiny_spec(ModelKind::recurrent);
  ModelParams p = init_params(spec, JointLimits{}, 0);
  zero_params(p);
  Image img(2, 2, 3);
  const Vec f = conv_encode(img, p);
  CHECK(f.norm() == 0.0);  // ReLU(0) = 0 through the stack, tanh(0) = 0
}

TEST_CASE("conv_encode is pure") {
  ModelSpec spec = tiny_spec(ModelKind::recurrent);
  ModelParams p = init_params(spec, JointLimits{}, 3);
  Rng rng(3);
  Image img(2, 2, 3);
  for (float& v : img.px) v = static_cast<float>(rng.uniform());
  const Vec a = conv_encode(img, p);
  const Vec b = conv_encode(img, p);
  CHECK((a - b).norm() == 0.0);
}

TEST_CASE("conv_encode rejects mismatched shapes, naming both") {
  ModelSpec spec = tiny_spec(ModelKind::recurrent);
  ModelParams p = init_params(spec, JointLimits{}, 3);
  Image img(4, 4, 3);
  CHECK_THROWS_WITH_AS(conv_encode(img, p), doctest::Contains("2x2x3"), std::invalid_argument);
}

TEST_CASE("scalar conv oracle: 1x1 kernel on a 1-pixel image") {
  // feature = tanh(p_w * relu(w*v + b) + p_b), evaluated by hand
  ModelSpec spec;
  spec.kind = ModelKind::recurrent;
  spec.image_h = 1;
  spec.image_w = 1;
  spec.image_c = 1;
  spec.conv = {{1, 1, 1}};
  spec.feature_dim = 1;
  spec.hidden_dim = 2;
  ModelParams p = init_params(spec, JointLimits{}, 0);
  zero_params(p);
  const double w = 0.8, v = 0.63, proj = 1.7;
  p.conv_w[0](0, 0) = w;
  p.proj_w(0, 0) = proj;

  Image img(1, 1, 1);
  img.px[0] = static_cast<float>(v);
  const double vf = static_cast<double>(img.px[0]);
  const double expect = std::tanh(proj * std::max(0.0, w * vf));
  CHECK(conv_encode(img, p)[0] == doctest::Approx(expect).epsilon(1e-12));

  // negative pre-activation is clipped by the ReLU
  p.conv_w[0](0, 0) = -w;
  CHECK(conv_encode(img, p)[0] == doctest::Approx(0.0));
}

TEST_CASE("recurrent_step: zero weights and state give the closed form") {
  // gates sigmoid(0) = 0.5, candidate tanh(0) = 0 so c' = 0, h' = 0 and the
  // output is exactly the head bias.
  ModelSpec spec = tiny_spec(ModelKind::recurrent);
  ModelParams p = init_params(spec, JointLimits{}, 1);
  zero_params(p);
  p.head_b << 0.3, -0.1, 0.2, 0.0, 0.7;
  LstmState state = LstmState::zero(spec.hidden_dim);
  const Vec f = Vec::Zero(spec.feature_dim);
  const Vec a = Vec::Zero(kJointDim);
  const Vec out = recurrent_step(f, a, state, p);
  CHECK((out - p.head_b).norm() == 0.0);
  CHECK(state.h.norm() == 0.0);
  CHECK(state.c.norm() == 0.0);
}

TEST_CASE("recurrent_step matches a hand-computed one-unit cell") {
  ModelSpec spec;
  spec.kind = ModelKind::recurrent;
  spec.image_h = 1;
  spec.image_w = 1;
  spec.image_c = 1;
  spec.conv = {{1, 1, 1}};
  spec.feature_dim = 1;
  spec.hidden_dim = 1;
  ModelParams p = init_params(spec, JointLimits{}, 0);
  zero_params(p);

  // input = [feature, a1..a4, grip]; use feature weight only
  const double wxi = 0.5, wxf = -0.3, wxg = 0.9, wxo = 0.2;
  const double bi = 0.1, bf = 0.2, bg = -0.1, bo = 0.3;
  p.lstm_wx(0, 0) = wxi;
  p.lstm_wx(1, 0) = wxf;
  p.lstm_wx(2, 0) = wxg;
  p.lstm_wx(3, 0) = wxo;
  p.lstm_b << bi, bf, bg, bo;
  p.head_w(0, 0) = 1.3;

  const double x = 0.4, c0 = 0.25, h0 = 0.0;
  LstmState state{Vec::Constant(1, h0), Vec::Constant(1, c0)};
  Vec feat = Vec::Constant(1, x);
  Vec joints = Vec::Zero(kJointDim);
  const Vec out = recurrent_step(feat, joints, state, p);

  // independent scalar computation of the gate equations
  auto sig = [](double z) { return 1.0 / (1.0 + std::exp(-z)); };
  const double gi = sig(wxi * x + bi);
  const double gf = sig(wxf * x + bf);
  const double gg = std::tanh(wxg * x + bg);
  const double go = sig(wxo * x + bo);
  const double c1 = gf * c0 + gi * gg;
  const double h1 = go * std::tanh(c1);
  CHECK(state.c[0] == doctest::Approx(c1).epsilon(1e-14));
  CHECK(state.h[0] == doctest::Approx(h1).epsilon(1e-14));
  CHECK(out[0] == doctest::Approx(1.3 * h1).epsilon(1e-14));
}

TEST_CASE("forward_sequence: T frames give T-1 predictions and a T-row trace") {
  ModelSpec spec = tiny_spec(ModelKind::recurrent);
  ModelParams p = init_params(spec, JointLimits{}, 2);
  Rng rng(2);
  const Episode e = testsupport::random_episode(rng, 2, 2, 2, 3);
  const SequenceResult r = forward_sequence(e, p);
  CHECK(r.predictions.rows() == 1);
  CHECK(r.trace.rows() == 2);
  CHECK(r.trace.row(0).norm() == 0.0);  // zero start state

  Episode short_ep = e;
  short_ep.frames.resize(1);
  CHECK_THROWS(forward_sequence(short_ep, p));
}

TEST_CASE("statelessness boundary: baseline ignores order, recurrent does not") {
  Rng rng(21);
  const Episode e = testsupport::random_episode(rng, 8, 2, 2, 3);
  Episode permuted = e;
  std::swap(permuted.frames[1], permuted.frames[4]);
  for (std::size_t i = 0; i < permuted.frames.size(); ++i)
    permuted.frames[i].step_index = static_cast<int>(i);

  ModelParams base = init_params(tiny_spec(ModelKind::feedforward_baseline), JointLimits{}, 7);
  const SequenceResult b0 = forward_sequence(e, base);
  const SequenceResult b1 = forward_sequence(permuted, base);
  // prediction at t=5 depends only on frame 5, identical in both orders
  CHECK((b0.predictions.row(5) - b1.predictions.row(5)).norm() == 0.0);

  ModelParams rec = init_params(tiny_spec(ModelKind::recurrent), JointLimits{}, 7);
  const SequenceResult r0 = forward_sequence(e, rec);
  const SequenceResult r1 = forward_sequence(permuted, rec);
  CHECK((r0.predictions.row(5) - r1.predictions.row(5)).norm() > 0.0);
}

TEST_CASE("mse_loss: arithmetic and masking") {
  Mat p(2, 1), t(2, 1);
  p << 0.0, 0.0;
  t << 1.0, 3.0;
  SUBCASE("two entries, no mask") {
    CHECK(mse_loss(p, t, {1, 1}) == doctest::Approx(5.0));  // (1 + 9) / 2
  }
  SUBCASE("identical arrays score zero") {
    CHECK(mse_loss(t, t, {1, 1}) == doctest::Approx(0.0));
  }
  SUBCASE("scalar case p=1 t=0") {
    Mat one(1, 1), zero(1, 1);
    one << 1.0;
    zero << 0.0;
    CHECK(mse_loss(one, zero, {1}) == doctest::Approx(1.0));
  }
  SUBCASE("empty mask is an error") {
    CHECK_THROWS(mse_loss(p, t, {0, 0}));
  }
  SUBCASE("masked rows do not contribute") {
    CHECK(mse_loss(p, t, {1, 0}) == doctest::Approx(1.0));
  }
}

TEST_CASE("normalization round trip is exact to 1e-12 inside the limits") {
  JointLimits limits;
  Rng rng(31);
  for (int i = 0; i < 200; ++i) {
    JointVector q;
    for (int k = 0; k < kArmDof; ++k) q[k] = rng.uniform(limits.lo[k], limits.hi[k]);
    q[4] = rng.uniform();
    const JointVector back = denormalize_joints(normalize_joints(q, limits), limits);
    CHECK((back - q).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("masked loss equals unmasked loss when padding is predicted perfectly") {
  // Target rows on the padded tail equal the final frame; if predictions are
  // perfect there the two losses agree.
  Mat pred(4, 2), target(4, 2);
  pred << 1, 2, 3, 4, 9, 9, 9, 9;
  target = pred;
  target(0, 0) = 0.5;  // one live error
  const double masked = mse_loss(pred, target, {1, 1, 0, 0});
  const double unmasked = mse_loss(pred, target, {1, 1, 1, 1});
  CHECK(masked == doctest::Approx(unmasked * 2.0));  // same sum, half the rows
}
