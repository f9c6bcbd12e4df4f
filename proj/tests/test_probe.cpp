#include <doctest.h>

#include <beltlab/analysis/probe.hpp>

using namespace beltlab;
using namespace beltlab::analysis;

namespace {

nn::HiddenTrace make_trace(const std::vector<Mat>& states, const std::vector<int>& speed,
                           const std::vector<int>& position) {
  nn::HiddenTrace t;
  t.states = states;
  t.speed_class = speed;
  t.position_class = position;
  for (const Mat& s : states) t.valid_len.push_back(static_cast<int>(s.rows()));
  return t;
}

}  // namespace

TEST_CASE("hand-built class-disjoint clusters probe at accuracy 1") {
  std::vector<Mat> states;
  std::vector<int> speed;
  Rng rng(3);
  for (int e = 0; e < 6; ++e) {
    const int cls = e % 3;
    Mat s(12, 4);
    for (int t = 0; t < 12; ++t)
      for (int c = 0; c < 4; ++c) s(t, c) = 10.0 * cls + rng.uniform(-0.5, 0.5);
    states.push_back(s);
    speed.push_back(cls);
  }
  const auto trace = make_trace(states, speed, std::vector<int>(6, 0));
  CHECK(separability_probe(trace, ProbeFactor::speed) == doctest::Approx(1.0));
}

TEST_CASE("a single class is rejected") {
  std::vector<Mat> states{Mat::Zero(5, 3), Mat::Ones(5, 3)};
  const auto trace = make_trace(states, {1, 1}, {0, 0});
  CHECK_THROWS(separability_probe(trace, ProbeFactor::speed));
}

TEST_CASE("random labels on identical vectors sit at chance level") {
  // All episodes share one constant state vector; with labels assigned at
  // random the nearest-centroid tie-break always picks the lowest class, so
  // pooled accuracy averages 1/n_classes across label draws.
  double mean_acc = 0.0;
  int runs = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(seed);
    std::vector<Mat> states;
    std::vector<int> labels;
    bool two_classes = false;
    for (int e = 0; e < 9; ++e) {
      states.push_back(Mat::Constant(10, 4, 0.7));
      labels.push_back(static_cast<int>(rng.uniform_int(0, 2)));
    }
    for (int l : labels)
      if (l != labels[0]) two_classes = true;
    if (!two_classes) continue;
    const auto trace = make_trace(states, labels, std::vector<int>(9, 0));
    mean_acc += separability_probe(trace, ProbeFactor::speed);
    ++runs;
  }
  mean_acc /= runs;
  CHECK(mean_acc == doctest::Approx(1.0 / 3.0).epsilon(0.45));  // within +-0.15 absolute
  CHECK(std::abs(mean_acc - 1.0 / 3.0) <= 0.15);
}

TEST_CASE("the window honours per-episode valid lengths") {
  // Early samples are mixed; only the last third separates. With the window
  // at the padded tail the classes would blur, over the valid length they
  // split cleanly.
  std::vector<Mat> states;
  std::vector<int> speed;
  for (int e = 0; e < 4; ++e) {
    const int cls = e % 2;
    Mat s = Mat::Zero(12, 3);
    for (int t = 7; t < 10; ++t) s.row(t) = Vec::Constant(3, 5.0 * cls).transpose();
    // rows 10..11 are padding noise shared by both classes
    s.row(10).setConstant(99.0);
    s.row(11).setConstant(99.0);
    states.push_back(s);
    speed.push_back(cls);
  }
  nn::HiddenTrace t;
  t.states = states;
  t.speed_class = speed;
  t.position_class = std::vector<int>(4, 0);
  t.valid_len = std::vector<int>(4, 10);  // windows stop before the noise
  CHECK(separability_probe(t, ProbeFactor::speed, 0.7, 1.0) == doctest::Approx(1.0));
}
