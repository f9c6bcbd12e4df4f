#pragma once

#include <Eigen/Dense>
#include <json.hpp>

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "beltlab/common.hpp"

namespace beltlab {

inline constexpr int kJointDim = 5;  // q1..q4 + gripper opening
inline constexpr int kArmDof = 4;

/// q1..q4 in radians, element 4 = gripper opening in [0, 1] (1 = open).
using JointVector = Eigen::Matrix<double, kJointDim, 1>;

struct JointLimits {
  Eigen::Matrix<double, kArmDof, 1> lo = Eigen::Matrix<double, kArmDof, 1>::Constant(-M_PI);
  Eigen::Matrix<double, kArmDof, 1> hi = Eigen::Matrix<double, kArmDof, 1>::Constant(M_PI);

  bool contains(const JointVector& q, double tol = 1e-9) const {
    for (int i = 0; i < kArmDof; ++i)
      if (!(q[i] >= lo[i] - tol && q[i] <= hi[i] + tol)) return false;
    return q[4] >= -tol && q[4] <= 1.0 + tol;
  }
  JointVector clamp(const JointVector& q) const {
    JointVector r = q;
    for (int i = 0; i < kArmDof; ++i) r[i] = std::clamp(r[i], lo[i], hi[i]);
    r[4] = std::clamp(r[4], 0.0, 1.0);
    return r;
  }
  bool operator==(const JointLimits& o) const { return lo == o.lo && hi == o.hi; }
};

/// Row-major (row, col, channel) intensity grid, values in [0, 1].
/// Pixels are held as float32: that is the sensor/storage precision, and it
/// makes the on-disk codec an exact round trip.
struct Image {
  int h = 0, w = 0, c = 0;
  std::vector<float> px;

  Image() = default;
  Image(int h_, int w_, int c_) : h(h_), w(w_), c(c_), px(static_cast<std::size_t>(h_) * w_ * c_, 0.0f) {}

  float& at(int r, int col, int ch) { return px[(static_cast<std::size_t>(r) * w + col) * c + ch]; }
  float at(int r, int col, int ch) const { return px[(static_cast<std::size_t>(r) * w + col) * c + ch]; }
  std::size_t size() const { return px.size(); }
  bool same_shape(const Image& o) const { return h == o.h && w == o.w && c == o.c; }
  bool operator==(const Image& o) const { return same_shape(o) && px == o.px; }
};

/// Rounds to float32 and back; frame joints are recorded at sensor precision.
/// Kept out of line: when this narrowing fuses into vectorized callers, GCC
/// 11 with AVX-512 has been observed to elide the round trip entirely.
#if defined(__GNUC__)
__attribute__((noinline))
#endif
inline JointVector
quantize_joints(const JointVector& q) {
  JointVector r;
  for (int i = 0; i < kJointDim; ++i) {
    volatile float narrowed = static_cast<float>(q[i]);
    r[i] = static_cast<double>(narrowed);
  }
  return r;
}

struct Frame {
  Image image;
  JointVector joints = JointVector::Zero();
  int step_index = 0;

  bool operator==(const Frame& o) const {
    return image == o.image && joints == o.joints && step_index == o.step_index;
  }
};

enum class Source { demo, augmented, rollout };
enum class TeachPosition { A, B, C, D, E, none };
enum class ObjectShape { cylinder_disk, ball, box };

std::string to_string(Source s);
std::string to_string(TeachPosition p);
std::string to_string(ObjectShape s);
Source source_from_string(const std::string& s);
TeachPosition position_from_string(const std::string& s);
ObjectShape shape_from_string(const std::string& s);

struct ObjectSpec {
  ObjectShape shape = ObjectShape::cylinder_disk;
  double size = 0.03;  // radius or half-extent in metres
  Eigen::Vector3d color{0.9, 0.1, 0.1};
  double lateral_speed = 0.0;      // m/s across the belt (ball mode)
  double wobble_amplitude = 0.0;   // m, 0 = none

  bool operator==(const ObjectSpec& o) const {
    return shape == o.shape && size == o.size && color == o.color &&
           lateral_speed == o.lateral_speed && wobble_amplitude == o.wobble_amplitude;
  }
};

/// Belt speed schedule descriptor. Also rides inside episode metadata.
struct ScheduleSpec {
  enum class Kind { constant, step, random };
  Kind kind = Kind::constant;
  double rpm_a = 50.0;
  double rpm_b = 50.0;       // step: speed after the switch
  double switch_time_s = 5.0;
  double min_rpm = 50.0, max_rpm = 100.0, dwell_s = 2.0;  // random
  std::uint64_t seed = 0;

  static ScheduleSpec constant(double rpm) {
    ScheduleSpec s;
    s.kind = Kind::constant;
    s.rpm_a = rpm;
    return s;
  }
  static ScheduleSpec step(double from, double to, double at_s) {
    ScheduleSpec s;
    s.kind = Kind::step;
    s.rpm_a = from;
    s.rpm_b = to;
    s.switch_time_s = at_s;
    return s;
  }
  static ScheduleSpec random(double lo, double hi, double dwell, std::uint64_t seed) {
    ScheduleSpec s;
    s.kind = Kind::random;
    s.min_rpm = lo;
    s.max_rpm = hi;
    s.dwell_s = dwell;
    s.seed = seed;
    return s;
  }
  bool operator==(const ScheduleSpec& o) const {
    return kind == o.kind && rpm_a == o.rpm_a && rpm_b == o.rpm_b &&
           switch_time_s == o.switch_time_s && min_rpm == o.min_rpm && max_rpm == o.max_rpm &&
           dwell_s == o.dwell_s && seed == o.seed;
  }
};

/// Evaluates rpm(t). Random schedules draw their piecewise-constant segments
/// once, in order, from the spec seed.
class ScheduleSampler {
 public:
  ScheduleSampler(const ScheduleSpec& spec, double duration_s);
  double rpm_at(double t) const;

 private:
  ScheduleSpec spec_;
  std::vector<double> segments_;  // random mode only
};

struct EpisodeMeta {
  std::string episode_id;
  Source source = Source::demo;
  TeachPosition teach_position = TeachPosition::none;
  ScheduleSpec belt;
  Rational velocity_ratio{1, 1};
  int delay_steps = 0;
  std::optional<std::string> parent_episode_id;
  std::uint64_t seed = 0;
  double sample_rate_hz = 10.0;
  ObjectSpec object;
  double start_x_offset = 0.0;  // realized object start offset (incl. jitter)
  int valid_length = 0;  // 0 = all frames are live data (no padding)

  bool operator==(const EpisodeMeta& o) const;
};

struct Episode {
  EpisodeMeta meta;
  std::vector<Frame> frames;

  int length() const { return static_cast<int>(frames.size()); }
  int valid_length() const { return meta.valid_length > 0 ? meta.valid_length : length(); }
  bool operator==(const Episode& o) const { return meta == o.meta && frames == o.frames; }
};

inline constexpr int kMaxEpisodeLength = 10000;

struct EpisodeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Checks every coredata invariant; throws EpisodeError naming the first
/// violation found.
void validate_episode(const Episode& e);

// JSON codecs for the metadata block and manifests.
nlohmann::json to_json(const ObjectSpec& o);
ObjectSpec object_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ScheduleSpec& s);
ScheduleSpec schedule_from_json(const nlohmann::json& j);
nlohmann::json to_json(const EpisodeMeta& m);
EpisodeMeta meta_from_json(const nlohmann::json& j);

}  // namespace beltlab
