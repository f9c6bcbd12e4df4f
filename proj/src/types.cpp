#include "beltlab/types.hpp"

#include <algorithm>
#include <cmath>

namespace beltlab {

std::string to_string(Source s) {
  switch (s) {
    case Source::demo: return "demo";
    case Source::augmented: return "augmented";
    case Source::rollout: return "rollout";
  }
  return "demo";
}

std::string to_string(TeachPosition p) {
  switch (p) {
    case TeachPosition::A: return "A";
    case TeachPosition::B: return "B";
    case TeachPosition::C: return "C";
    case TeachPosition::D: return "D";
    case TeachPosition::E: return "E";
    case TeachPosition::none: return "none";
  }
  return "none";
}

std::string to_string(ObjectShape s) {
  switch (s) {
    case ObjectShape::cylinder_disk: return "cylinder_disk";
    case ObjectShape::ball: return "ball";
    case ObjectShape::box: return "box";
  }
  return "cylinder_disk";
}

Source source_from_string(const std::string& s) {
  if (s == "demo") return Source::demo;
  if (s == "augmented") return Source::augmented;
  if (s == "rollout") return Source::rollout;
  throw EpisodeError("unknown source: " + s);
}

TeachPosition position_from_string(const std::string& s) {
  if (s == "A") return TeachPosition::A;
  if (s == "B") return TeachPosition::B;
  if (s == "C") return TeachPosition::C;
  if (s == "D") return TeachPosition::D;
  if (s == "E") return TeachPosition::E;
  if (s == "none") return TeachPosition::none;
  throw EpisodeError("unknown teach position: " + s);
}

ObjectShape shape_from_string(const std::string& s) {
  if (s == "cylinder_disk") return ObjectShape::cylinder_disk;
  if (s == "ball") return ObjectShape::ball;
  if (s == "box") return ObjectShape::box;
  throw EpisodeError("unknown object shape: " + s);
}

ScheduleSampler::ScheduleSampler(const ScheduleSpec& spec, double duration_s) : spec_(spec) {
  if (spec.kind == ScheduleSpec::Kind::random) {
    const int n = static_cast<int>(std::ceil(duration_s / spec.dwell_s)) + 1;
    Rng rng(spec.seed);
    segments_.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) segments_.push_back(rng.uniform(spec.min_rpm, spec.max_rpm));
  }
}

double ScheduleSampler::rpm_at(double t) const {
  switch (spec_.kind) {
    case ScheduleSpec::Kind::constant:
      return spec_.rpm_a;
    case ScheduleSpec::Kind::step:
      return t < spec_.switch_time_s ? spec_.rpm_a : spec_.rpm_b;
    case ScheduleSpec::Kind::random: {
      const auto i = static_cast<std::size_t>(std::max(0.0, t) / spec_.dwell_s);
      return segments_[std::min(i, segments_.size() - 1)];
    }
  }
  return spec_.rpm_a;
}

bool EpisodeMeta::operator==(const EpisodeMeta& o) const {
  return episode_id == o.episode_id && source == o.source && teach_position == o.teach_position &&
         belt == o.belt && velocity_ratio == o.velocity_ratio && delay_steps == o.delay_steps &&
         parent_episode_id == o.parent_episode_id && seed == o.seed &&
         sample_rate_hz == o.sample_rate_hz && object == o.object &&
         start_x_offset == o.start_x_offset && valid_length == o.valid_length;
}

void validate_episode(const Episode& e) {
  if (e.frames.empty()) throw EpisodeError("episode has no frames");
  if (e.length() > kMaxEpisodeLength) throw EpisodeError("episode exceeds length bound");
  if (e.meta.sample_rate_hz <= 0) throw EpisodeError("sample rate must be positive");
  if (e.meta.velocity_ratio.num <= 0) throw EpisodeError("velocity ratio must be positive");
  if (e.meta.source == Source::demo &&
      (!(e.meta.velocity_ratio == Rational{1, 1}) || e.meta.delay_steps != 0))
    throw EpisodeError("demo episodes must have ratio 1 and delay 0");
  if (e.meta.source == Source::augmented && !e.meta.parent_episode_id)
    throw EpisodeError("augmented episode missing parent id");
  if (e.meta.valid_length < 0 || e.meta.valid_length > e.length())
    throw EpisodeError("valid_length out of range");

  const Image& first = e.frames.front().image;
  if (first.h <= 0 || first.w <= 0 || first.c <= 0) throw EpisodeError("bad image shape");
  for (std::size_t i = 0; i < e.frames.size(); ++i) {
    const Frame& f = e.frames[i];
    if (!f.image.same_shape(first))
      throw EpisodeError("frame " + std::to_string(i) + ": image shape mismatch");
    if (f.step_index != static_cast<int>(i))
      throw EpisodeError("frame " + std::to_string(i) + ": step_index not contiguous");
    for (float v : f.image.px)
      if (!(v >= 0.0f && v <= 1.0f))
        throw EpisodeError("frame " + std::to_string(i) + ": pixel out of [0,1]");
    for (int k = 0; k < kJointDim; ++k)
      if (!std::isfinite(f.joints[k]))
        throw EpisodeError("frame " + std::to_string(i) + ": non-finite joint");
    if (f.joints[4] < 0.0 || f.joints[4] > 1.0)
      throw EpisodeError("frame " + std::to_string(i) + ": grip out of [0,1]");
  }
}

nlohmann::json to_json(const ObjectSpec& o) {
  return {{"shape", to_string(o.shape)},
          {"size", o.size},
          {"color", {o.color[0], o.color[1], o.color[2]}},
          {"lateral_speed", o.lateral_speed},
          {"wobble_amplitude", o.wobble_amplitude}};
}

ObjectSpec object_from_json(const nlohmann::json& j) {
  ObjectSpec o;
  o.shape = shape_from_string(j.at("shape").get<std::string>());
  o.size = j.at("size").get<double>();
  const auto& c = j.at("color");
  o.color = Eigen::Vector3d(c.at(0).get<double>(), c.at(1).get<double>(), c.at(2).get<double>());
  o.lateral_speed = j.at("lateral_speed").get<double>();
  o.wobble_amplitude = j.at("wobble_amplitude").get<double>();
  return o;
}

nlohmann::json to_json(const ScheduleSpec& s) {
  nlohmann::json j;
  switch (s.kind) {
    case ScheduleSpec::Kind::constant:
      j = {{"kind", "constant"}, {"rpm", s.rpm_a}};
      break;
    case ScheduleSpec::Kind::step:
      j = {{"kind", "step"}, {"rpm_a", s.rpm_a}, {"rpm_b", s.rpm_b}, {"switch_time_s", s.switch_time_s}};
      break;
    case ScheduleSpec::Kind::random:
      j = {{"kind", "random"},
           {"min_rpm", s.min_rpm},
           {"max_rpm", s.max_rpm},
           {"dwell_s", s.dwell_s},
           {"seed", s.seed}};
      break;
  }
  return j;
}

ScheduleSpec schedule_from_json(const nlohmann::json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "constant") return ScheduleSpec::constant(j.at("rpm").get<double>());
  if (kind == "step")
    return ScheduleSpec::step(j.at("rpm_a").get<double>(), j.at("rpm_b").get<double>(),
                              j.at("switch_time_s").get<double>());
  if (kind == "random")
    return ScheduleSpec::random(j.at("min_rpm").get<double>(), j.at("max_rpm").get<double>(),
                                j.at("dwell_s").get<double>(), j.at("seed").get<std::uint64_t>());
  throw EpisodeError("unknown schedule kind: " + kind);
}

nlohmann::json to_json(const EpisodeMeta& m) {
  nlohmann::json j{{"episode_id", m.episode_id},
                   {"source", to_string(m.source)},
                   {"teach_position", to_string(m.teach_position)},
                   {"belt", to_json(m.belt)},
                   {"velocity_ratio", m.velocity_ratio.str()},
                   {"delay_steps", m.delay_steps},
                   {"seed", m.seed},
                   {"sample_rate_hz", m.sample_rate_hz},
                   {"object", to_json(m.object)},
                   {"start_x_offset", m.start_x_offset},
                   {"valid_length", m.valid_length}};
  if (m.parent_episode_id) j["parent_episode_id"] = *m.parent_episode_id;
  return j;
}

EpisodeMeta meta_from_json(const nlohmann::json& j) {
  EpisodeMeta m;
  m.episode_id = j.at("episode_id").get<std::string>();
  m.source = source_from_string(j.at("source").get<std::string>());
  m.teach_position = position_from_string(j.at("teach_position").get<std::string>());
  m.belt = schedule_from_json(j.at("belt"));
  m.velocity_ratio = Rational::parse(j.at("velocity_ratio").get<std::string>());
  m.delay_steps = j.at("delay_steps").get<int>();
  if (j.contains("parent_episode_id")) m.parent_episode_id = j.at("parent_episode_id").get<std::string>();
  m.seed = j.at("seed").get<std::uint64_t>();
  m.sample_rate_hz = j.at("sample_rate_hz").get<double>();
  m.object = object_from_json(j.at("object"));
  m.start_x_offset = j.at("start_x_offset").get<double>();
  m.valid_length = j.at("valid_length").get<int>();
  return m;
}

}  // namespace beltlab
