#include "beltlab/config.hpp"

#include <fstream>

namespace beltlab {

using nlohmann::json;

namespace {

json joint_vector_to_json(const JointVector& q) {
  return {q[0], q[1], q[2], q[3], q[4]};
}

JointVector joint_vector_from_json(const json& j) {
  JointVector q;
  for (int i = 0; i < kJointDim; ++i) q[i] = j.at(static_cast<std::size_t>(i)).get<double>();
  return q;
}

json world_to_json(const sim::WorldConfig& w) {
  return {{"belt_x", {w.belt_x0, w.belt_x1}},
          {"belt_y", {w.belt_y0, w.belt_y1}},
          {"rpm_to_mps", w.rpm_to_mps},
          {"arm_base", {w.arm.base.x(), w.arm.base.y()}},
          {"arm_base_orientation", w.arm.base_orientation},
          {"arm_links", {w.arm.links[0], w.arm.links[1], w.arm.links[2], w.arm.links[3]}},
          {"capture_radius", w.capture_radius},
          {"max_joint_speed", w.max_joint_speed},
          {"grip_close_threshold", w.grip_close_threshold},
          {"sample_rate_hz", w.sample_rate_hz},
          {"camera", {w.camera.x0, w.camera.x1, w.camera.y0, w.camera.y1}},
          {"joint_limits_lo", {w.limits.lo[0], w.limits.lo[1], w.limits.lo[2], w.limits.lo[3]}},
          {"joint_limits_hi", {w.limits.hi[0], w.limits.hi[1], w.limits.hi[2], w.limits.hi[3]}},
          {"intercept", {w.intercept.x(), w.intercept.y()}},
          {"home_pose", joint_vector_to_json(w.home_pose)},
          {"object_y", w.object_y},
          {"object_start_x", w.object_start_x},
          {"position_offsets",
           {w.position_offsets[0], w.position_offsets[1], w.position_offsets[2],
            w.position_offsets[3], w.position_offsets[4]}}};
}

sim::WorldConfig world_from_json(const json& j) {
  sim::WorldConfig w;
  w.belt_x0 = j.at("belt_x").at(0).get<double>();
  w.belt_x1 = j.at("belt_x").at(1).get<double>();
  w.belt_y0 = j.at("belt_y").at(0).get<double>();
  w.belt_y1 = j.at("belt_y").at(1).get<double>();
  w.rpm_to_mps = j.at("rpm_to_mps").get<double>();
  w.arm.base = sim::Vec2(j.at("arm_base").at(0).get<double>(), j.at("arm_base").at(1).get<double>());
  w.arm.base_orientation = j.at("arm_base_orientation").get<double>();
  for (int i = 0; i < kArmDof; ++i)
    w.arm.links[static_cast<std::size_t>(i)] = j.at("arm_links").at(static_cast<std::size_t>(i)).get<double>();
  w.capture_radius = j.at("capture_radius").get<double>();
  w.max_joint_speed = j.at("max_joint_speed").get<double>();
  w.grip_close_threshold = j.at("grip_close_threshold").get<double>();
  w.sample_rate_hz = j.at("sample_rate_hz").get<double>();
  w.camera.x0 = j.at("camera").at(0).get<double>();
  w.camera.x1 = j.at("camera").at(1).get<double>();
  w.camera.y0 = j.at("camera").at(2).get<double>();
  w.camera.y1 = j.at("camera").at(3).get<double>();
  for (int i = 0; i < kArmDof; ++i) {
    w.limits.lo[i] = j.at("joint_limits_lo").at(static_cast<std::size_t>(i)).get<double>();
    w.limits.hi[i] = j.at("joint_limits_hi").at(static_cast<std::size_t>(i)).get<double>();
  }
  w.intercept = sim::Vec2(j.at("intercept").at(0).get<double>(), j.at("intercept").at(1).get<double>());
  w.home_pose = joint_vector_from_json(j.at("home_pose"));
  w.object_y = j.at("object_y").get<double>();
  w.object_start_x = j.at("object_start_x").get<double>();
  for (int i = 0; i < 5; ++i)
    w.position_offsets[static_cast<std::size_t>(i)] =
        j.at("position_offsets").at(static_cast<std::size_t>(i)).get<double>();
  return w;
}

json augment_to_json(const aug::AugmentSpec& a) {
  json ratios = json::array();
  for (const Rational& r : a.velocity_ratios) ratios.push_back(r.str());
  return {{"velocity_ratios", ratios},
          {"delay_steps", a.delay_steps},
          {"post_pad_to_length", a.post_pad_to_length}};
}

aug::AugmentSpec augment_from_json(const json& j) {
  aug::AugmentSpec a;
  a.velocity_ratios.clear();
  for (const auto& r : j.at("velocity_ratios"))
    a.velocity_ratios.push_back(Rational::parse(r.get<std::string>()));
  a.delay_steps = j.at("delay_steps").get<std::vector<int>>();
  a.post_pad_to_length = j.at("post_pad_to_length").get<int>();
  return a;
}

json model_to_json(const nn::ModelSpec& m) {
  json conv = json::array();
  for (const auto& l : m.conv) conv.push_back({l.filters, l.kernel, l.stride});
  return {{"conv", conv},
          {"feature_dim", m.feature_dim},
          {"hidden_dim", m.hidden_dim},
          {"residual_head", m.residual_head}};
}

nn::ModelSpec model_from_json(const json& j) {
  nn::ModelSpec m;
  m.conv.clear();
  for (const auto& l : j.at("conv"))
    m.conv.push_back({l.at(0).get<int>(), l.at(1).get<int>(), l.at(2).get<int>()});
  m.feature_dim = j.at("feature_dim").get<int>();
  m.hidden_dim = j.at("hidden_dim").get<int>();
  m.residual_head = j.at("residual_head").get<bool>();
  return m;
}

json grid_to_json(const evalh::ConditionGrid& g) {
  json positions = json::array();
  for (TeachPosition p : g.positions) positions.push_back(to_string(p));
  return {{"fixed_speeds", g.fixed_speeds},
          {"variable_speeds", g.variable_speeds},
          {"step_switch_time_s", g.step_switch_time_s},
          {"random_dwell_s", g.random_dwell_s},
          {"positions", positions},
          {"trials", g.trials},
          {"jitter", g.jitter},
          {"seed", g.seed},
          {"duration_s", g.duration_s}};
}

evalh::ConditionGrid grid_from_json(const json& j) {
  evalh::ConditionGrid g;
  g.fixed_speeds = j.at("fixed_speeds").get<std::vector<double>>();
  g.variable_speeds = j.at("variable_speeds").get<bool>();
  g.step_switch_time_s = j.at("step_switch_time_s").get<double>();
  g.random_dwell_s = j.at("random_dwell_s").get<double>();
  g.positions.clear();
  for (const auto& p : j.at("positions")) g.positions.push_back(position_from_string(p.get<std::string>()));
  g.trials = j.at("trials").get<int>();
  g.jitter = j.at("jitter").get<double>();
  g.seed = j.at("seed").get<std::uint64_t>();
  g.duration_s = j.at("duration_s").get<double>();
  return g;
}

json train_to_json(const nn::TrainConfig& t) {
  return {{"learning_rate", t.learning_rate},
          {"learning_rate_final", t.learning_rate_final},
          {"beta1", t.beta1},
          {"beta2", t.beta2},
          {"epsilon", t.epsilon},
          {"epochs", t.epochs},
          {"mask_padding", t.mask_padding},
          {"grad_clip", t.grad_clip},
          {"seed", t.seed},
          {"target_loss", t.target_loss},
          {"input_noise_std", t.input_noise_std},
          {"grip_noise_std", t.grip_noise_std},
          {"self_feed_prob", t.self_feed_prob},
          {"synth_fraction", t.synth_fraction}};
}

nn::TrainConfig train_from_json(const json& j) {
  nn::TrainConfig t;
  t.learning_rate = j.at("learning_rate").get<double>();
  t.learning_rate_final = j.at("learning_rate_final").get<double>();
  t.beta1 = j.at("beta1").get<double>();
  t.beta2 = j.at("beta2").get<double>();
  t.epsilon = j.at("epsilon").get<double>();
  t.epochs = j.at("epochs").get<int>();
  t.mask_padding = j.at("mask_padding").get<bool>();
  t.grad_clip = j.at("grad_clip").get<double>();
  t.seed = j.at("seed").get<std::uint64_t>();
  t.target_loss = j.at("target_loss").get<double>();
  t.input_noise_std = j.at("input_noise_std").get<double>();
  t.grip_noise_std = j.at("grip_noise_std").get<double>();
  t.self_feed_prob = j.at("self_feed_prob").get<double>();
  t.synth_fraction = j.at("synth_fraction").get<double>();
  if (t.learning_rate <= 0) throw ConfigError("learning_rate must be positive");
  if (t.beta1 <= 0 || t.beta1 >= 1 || t.beta2 <= 0 || t.beta2 >= 1)
    throw ConfigError("adam betas must lie in (0,1)");
  return t;
}

json teacher_to_json(const sim::TeacherParams& t) {
  return {{"reach_duration_s", t.reach_duration_s},
          {"close_duration_s", t.close_duration_s},
          {"return_duration_s", t.return_duration_s},
          {"close_trigger_factor", t.close_trigger_factor},
          {"arrival_bias_s", t.arrival_bias_s}};
}

sim::TeacherParams teacher_from_json(const json& j) {
  sim::TeacherParams t;
  t.reach_duration_s = j.at("reach_duration_s").get<double>();
  t.close_duration_s = j.at("close_duration_s").get<double>();
  t.return_duration_s = j.at("return_duration_s").get<double>();
  t.close_trigger_factor = j.at("close_trigger_factor").get<double>();
  t.arrival_bias_s = j.at("arrival_bias_s").get<double>();
  return t;
}

void apply_override(json& j, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos)
    throw ConfigError("override must look like key.path=value: " + assignment);
  const std::string path = assignment.substr(0, eq);
  const std::string value = assignment.substr(eq + 1);

  json* node = &j;
  std::size_t start = 0;
  while (true) {
    const auto dot = path.find('.', start);
    const std::string key = path.substr(start, dot == std::string::npos ? dot : dot - start);
    if (key.empty()) throw ConfigError("bad override path: " + path);
    if (dot == std::string::npos) {
      json parsed;
      try {
        parsed = json::parse(value);
      } catch (const json::exception&) {
        parsed = value;  // plain string
      }
      (*node)[key] = parsed;
      return;
    }
    node = &(*node)[key];
    start = dot + 1;
  }
}

}  // namespace

json to_json(const AppConfig& c) {
  return {{"world", world_to_json(c.world)},
          {"teacher", teacher_to_json(c.teacher)},
          {"image", {{"h", c.image_h}, {"w", c.image_w}, {"c", c.image_c}}},
          {"demo_duration_s", c.demo_duration_s},
          {"object", to_json(c.object)},
          {"augment", augment_to_json(c.augment)},
          {"eval_augment", augment_to_json(c.eval_augment)},
          {"model", model_to_json(c.model)},
          {"train", train_to_json(c.train)},
          {"grid", grid_to_json(c.grid)},
          {"seed", c.seed},
          {"workers", c.workers}};
}

AppConfig config_from_json(const json& j) {
  AppConfig c;
  c.world = world_from_json(j.at("world"));
  c.teacher = teacher_from_json(j.at("teacher"));
  c.image_h = j.at("image").at("h").get<int>();
  c.image_w = j.at("image").at("w").get<int>();
  c.image_c = j.at("image").at("c").get<int>();
  c.demo_duration_s = j.at("demo_duration_s").get<double>();
  c.object = object_from_json(j.at("object"));
  c.augment = augment_from_json(j.at("augment"));
  c.eval_augment = augment_from_json(j.at("eval_augment"));
  c.model = model_from_json(j.at("model"));
  c.train = train_from_json(j.at("train"));
  c.grid = grid_from_json(j.at("grid"));
  c.seed = j.at("seed").get<std::uint64_t>();
  c.workers = j.at("workers").get<int>();
  if (c.image_h <= 0 || c.image_w <= 0 || c.image_c <= 0) throw ConfigError("bad image shape");
  if (c.augment.velocity_ratios.empty()) throw ConfigError("augment: empty ratio list");
  if (c.augment.delay_steps.empty()) throw ConfigError("augment: empty delay list");
  for (const Rational& r : c.augment.velocity_ratios)
    if (r < Rational{1, 1}) throw ConfigError("augment: ratios must be >= 1");
  return c;
}

AppConfig load_config(const std::string& config_path, const std::vector<std::string>& overrides,
                      std::uint64_t seed) {
  json j = to_json(AppConfig{});
  if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in) throw ConfigError("cannot open config file " + config_path);
    json file;
    try {
      file = json::parse(in);
    } catch (const json::exception& e) {
      throw ConfigError(std::string("config parse: ") + e.what());
    }
    j.merge_patch(file);
  }
  j["seed"] = seed;
  // The root seed feeds the component streams unless the file or an override
  // pins them explicitly.
  j["train"]["seed"] = derive_seed(seed, "train");
  j["grid"]["seed"] = derive_seed(seed, "grid");
  for (const std::string& o : overrides) apply_override(j, o);
  return config_from_json(j);
}

std::uint64_t config_hash(const AppConfig& c) { return fnv1a64(to_json(c).dump()); }

void write_config_echo(const AppConfig& c, const std::filesystem::path& dir) {
  json j = to_json(c);
  j["config_hash"] = hex64(config_hash(c));
  std::ofstream out(dir / "resolved_config.json", std::ios::trunc);
  if (!out) throw ConfigError("cannot write config echo in " + dir.string());
  out << j.dump(2) << "\n";
}

}  // namespace beltlab
