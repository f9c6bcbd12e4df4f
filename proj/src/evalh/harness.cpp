#include "beltlab/evalh/harness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace beltlab::evalh {

DemoResult record_demo(const DemoSpec& spec, const sim::WorldConfig& world) {
  sim::TeacherMemory memory;
  const sim::TeacherParams teacher = spec.teacher;

  sim::RunSpec run;
  run.schedule = ScheduleSpec::constant(spec.rpm);
  run.object = spec.object;
  const double upstream = spec.rpm * world.rpm_to_mps * spec.start_time_offset_s;
  run.start_x_offset = world.position_offset(spec.position) - upstream + spec.extra_x_jitter;
  run.duration_s = spec.duration_s;
  run.seed = spec.seed;
  run.image_h = spec.image_h;
  run.image_w = spec.image_w;
  run.image_c = spec.image_c;
  run.meta_template.episode_id = spec.id;
  run.meta_template.source = Source::demo;
  run.meta_template.teach_position = spec.position;

  auto policy = [&](const sim::WorldState& ws, const Image&, int) {
    return sim::teacher_tick(ws, memory, world, teacher);
  };
  DemoResult result;
  sim::RunResult r = sim::run_episode(policy, run, world);
  if (memory.ik_failed)
    throw std::runtime_error("record_demo: teacher IK failed for " + spec.id);
  result.episode = std::move(r.episode);
  result.outcome = std::move(r.outcome);
  return result;
}

TrainingVariants build_training_variants(const sim::WorldConfig& world,
                                         const sim::TeacherParams& teacher,
                                         const aug::AugmentSpec& aug_spec, int image_h, int image_w,
                                         int image_c, std::uint64_t seed, double demo_duration_s) {
  TrainingVariants out;
  const std::vector<TeachPosition> taught{TeachPosition::A, TeachPosition::C, TeachPosition::E};

  for (TeachPosition pos : taught) {
    DemoSpec spec;
    spec.position = pos;
    spec.rpm = 50.0;
    spec.teacher = teacher;
    spec.duration_s = demo_duration_s;
    spec.image_h = image_h;
    spec.image_w = image_w;
    spec.image_c = image_c;
    spec.seed = derive_seed(seed, "demo/" + to_string(pos));
    spec.id = "demo_" + to_string(pos);
    DemoResult demo = record_demo(spec, world);
    if (!demo.outcome.success)
      throw std::runtime_error("teaching demo failed to grasp at position " + to_string(pos));
    out.demos.push_back(std::move(demo.episode));
  }

  out.augmented = aug::augment_grid(out.demos, aug_spec);

  // Conventional variant: direct demos across position x speed x start-offset
  // cells, with per-demo timing jitter standing in for manual-collection
  // inconsistency. Failed takes are redone with fresh jitter.
  const std::vector<double> speeds{50.0, 75.0, 100.0};
  const std::vector<double> offsets{0.0, 1.0, 2.0};
  for (TeachPosition pos : taught) {
    for (double rpm : speeds) {
      for (double offset : offsets) {
        const std::string cell = "conv/" + to_string(pos) + "/" + std::to_string(static_cast<int>(rpm)) +
                                 "/" + std::to_string(static_cast<int>(offset));
        DemoResult demo;
        bool ok = false;
        for (int attempt = 0; attempt < 20 && !ok; ++attempt) {
          Rng rng(derive_seed(seed, cell + "/take" + std::to_string(attempt)));
          DemoSpec spec;
          spec.position = pos;
          spec.rpm = rpm;
          spec.start_time_offset_s = offset;
          spec.extra_x_jitter = rng.uniform(-0.01, 0.01);
          spec.teacher = teacher;
          spec.teacher.arrival_bias_s = rng.uniform(-0.3, 0.3);
          spec.teacher.reach_duration_s = teacher.reach_duration_s * rng.uniform(0.8, 1.2);
          spec.teacher.close_trigger_factor = teacher.close_trigger_factor * rng.uniform(0.8, 1.2);
          spec.duration_s = demo_duration_s;
          spec.image_h = image_h;
          spec.image_w = image_w;
          spec.image_c = image_c;
          spec.seed = derive_seed(seed, cell);
          spec.id = "conv_" + to_string(pos) + "_" + std::to_string(static_cast<int>(rpm)) + "_o" +
                    std::to_string(static_cast<int>(offset));
          demo = record_demo(spec, world);
          ok = demo.outcome.success;
        }
        if (!ok) throw std::runtime_error("conventional demo never succeeded in cell " + cell);
        out.conventional.push_back(std::move(demo.episode));
      }
    }
  }

  out.conventional_manifest.image_h = image_h;
  out.conventional_manifest.image_w = image_w;
  out.conventional_manifest.image_c = image_c;
  out.conventional_manifest.limits = world.limits;
  for (const Episode& e : out.conventional)
    out.conventional_manifest.add(e, e.meta.episode_id + ".epi");
  out.conventional_manifest.validate();
  out.augmented.manifest.limits = world.limits;
  return out;
}

const CellResult* SuccessMatrix::find(const std::string& speed_label, TeachPosition pos) const {
  for (const CellResult& c : cells)
    if (c.speed_label == speed_label && c.position == pos) return &c;
  return nullptr;
}

std::pair<int, int> SuccessMatrix::totals(const std::vector<std::string>& speed_labels,
                                          const std::vector<TeachPosition>& positions) const {
  int successes = 0, trials = 0;
  for (const CellResult& c : cells) {
    if (std::find(speed_labels.begin(), speed_labels.end(), c.speed_label) == speed_labels.end())
      continue;
    if (std::find(positions.begin(), positions.end(), c.position) == positions.end()) continue;
    successes += c.successes;
    trials += c.trials;
  }
  return {successes, trials};
}

std::vector<std::string> fixed_speed_labels(const ConditionGrid& grid) {
  std::vector<std::string> labels;
  for (double rpm : grid.fixed_speeds) labels.push_back(std::to_string(static_cast<int>(rpm)));
  return labels;
}

std::vector<std::string> variable_speed_labels(const ConditionGrid& grid) {
  if (!grid.variable_speeds) return {};
  return {"50to100", "100to50", "random"};
}

namespace {

ScheduleSpec schedule_for(const std::string& label, const ConditionGrid& grid,
                          std::uint64_t trial_seed) {
  if (label == "50to100") return ScheduleSpec::step(50.0, 100.0, grid.step_switch_time_s);
  if (label == "100to50") return ScheduleSpec::step(100.0, 50.0, grid.step_switch_time_s);
  if (label == "random")
    return ScheduleSpec::random(50.0, 100.0, grid.random_dwell_s, derive_seed(trial_seed, "schedule"));
  return ScheduleSpec::constant(std::stod(label));
}

}  // namespace

SuccessMatrix run_matrix(const nn::ModelParams& params, const ConditionGrid& grid,
                         const sim::WorldConfig& world, const ObjectSpec& object) {
  std::vector<std::string> labels = fixed_speed_labels(grid);
  for (const std::string& l : variable_speed_labels(grid)) labels.push_back(l);

  SuccessMatrix matrix;
  for (const std::string& label : labels) {
    for (TeachPosition pos : grid.positions) {
      CellResult cell;
      cell.speed_label = label;
      cell.position = pos;
      for (int trial = 0; trial < grid.trials; ++trial) {
        const std::uint64_t trial_seed =
            derive_seed(grid.seed, label + "/" + to_string(pos) + "/" + std::to_string(trial));
        Rng rng(trial_seed);

        ctl::RolloutConfig rc;
        rc.schedule = schedule_for(label, grid, trial_seed);
        rc.object = object;
        rc.position = pos;
        rc.extra_x_offset = rng.uniform(-grid.jitter, grid.jitter);
        rc.duration_s = grid.duration_s;
        rc.seed = trial_seed;
        rc.image_h = params.spec.image_h;
        rc.image_w = params.spec.image_w;
        rc.image_c = params.spec.image_c;

        ctl::FailureClass cls;
        try {
          const ctl::RolloutResult r = ctl::rollout(params, rc, world);
          cls = ctl::classify_failure(r.outcome, world);
        } catch (const std::exception&) {
          cls = ctl::FailureClass::no_close;
          cell.failures["aborted"] += 1;
          ++cell.trials;
          continue;
        }
        ++cell.trials;
        if (cls == ctl::FailureClass::success)
          ++cell.successes;
        else
          cell.failures[ctl::to_string(cls)] += 1;
      }
      matrix.cells.push_back(std::move(cell));
    }
  }
  return matrix;
}

DisturbanceReport run_disturbance(const nn::ModelParams& params,
                                  const std::vector<sim::DisturbanceEvent>& events,
                                  const sim::WorldConfig& world, const ObjectSpec& object,
                                  double duration_s, std::uint64_t seed) {
  ctl::RolloutConfig rc;
  rc.schedule = ScheduleSpec::constant(50.0);
  rc.disturbances.events = events;
  rc.object = object;
  rc.position = TeachPosition::C;
  rc.duration_s = duration_s;
  rc.seed = seed;
  rc.image_h = params.spec.image_h;
  rc.image_w = params.spec.image_w;
  rc.image_c = params.spec.image_c;

  const ctl::RolloutResult r = ctl::rollout(params, rc, world);
  DisturbanceReport report;
  report.final_success = r.outcome.success;
  report.grasp_time = r.outcome.grasp_time;
  report.failure = ctl::classify_failure(r.outcome, world);

  // Teleports show up in the trace as backward jumps of the free object.
  const auto& trace = r.outcome.trace;
  const sim::FkResult home = sim::forward_kinematics(world.home_pose, world.arm);
  const int window = static_cast<int>(std::lround(world.sample_rate_hz));
  for (std::size_t i = 1; i < trace.size(); ++i) {
    const bool jump = trace[i].object_visible && trace[i - 1].object_visible &&
                      !trace[i].attached &&
                      trace[i].object_pos.x() < trace[i - 1].object_pos.x() - 0.05;
    const bool removed = !trace[i].object_visible && trace[i - 1].object_visible;
    if (!jump && !removed) continue;
    ++report.events_fired;
    const double d0 = (trace[i].tip - home.tip).norm();
    const std::size_t j = std::min(trace.size() - 1, i + static_cast<std::size_t>(window));
    const double d1 = (trace[j].tip - home.tip).norm();
    report.retreated.push_back(d1 < d0 - 0.005 || d1 < 0.01);
  }
  return report;
}

BallReport run_rolling_ball(const nn::ModelParams& params, int trials,
                            const sim::WorldConfig& world, std::uint64_t seed) {
  BallReport report;
  report.trials = trials;
  for (int trial = 0; trial < trials; ++trial) {
    const std::uint64_t trial_seed = derive_seed(seed, "ball/" + std::to_string(trial));
    Rng rng(trial_seed);

    ObjectSpec ball;
    ball.shape = ObjectShape::ball;
    ball.size = 0.03;
    ball.lateral_speed = rng.uniform(0.02, 0.06) * (rng.uniform() < 0.5 ? -1.0 : 1.0);

    ctl::RolloutConfig rc;
    rc.schedule = ScheduleSpec::constant(50.0);
    rc.object = ball;
    rc.position = TeachPosition::C;
    rc.extra_x_offset = rng.uniform(-0.01, 0.01);
    rc.duration_s = 14.0;
    rc.seed = trial_seed;
    rc.image_h = params.spec.image_h;
    rc.image_w = params.spec.image_w;
    rc.image_c = params.spec.image_c;

    const ctl::RolloutResult r = ctl::rollout(params, rc, world);
    const ctl::FailureClass cls = ctl::classify_failure(r.outcome, world);
    report.outcomes.push_back(ctl::to_string(cls));
    if (r.outcome.success) ++report.successes;
  }
  return report;
}

std::vector<std::pair<std::string, ObjectSpec>> default_object_sweep() {
  std::vector<std::pair<std::string, ObjectSpec>> objects;
  ObjectSpec o;
  objects.emplace_back("training_disk", o);
  o.size = 0.045;
  objects.emplace_back("large_red_disk", o);
  o.size = 0.02;
  objects.emplace_back("small_red_disk", o);
  o = ObjectSpec{};
  o.shape = ObjectShape::box;
  objects.emplace_back("red_box", o);
  o = ObjectSpec{};
  o.shape = ObjectShape::ball;
  objects.emplace_back("red_ball", o);
  o = ObjectSpec{};
  o.color = Eigen::Vector3d(0.1, 0.1, 0.9);
  objects.emplace_back("blue_disk", o);
  o.color = Eigen::Vector3d(0.5, 0.5, 0.5);
  objects.emplace_back("gray_disk", o);
  return objects;
}

std::vector<ObjectReport> run_object_sweep(const nn::ModelParams& params,
                                           const std::vector<std::pair<std::string, ObjectSpec>>& objects,
                                           const sim::WorldConfig& world, std::uint64_t seed) {
  std::vector<ObjectReport> reports;
  for (const auto& [name, object] : objects) {
    ctl::RolloutConfig rc;
    rc.schedule = ScheduleSpec::constant(88.0);
    rc.object = object;
    rc.position = TeachPosition::C;
    rc.duration_s = 14.0;
    rc.seed = derive_seed(seed, "object/" + name);
    rc.image_h = params.spec.image_h;
    rc.image_w = params.spec.image_w;
    rc.image_c = params.spec.image_c;

    const ctl::RolloutResult r = ctl::rollout(params, rc, world);
    ObjectReport report;
    report.name = name;
    report.object = object;
    report.success = r.outcome.success;
    report.reach_attempted = ctl::max_tip_excursion(r.outcome, world) > 0.05;
    reports.push_back(std::move(report));
  }
  return reports;
}

ValidatedTrain train_validated(const std::vector<Episode>& episodes, const nn::ModelSpec& spec,
                               const nn::TrainConfig& base, const sim::WorldConfig& world,
                               const ObjectSpec& object, int candidates) {
  ValidatedTrain best;
  int best_score = -1;
  const std::vector<std::pair<double, TeachPosition>> probe{
      {50.0, TeachPosition::A}, {50.0, TeachPosition::C},  {75.0, TeachPosition::E},
      {75.0, TeachPosition::C}, {100.0, TeachPosition::A}, {100.0, TeachPosition::E}};
  for (int k = 0; k < std::max(1, candidates); ++k) {
    nn::TrainConfig tc = base;
    tc.seed = k == 0 ? base.seed : derive_seed(base.seed, "candidate/" + std::to_string(k));
    nn::TrainResult r = nn::train(episodes, spec, tc);

    int score = 0;
    for (const auto& [rpm, pos] : probe) {
      ctl::RolloutConfig rc;
      rc.schedule = ScheduleSpec::constant(rpm);
      rc.object = object;
      rc.position = pos;
      rc.seed = derive_seed(base.seed, "probe");
      rc.image_h = spec.image_h;
      rc.image_w = spec.image_w;
      rc.image_c = spec.image_c;
      try {
        if (ctl::rollout(r.params, rc, world).outcome.success) ++score;
      } catch (const std::exception&) {
      }
    }
    if (score > best_score) {
      best_score = score;
      best.result = std::move(r);
      best.candidate = k;
      best.probe_score = score;
    }
    if (best_score == static_cast<int>(probe.size())) break;
  }
  return best;
}

FrameSynth::FrameSynth(const std::vector<Episode>& demos, const std::vector<Episode>& augmented,
                       const sim::WorldConfig& world, int image_h, int image_w, int image_c)
    : world_(world), h_(image_h), w_(image_w), c_(image_c) {
  std::map<std::string, int> demo_index;
  for (std::size_t d = 0; d < demos.size(); ++d) {
    const Episode& demo = demos[d];
    demo_index[demo.meta.episode_id] = static_cast<int>(d);
    demo_object_.push_back(demo.meta.object);

    const int t_len = demo.length();
    const double dt = 1.0 / demo.meta.sample_rate_hz;
    const ScheduleSampler belt(demo.meta.belt, t_len * dt);
    std::vector<sim::Vec2> pos(static_cast<std::size_t>(t_len));
    std::vector<char> att(static_cast<std::size_t>(t_len), 0);

    double x = world.object_start_x + world.position_offset(demo.meta.teach_position) +
               demo.meta.start_x_offset;
    bool attached = false;
    for (int k = 0; k < t_len; ++k) {
      pos[static_cast<std::size_t>(k)] = sim::Vec2(x, world.object_y);
      att[static_cast<std::size_t>(k)] = attached ? 1 : 0;
      if (!attached && k + 1 < t_len) {
        const double prev_grip = demo.frames[static_cast<std::size_t>(k)].joints[4];
        const double next_grip = demo.frames[static_cast<std::size_t>(k) + 1].joints[4];
        // grasp crossing between k and k+1; belt transport happens first
        const double x_next = x + belt.rpm_at(k * dt) * world.rpm_to_mps * dt;
        if (prev_grip >= world.grip_close_threshold && next_grip < world.grip_close_threshold) {
          const sim::FkResult fk = sim::forward_kinematics(
              demo.frames[static_cast<std::size_t>(k) + 1].joints, world.arm);
          if ((sim::Vec2(x_next, world.object_y) - fk.tip).norm() <= world.capture_radius)
            attached = true;
        }
        x = x_next;
      }
    }
    object_pos_.push_back(std::move(pos));
    attached_.push_back(std::move(att));
  }

  for (const Episode& e : augmented) {
    if (!e.meta.parent_episode_id || !demo_index.count(*e.meta.parent_episode_id))
      throw std::runtime_error("FrameSynth: episode " + e.meta.episode_id +
                               " has no known source demo");
    const int d = demo_index.at(*e.meta.parent_episode_id);
    const int demo_t = demos[static_cast<std::size_t>(d)].length();
    const auto indices = aug::select_indices(demo_t, e.meta.velocity_ratio);
    std::vector<Source> rows(static_cast<std::size_t>(e.length()));
    for (int t = 0; t < e.length(); ++t) {
      int src = std::max(0, t - e.meta.delay_steps);
      src = std::min(src, static_cast<int>(indices.size()) - 1);
      rows[static_cast<std::size_t>(t)] = {d, indices[static_cast<std::size_t>(src)]};
    }
    map_.push_back(std::move(rows));
  }
}

Image FrameSynth::render(int episode, int t, const JointVector& joints) const {
  const Source src = map_[static_cast<std::size_t>(episode)][static_cast<std::size_t>(t)];
  sim::WorldState state;
  state.joints = world_.limits.clamp(joints);
  state.visible = true;
  if (attached_[static_cast<std::size_t>(src.demo)][static_cast<std::size_t>(src.tick)]) {
    state.attached = true;
    state.object_pos = sim::forward_kinematics(state.joints, world_.arm).tip;
  } else {
    state.object_pos = object_pos_[static_cast<std::size_t>(src.demo)][static_cast<std::size_t>(src.tick)];
  }
  return sim::render_camera(state, h_, w_, c_, world_, demo_object_[static_cast<std::size_t>(src.demo)]);
}

std::optional<double> object_centroid_col(const Image& image) {
  if (image.c < 3) return std::nullopt;
  double weight_sum = 0.0, weighted_col = 0.0;
  for (int r = 0; r < image.h; ++r) {
    for (int col = 0; col < image.w; ++col) {
      const double red = image.at(r, col, 0);
      const double other = std::max(image.at(r, col, 1), image.at(r, col, 2));
      const double w = red - other;
      if (w > 0.15) {
        weight_sum += w;
        weighted_col += w * col;
      }
    }
  }
  if (weight_sum <= 0.0) return std::nullopt;
  return weighted_col / weight_sum;
}

double mean_centroid_step(const Episode& episode) {
  std::vector<double> cols;
  for (const Frame& f : episode.frames) {
    if (f.joints[4] < 0.9) break;  // stop once the gripper starts closing
    const auto c = object_centroid_col(f.image);
    if (c) cols.push_back(*c);
  }
  if (cols.size() < 2) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 1; i < cols.size(); ++i) sum += std::abs(cols[i] - cols[i - 1]);
  return sum / static_cast<double>(cols.size() - 1);
}

void write_matrix_csv(const SuccessMatrix& m, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "speed,position,trials,successes,rate,failures\n";
  for (const CellResult& c : m.cells) {
    out << c.speed_label << ',' << to_string(c.position) << ',' << c.trials << ',' << c.successes
        << ',' << c.rate() << ',';
    bool first = true;
    for (const auto& [cls, count] : c.failures) {
      if (!first) out << ';';
      out << cls << ':' << count;
      first = false;
    }
    out << '\n';
  }
}

namespace {

std::string pct(int successes, int trials) {
  if (trials == 0) return "-";
  std::ostringstream os;
  os << std::lround(100.0 * successes / trials);
  return os.str();
}

}  // namespace

std::string format_matrix_table(const std::string& title, const SuccessMatrix& m,
                                const ConditionGrid& grid) {
  std::vector<std::string> labels = fixed_speed_labels(grid);
  for (const std::string& l : variable_speed_labels(grid)) labels.push_back(l);

  std::ostringstream os;
  os << title << " (success % per cell)\n";
  os << "position";
  for (const std::string& l : labels) os << '\t' << l;
  os << '\n';
  for (TeachPosition pos : grid.positions) {
    os << to_string(pos);
    for (const std::string& l : labels) {
      const CellResult* c = m.find(l, pos);
      os << '\t' << (c ? pct(c->successes, c->trials) : "-");
    }
    os << '\n';
  }
  return os.str();
}

std::string format_comparison_table(const SuccessMatrix& conventional,
                                    const SuccessMatrix& augmented, const ConditionGrid& grid,
                                    const std::vector<TeachPosition>& taught,
                                    const std::vector<TeachPosition>& untaught) {
  std::vector<std::string> labels = fixed_speed_labels(grid);
  for (const std::string& l : variable_speed_labels(grid)) labels.push_back(l);

  std::ostringstream os;
  os << "Success rate of speed change task [%]\n";
  os << "row";
  for (const std::string& l : labels) os << '\t' << l;
  os << '\n';

  auto emit_row = [&](const std::string& name, const SuccessMatrix& m,
                      const std::vector<TeachPosition>& positions) {
    os << name;
    for (const std::string& l : labels) {
      const auto [s, t] = m.totals({l}, positions);
      os << '\t' << pct(s, t);
    }
    os << '\n';
  };
  emit_row("(a) conventional, taught position", conventional, taught);
  emit_row("(b) conventional, untaught position", conventional, untaught);
  emit_row("(c) augmented, taught position", augmented, taught);
  emit_row("(d) augmented, untaught position", augmented, untaught);
  return os.str();
}

}  // namespace beltlab::evalh
