#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "beltlab/analysis/pca.hpp"
#include "beltlab/analysis/probe.hpp"
#include "beltlab/checkpoint.hpp"
#include "beltlab/config.hpp"
#include "beltlab/episode_io.hpp"
#include "beltlab/evalh/harness.hpp"

namespace fs = std::filesystem;
using namespace beltlab;

namespace {

struct CommonArgs {
  std::string config_path;
  std::vector<std::string> overrides;
  std::uint64_t seed = 0;
  std::string out_dir = "out";
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "JSON config file");
  cmd->add_option("--set", args.overrides, "dotted-key overrides, e.g. train.epochs=500");
  cmd->add_option("--seed", args.seed, "root seed");
  cmd->add_option("--out", args.out_dir, "output directory")->required();
}

AppConfig resolve(const CommonArgs& args) {
  AppConfig cfg = load_config(args.config_path, args.overrides, args.seed);
  fs::create_directories(args.out_dir);
  write_config_echo(cfg, args.out_dir);
  return cfg;
}

void save_dataset(const std::vector<Episode>& episodes, DatasetManifest manifest,
                  const AppConfig& cfg, const fs::path& dir) {
  manifest.limits = cfg.world.limits;
  manifest.config_hash = config_hash(cfg);
  for (const Episode& e : episodes) save_episode(e, dir / (e.meta.episode_id + ".epi"));
  save_manifest(manifest, dir / "manifest.json");
}

std::vector<Episode> record_clean_demos(const AppConfig& cfg,
                                        const std::vector<TeachPosition>& positions) {
  std::vector<Episode> demos;
  for (TeachPosition pos : positions) {
    evalh::DemoSpec spec;
    spec.position = pos;
    spec.rpm = 50.0;
    spec.teacher = cfg.teacher;
    spec.duration_s = cfg.demo_duration_s;
    spec.image_h = cfg.image_h;
    spec.image_w = cfg.image_w;
    spec.image_c = cfg.image_c;
    spec.object = cfg.object;
    spec.seed = derive_seed(cfg.seed, "demo/" + to_string(pos));
    spec.id = "demo_" + to_string(pos);
    evalh::DemoResult demo = evalh::record_demo(spec, cfg.world);
    if (!demo.outcome.success)
      throw std::runtime_error("teaching demo failed at position " + to_string(pos));
    demos.push_back(std::move(demo.episode));
  }
  return demos;
}

void write_loss_csv(const std::vector<double>& curve, const fs::path& path) {
  std::ofstream out(path, std::ios::trunc);
  out.precision(12);
  out << "epoch,loss\n";
  for (std::size_t i = 0; i < curve.size(); ++i) out << i << ',' << curve[i] << '\n';
}

int cmd_gen_demos(const CommonArgs& args, const std::string& positions_arg, bool conventional) {
  const AppConfig cfg = resolve(args);
  if (conventional) {
    const auto variants =
        evalh::build_training_variants(cfg.world, cfg.teacher, cfg.augment, cfg.image_h,
                                       cfg.image_w, cfg.image_c, cfg.seed, cfg.demo_duration_s);
    save_dataset(variants.conventional, variants.conventional_manifest, cfg, args.out_dir);
    std::cout << "wrote " << variants.conventional.size() << " conventional demos to "
              << args.out_dir << "\n";
    return 0;
  }
  std::vector<TeachPosition> positions;
  for (char c : positions_arg) positions.push_back(position_from_string(std::string(1, c)));
  const auto demos = record_clean_demos(cfg, positions);
  DatasetManifest manifest;
  manifest.image_h = cfg.image_h;
  manifest.image_w = cfg.image_w;
  manifest.image_c = cfg.image_c;
  for (const Episode& e : demos) manifest.add(e, e.meta.episode_id + ".epi");
  save_dataset(demos, manifest, cfg, args.out_dir);
  std::cout << "wrote " << demos.size() << " demos to " << args.out_dir << "\n";
  return 0;
}

int cmd_augment(const CommonArgs& args, const std::string& demos_dir, bool eval_spec) {
  const AppConfig cfg = resolve(args);
  const DatasetManifest demo_manifest = load_manifest(fs::path(demos_dir) / "manifest.json");
  const auto demos = load_manifest_episodes(demo_manifest, fs::path(demos_dir) / "manifest.json");
  const aug::AugmentSpec& spec = eval_spec ? cfg.eval_augment : cfg.augment;
  aug::GridResult grid = aug::augment_grid(demos, spec);
  grid.manifest.limits = cfg.world.limits;
  save_dataset(grid.episodes, grid.manifest, cfg, args.out_dir);
  std::cout << "wrote " << grid.episodes.size() << " augmented episodes to " << args.out_dir
            << "\n";
  return 0;
}

int cmd_train(const CommonArgs& args, const std::string& manifest_dir, bool baseline,
              int candidates) {
  const AppConfig cfg = resolve(args);
  const fs::path manifest_path = fs::path(manifest_dir) / "manifest.json";
  const DatasetManifest manifest = load_manifest(manifest_path);
  const auto episodes = load_manifest_episodes(manifest, manifest_path);

  nn::ModelSpec spec = cfg.model;
  spec.kind = baseline ? nn::ModelKind::feedforward_baseline : nn::ModelKind::recurrent;
  spec.image_h = cfg.image_h;
  spec.image_w = cfg.image_w;
  spec.image_c = cfg.image_c;

  nn::TrainConfig tc = cfg.train;
  tc.limits = cfg.world.limits;

  int chosen = 0, score = 0;
  nn::TrainResult r;
  if (baseline) {
    r = nn::train(episodes, spec, tc);
  } else {
    evalh::ValidatedTrain v =
        evalh::train_validated(episodes, spec, tc, cfg.world, cfg.object, candidates);
    r = std::move(v.result);
    chosen = v.candidate;
    score = v.probe_score;
  }

  TrainInfo info{tc.seed, r.epochs_run, r.best_epoch, r.best_loss};
  save_checkpoint(r.params, nullptr, fs::path(args.out_dir) / "checkpoint.json", &info);
  write_loss_csv(r.loss_curve, fs::path(args.out_dir) / "loss.csv");

  nlohmann::json summary{{"best_loss", r.best_loss},
                         {"best_epoch", r.best_epoch},
                         {"epochs_run", r.epochs_run},
                         {"first_epoch_at_1e3", r.first_epoch_at(1e-3)},
                         {"model_kind", nn::to_string(spec.kind)},
                         {"candidate", chosen},
                         {"probe_score", score}};
  std::ofstream(fs::path(args.out_dir) / "train_summary.json") << summary.dump(2) << "\n";
  std::cout << "trained " << nn::to_string(spec.kind) << ": best loss " << r.best_loss
            << " at epoch " << r.best_epoch << " (" << r.epochs_run << " epochs run)\n";
  return 0;
}

nn::ModelParams load_params(const std::string& path) { return load_checkpoint(path).params; }

int cmd_eval(const CommonArgs& args, const std::string& model_aug, const std::string& model_conv,
             bool with_disturbance, bool with_ball, bool with_objects) {
  const AppConfig cfg = resolve(args);
  const nn::ModelParams aug_model = load_params(model_aug);
  evalh::ConditionGrid grid = cfg.grid;

  nlohmann::json report;
  const auto aug_matrix = evalh::run_matrix(aug_model, grid, cfg.world, cfg.object);
  evalh::write_matrix_csv(aug_matrix, fs::path(args.out_dir) / "matrix_augmented.csv");
  std::ofstream(fs::path(args.out_dir) / "matrix_augmented.txt")
      << evalh::format_matrix_table("augmented-trained model", aug_matrix, grid);

  const std::vector<TeachPosition> taught{TeachPosition::A, TeachPosition::C, TeachPosition::E};
  const std::vector<TeachPosition> untaught{TeachPosition::B, TeachPosition::D};

  if (!model_conv.empty()) {
    const nn::ModelParams conv_model = load_params(model_conv);
    const auto conv_matrix = evalh::run_matrix(conv_model, grid, cfg.world, cfg.object);
    evalh::write_matrix_csv(conv_matrix, fs::path(args.out_dir) / "matrix_conventional.csv");
    std::ofstream(fs::path(args.out_dir) / "matrix_conventional.txt")
        << evalh::format_matrix_table("conventional-trained model", conv_matrix, grid);
    const std::string table =
        evalh::format_comparison_table(conv_matrix, aug_matrix, grid, taught, untaught);
    std::ofstream(fs::path(args.out_dir) / "speed_change_table.txt") << table;
    std::cout << table;

    auto fixed = evalh::fixed_speed_labels(grid);
    const auto [as, at] = aug_matrix.totals(fixed, untaught);
    const auto [cs, ct] = conv_matrix.totals(fixed, untaught);
    report["untaught_position_totals"] = {{"augmented", {{"successes", as}, {"trials", at}}},
                                          {"conventional", {{"successes", cs}, {"trials", ct}}}};
  }

  if (with_disturbance) {
    std::vector<sim::DisturbanceEvent> events;
    events.push_back({sim::DisturbanceEvent::Trigger::object_x, 0.62,
                      sim::DisturbanceEvent::Action::teleport, 0.30});
    events.push_back(
        {sim::DisturbanceEvent::Trigger::time, 16.0, sim::DisturbanceEvent::Action::teleport, 0.25});
    const auto rep = evalh::run_disturbance(aug_model, events, cfg.world, cfg.object, 30.0,
                                            derive_seed(cfg.seed, "disturbance"));
    nlohmann::json r{{"events_fired", rep.events_fired},
                     {"final_success", rep.final_success},
                     {"grasp_time", rep.grasp_time},
                     {"expectation", "object repositioned mid-approach: arm returns toward home "
                                     "and re-grasps on the next pass"}};
    r["retreated"] = nlohmann::json::array();
    for (bool b : rep.retreated) r["retreated"].push_back(b);
    report["disturbance"] = r;
  }
  if (with_ball) {
    const auto rep = evalh::run_rolling_ball(aug_model, 6, cfg.world, derive_seed(cfg.seed, "ball"));
    report["rolling_ball"] = {{"trials", rep.trials},
                              {"successes", rep.successes},
                              {"outcomes", rep.outcomes},
                              {"reference", "real-rig reference: 5 of 6 trials"}};
  }
  if (with_objects) {
    nlohmann::json objs = nlohmann::json::array();
    for (const auto& rep : evalh::run_object_sweep(aug_model, evalh::default_object_sweep(),
                                                   cfg.world, derive_seed(cfg.seed, "objects"))) {
      objs.push_back(
          {{"name", rep.name}, {"success", rep.success}, {"reach_attempted", rep.reach_attempted}});
    }
    report["object_sweep"] = {
        {"objects", objs},
        {"expectation",
         "red variants of other sizes and shapes are grasped; far-hue objects draw no reach"}};
  }
  std::ofstream(fs::path(args.out_dir) / "report.json") << report.dump(2) << "\n";
  std::cout << "eval artifacts written to " << args.out_dir << "\n";
  return 0;
}

int cmd_analyze(const CommonArgs& args, const std::string& model_path,
                const std::string& baseline_path, const std::string& demos_dir) {
  const AppConfig cfg = resolve(args);
  const DatasetManifest demo_manifest = load_manifest(fs::path(demos_dir) / "manifest.json");
  const auto demos = load_manifest_episodes(demo_manifest, fs::path(demos_dir) / "manifest.json");

  // 9-condition probe set: ratios {1, 3/2, 2} at the three teaching positions.
  aug::AugmentSpec probe_spec;
  probe_spec.velocity_ratios = {{1, 1}, {3, 2}, {2, 1}};
  probe_spec.delay_steps = {0};
  const aug::GridResult probe = aug::augment_grid(demos, probe_spec);

  nlohmann::json report;
  auto analyze_one = [&](const std::string& path, const std::string& tag) {
    const nn::ModelParams model = load_params(path);
    const nn::HiddenTrace trace = analysis::collect_states(model, probe.episodes);
    const analysis::PcaResult pca3 = analysis::pca(trace, 3);
    analysis::export_projection(pca3, fs::path(args.out_dir) / ("projection_" + tag + ".csv"));
    const double speed_acc = analysis::separability_probe(trace, analysis::ProbeFactor::speed);
    const double pos_acc = analysis::separability_probe(trace, analysis::ProbeFactor::position);
    report[tag] = {{"speed_probe_accuracy", speed_acc},
                   {"position_probe_accuracy", pos_acc},
                   {"explained_variance",
                    {pca3.explained_ratio[0], pca3.explained_ratio[1], pca3.explained_ratio[2]}},
                   {"window", "last third"}};
    std::cout << tag << ": speed probe " << speed_acc << ", position probe " << pos_acc << "\n";
  };
  analyze_one(model_path, "recurrent");
  if (!baseline_path.empty()) analyze_one(baseline_path, "baseline");
  std::ofstream(fs::path(args.out_dir) / "probes.json") << report.dump(2) << "\n";
  return 0;
}

int cmd_run(const CommonArgs& args, const std::string& model_path, const std::string& speed,
            const std::string& position, double duration) {
  const AppConfig cfg = resolve(args);
  const nn::ModelParams model = load_params(model_path);

  ctl::RolloutConfig rc;
  if (speed.rfind("step:", 0) == 0) {
    double a = 50, b = 100, at = 5;
    std::sscanf(speed.c_str(), "step:%lf:%lf:%lf", &a, &b, &at);
    rc.schedule = ScheduleSpec::step(a, b, at);
  } else if (speed.rfind("random", 0) == 0) {
    rc.schedule =
        ScheduleSpec::random(50, 100, cfg.grid.random_dwell_s, derive_seed(cfg.seed, "run"));
  } else {
    rc.schedule = ScheduleSpec::constant(std::stod(speed));
  }
  rc.object = cfg.object;
  rc.position = position_from_string(position);
  rc.duration_s = duration > 0 ? duration : cfg.demo_duration_s;
  rc.seed = cfg.seed;
  rc.image_h = cfg.image_h;
  rc.image_w = cfg.image_w;
  rc.image_c = cfg.image_c;

  const ctl::RolloutResult r = ctl::rollout(model, rc, cfg.world);
  save_episode(r.episode, fs::path(args.out_dir) / "episode.epi");
  ctl::write_trace_csv(r.outcome, fs::path(args.out_dir) / "trace.csv");
  const ctl::FailureClass cls = ctl::classify_failure(r.outcome, cfg.world);
  nlohmann::json outcome{{"success", r.outcome.success},
                         {"grasp_time", r.outcome.grasp_time},
                         {"failure_class", ctl::to_string(cls)},
                         {"clamp_count", r.outcome.clamp_count}};
  std::ofstream(fs::path(args.out_dir) / "outcome.json") << outcome.dump(2) << "\n";
  std::cout << "rollout: " << ctl::to_string(cls) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"desk-scale conveyor grasping lab: demos, time-axis augmentation, training, "
               "closed-loop evaluation and representation analysis"};
  app.require_subcommand(1);

  CommonArgs gen_args, aug_args, train_args, eval_args, analyze_args, run_args;

  auto* gen = app.add_subcommand("gen-demos", "record scripted-teacher demonstrations");
  add_common(gen, gen_args);
  std::string positions = "ACE";
  bool conventional = false;
  gen->add_option("--positions", positions, "teach positions, e.g. ACE");
  gen->add_flag("--conventional", conventional,
                "record the 27-cell manually-collected training variant");

  auto* augc = app.add_subcommand("augment", "build the velocity/phase training grid");
  add_common(augc, aug_args);
  std::string demos_dir;
  bool eval_spec = false;
  augc->add_option("--demos", demos_dir, "directory with the demo manifest")->required();
  augc->add_flag("--eval-spec", eval_spec, "untaught ratios 1.25/1.75 x delays +5/+15");

  auto* train = app.add_subcommand("train", "train the visuomotor predictor");
  add_common(train, train_args);
  std::string manifest_dir;
  bool baseline = false;
  int candidates = 4;
  train->add_option("--manifest", manifest_dir, "directory with the dataset manifest")->required();
  train->add_flag("--baseline", baseline, "train the no-recurrence baseline");
  train->add_option("--candidates", candidates, "validated-training candidate count");

  auto* eval = app.add_subcommand("eval", "run the success-rate experiment grid");
  add_common(eval, eval_args);
  std::string model_aug, model_conv;
  bool with_disturbance = false, with_ball = false, with_objects = false, full = false;
  eval->add_option("--model-augmented", model_aug, "checkpoint of the augmented-trained model")
      ->required();
  eval->add_option("--model-conventional", model_conv, "checkpoint of the conventional model");
  eval->add_flag("--disturbance", with_disturbance, "mid-approach repositioning task");
  eval->add_flag("--rolling-ball", with_ball, "laterally bouncing ball task");
  eval->add_flag("--objects", with_objects, "untaught-object sweep");
  eval->add_flag("--full", full, "all optional tasks");

  auto* analyze = app.add_subcommand("analyze", "internal-representation analysis");
  add_common(analyze, analyze_args);
  std::string model_path, baseline_path, analyze_demos;
  analyze->add_option("--model", model_path, "recurrent checkpoint")->required();
  analyze->add_option("--baseline-model", baseline_path, "baseline checkpoint");
  analyze->add_option("--demos", analyze_demos, "demo directory for the probe set")->required();

  auto* run = app.add_subcommand("run", "single closed-loop rollout");
  add_common(run, run_args);
  std::string run_model, run_speed = "50", run_position = "C";
  double run_duration = 0.0;
  run->add_option("--model", run_model, "checkpoint")->required();
  run->add_option("--speed", run_speed, "rpm, step:A:B:T, or random");
  run->add_option("--position", run_position, "teach position A-E");
  run->add_option("--duration", run_duration, "seconds");

  try {
    app.parse(argc, argv);
    if (*gen) return cmd_gen_demos(gen_args, positions, conventional);
    if (*augc) return cmd_augment(aug_args, demos_dir, eval_spec);
    if (*train) return cmd_train(train_args, manifest_dir, baseline, candidates);
    if (*eval) {
      if (full) with_disturbance = with_ball = with_objects = true;
      return cmd_eval(eval_args, model_aug, model_conv, with_disturbance, with_ball, with_objects);
    }
    if (*analyze) return cmd_analyze(analyze_args, model_path, baseline_path, analyze_demos);
    if (*run) return cmd_run(run_args, run_model, run_speed, run_position, run_duration);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
