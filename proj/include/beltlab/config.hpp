#pragma once

#include <json.hpp>

#include <filesystem>
#include <string>

#include "beltlab/aug/augment.hpp"
#include "beltlab/evalh/harness.hpp"
#include "beltlab/nn/train.hpp"
#include "beltlab/sim/teacher.hpp"

namespace beltlab {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Everything a pipeline run needs, with the desk defaults. Serialized as
/// JSON; any field can come from a config file or a dotted-key override.
struct AppConfig {
  sim::WorldConfig world;
  sim::TeacherParams teacher;
  int image_h = 16, image_w = 32, image_c = 3;
  double demo_duration_s = 14.0;
  ObjectSpec object;
  aug::AugmentSpec augment;
  aug::AugmentSpec eval_augment{{{5, 4}, {7, 4}}, {5, 15}, 0};
  nn::ModelSpec model;
  nn::TrainConfig train;
  evalh::ConditionGrid grid;
  std::uint64_t seed = 0;
  int workers = 1;

  AppConfig() {
    // Calibrated pipeline recipe: input-noise regularization plus an early
    // stop once the clean masked MSE reaches deployment quality.
    train.input_noise_std = 0.1;
    train.grip_noise_std = 0.1;
    train.target_loss = 1.5e-4;
  }
};

nlohmann::json to_json(const AppConfig& c);
AppConfig config_from_json(const nlohmann::json& j);

/// Defaults -> optional file -> overrides ("a.b.c=value", value parsed as
/// JSON with a string fallback). Seed applies to the world, train and grid
/// streams unless those are overridden explicitly.
AppConfig load_config(const std::string& config_path,
                      const std::vector<std::string>& overrides, std::uint64_t seed);

std::uint64_t config_hash(const AppConfig& c);

/// Writes the fully-resolved config with its hash stamp into the output
/// directory; reruns produce identical bytes.
void write_config_echo(const AppConfig& c, const std::filesystem::path& dir);

}  // namespace beltlab
