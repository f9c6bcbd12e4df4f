#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>

#include "beltlab/nn/params.hpp"

namespace beltlab {

struct CheckpointError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Optional run metadata echoed into checkpoints; everything here is
/// deterministic for a fixed config and seed.
struct TrainInfo {
  std::uint64_t seed = 0;
  int epochs_run = 0;
  int best_epoch = 0;
  double best_loss = 0.0;
};

/// Self-describing JSON document: model kind, spec, normalization limits and
/// every parameter array by name with its shape. Doubles round-trip exactly
/// (shortest-representation printing), so a reloaded model reproduces forward
/// outputs bit for bit. Refuses to write non-finite parameters.
std::size_t write_checkpoint(const nn::ModelParams& params, const nn::AdamState* optimizer,
                             std::ostream& out, const TrainInfo* info = nullptr);

struct Checkpoint {
  nn::ModelParams params;
  std::optional<nn::AdamState> optimizer;
  std::optional<TrainInfo> info;
};

/// Validates array names and shapes against the declared spec; a mismatch
/// names the offending array.
Checkpoint read_checkpoint(std::istream& in);

std::size_t save_checkpoint(const nn::ModelParams& params, const nn::AdamState* optimizer,
                            const std::filesystem::path& path, const TrainInfo* info = nullptr);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace beltlab
