#pragma once

#include <functional>
#include <vector>

#include "beltlab/nn/model.hpp"

namespace beltlab::nn {

struct TrainConfig {
  double learning_rate = 1e-3;
  /// > 0: cosine-decay the learning rate down to this value across the
  /// epoch budget (stabilizes where different seeds end up).
  double learning_rate_final = 0.0;
  double beta1 = 0.9, beta2 = 0.999, epsilon = 1e-8;
  int epochs = 2000;
  bool mask_padding = true;
  double grad_clip = 5.0;  // global L2 norm; <= 0 disables
  std::uint64_t seed = 0;
  double target_loss = 0.0;  // > 0: stop once the epoch loss reaches it
  /// Stddev of zero-mean gaussian noise added to the joint INPUTS (not the
  /// targets) each epoch, in normalized units. Teaches the predictor to pull
  /// perturbed states back onto the taught trajectory, which keeps the
  /// closed loop from compounding its own small errors. The grip channel
  /// takes its own (typically much larger) noise so the model times the
  /// close from vision and internal state instead of grip feedback.
  double input_noise_std = 0.0;
  double grip_noise_std = 0.0;
  /// Probability, per (step, episode), of feeding the model its own previous
  /// joint prediction instead of the recorded one while training (the
  /// prediction is treated as data, not backpropagated through). Closes the
  /// gap between teacher-forced training and closed-loop execution.
  double self_feed_prob = 0.0;
  /// World-consistent robustification: for this share of (episode, step)
  /// samples per epoch, the arm pose is perturbed and the camera frame is
  /// re-rendered at that pose via `input_synth`, so the image agrees with
  /// the perturbed proprioception. Teaches recovery toward the taught
  /// trajectory from genuinely off-trajectory states.
  double synth_fraction = 0.0;
  double synth_noise_std = 0.25;       // arm channels, normalized units
  double synth_grip_noise_std = 0.25;  // grip channel
  /// (episode, t, perturbed joints) -> camera image at that pose.
  std::function<Image(int, int, const JointVector&)> input_synth;
  JointLimits limits;
};

enum class Reduction { mean, sum };

/// Episodes flattened for full-batch training. Augmented sequences re-index
/// frames of their source demos, so images dedupe heavily: the conv stack
/// runs once per distinct image and the recurrent core gathers features by
/// frame id. Gradients scatter back along the same map, in fixed order.
struct CompiledDataset {
  int batch = 0;
  int t_len = 0;
  std::vector<int> valid_len;
  std::vector<Mat> joints;             // per t: [5 x batch], normalized
  std::vector<std::vector<char>> mask;  // [t_len-1][batch]
  Eigen::Index n_valid = 0;             // live (t, episode) prediction rows

  int n_frames = 0;  // distinct images
  Mat x0;            // [c x h*w*n_frames]
  Mat p1;            // precomputed layer-0 im2col patches
  std::vector<std::vector<int>> frame_id;  // [episode][t]
};

CompiledDataset compile_dataset(const std::vector<Episode>& episodes, const ModelSpec& spec,
                                const JointLimits& limits, bool mask_padding);

/// Per-epoch re-rendered input overrides for a subset of (t, episode)
/// samples; built by train() from TrainConfig::input_synth.
struct SynthOverride {
  int m = 0;
  Mat x0;      // [c x positions*m] conv inputs of the re-rendered frames
  Mat joints;  // [5 x m] perturbed joint inputs, normalized
  std::vector<std::vector<int>> index;  // [t][episode] -> column in x0, or -1
};

/// Stored activations of one full-batch pass.
struct BatchCache {
  ConvForward conv;
  ConvForward conv_extra;  // synth-override frames
  const SynthOverride* ov = nullptr;
  std::vector<Mat> x, gates, c, tanh_c, h, preds;  // recurrent, per step
  std::vector<Mat> a1, a2;                          // baseline dense stack
};

/// Full forward pass; returns the masked MSE (mean over live entries).
/// `input_joints` overrides the joint inputs per step (targets are always the
/// clean recorded joints); nullptr uses the dataset's own.
double batched_forward(const CompiledDataset& ds, const ModelParams& params, BatchCache& cache,
                       const std::vector<Mat>* input_joints = nullptr,
                       const std::vector<std::vector<char>>* self_feed = nullptr,
                       const SynthOverride* ov = nullptr);

/// Exact reverse-mode gradients of the masked MSE accumulated into `grads`
/// (full-sequence backpropagation, no truncation). Reduction::sum drops the
/// 1/n normalization, which is what the linearity tests exercise.
void batched_backward(const CompiledDataset& ds, const ModelParams& params,
                      const BatchCache& cache, ModelParams& grads,
                      Reduction reduction = Reduction::mean);

void zero_params(ModelParams& p);
double param_norm(const ModelParams& p);
void scale_params(ModelParams& p, double factor);

/// theta <- theta - lr * mhat / (sqrt(vhat) + eps), elementwise with bias
/// correction. state.t counts completed steps.
void adam_update(ModelParams& params, const ModelParams& grads, AdamState& state,
                 const TrainConfig& cfg);

struct TrainResult {
  ModelParams params;  // parameters at the best recorded loss
  std::vector<double> loss_curve;
  double best_loss = 0.0;
  int best_epoch = 0;
  int epochs_run = 0;

  /// First epoch whose loss is <= threshold, or -1.
  int first_epoch_at(double threshold) const;
};

/// Full-batch Adam over the episode set. Deterministic for a fixed seed;
/// aborts with the epoch index if the loss leaves the finite range.
TrainResult train(const std::vector<Episode>& episodes, const ModelSpec& spec,
                  const TrainConfig& cfg);

}  // namespace beltlab::nn
