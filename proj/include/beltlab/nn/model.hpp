#pragma once

#include <vector>

#include "beltlab/nn/params.hpp"
#include "beltlab/types.hpp"

namespace beltlab::nn {

/// Joints mapped affinely into [-1, 1]: arm joints by their limits, the grip
/// from [0, 1].
Vec normalize_joints(const JointVector& q, const JointLimits& limits);
JointVector denormalize_joints(const Vec& a, const JointLimits& limits);

/// Image as the conv input layout: [channels x (h*w)], positions row-major.
Mat image_to_input(const Image& img);

// ---- batched conv primitives (shared by training and inference) ----------

/// Gathers k*k patches of every frame into one matrix. x holds n_frames
/// blocks of in_h*in_w position columns; the result has out_positions *
/// n_frames columns, frame-major; zero padding contributes zero rows.
Mat im2col(const Mat& x, const ConvDims& d, int n_frames);

/// Scatter-add transpose of im2col.
void col2im_add(const Mat& patches, const ConvDims& d, int n_frames, Mat& dx);

struct ConvForward {
  std::vector<Mat> patches;  // per layer im2col result
  std::vector<Mat> activations;  // per layer post-ReLU output [out_c x pos*n]
  Mat features;  // [feature_dim x n_frames], post-tanh
};

/// Runs the conv stack + feature projection over a batch of frames.
/// `x0` is the stacked input [in_c x in_positions*n_frames]. When `reuse_p1`
/// is non-null it is taken as the precomputed layer-0 im2col matrix.
void conv_forward(const Mat& x0, const ModelParams& params, int n_frames, ConvForward& out,
                  const Mat* reuse_p1 = nullptr);

struct ConvGrads {
  // filled into the matching arrays of a gradient ModelParams
};

/// Backpropagates feature gradients through projection and conv stack,
/// accumulating into `grads`. dfeat is [feature_dim x n_frames].
void conv_backward(const Mat& x0, const ModelParams& params, int n_frames, const ConvForward& fwd,
                   const Mat& dfeat, ModelParams& grads, const Mat* reuse_p1 = nullptr);

// ---- single-sample inference ---------------------------------------------

/// CNN feature extraction for one image. Pure function of (image, params).
Vec conv_encode(const Image& img, const ModelParams& params);

struct LstmState {
  Vec h, c;
  static LstmState zero(int hidden) { return {Vec::Zero(hidden), Vec::Zero(hidden)}; }
};

/// One gated-cell update plus output head; returns the normalized next-joint
/// prediction and advances the state in place.
Vec recurrent_step(const Vec& features, const Vec& joints_norm, LstmState& state,
                   const ModelParams& params);

/// Baseline feedforward step; `penultimate` (optional) receives the last
/// hidden layer used for representation analysis.
Vec baseline_step(const Vec& features, const Vec& joints_norm, const ModelParams& params,
                  Vec* penultimate = nullptr);

struct SequenceResult {
  Mat predictions;  // [T-1 x 5], normalized units
  Mat trace;        // [T x hidden]; row 0 is the initial (zero) state
};

/// Feeds an episode through the model one step at a time: input (i_t, a_t),
/// predict a_{t+1}. State threads across the whole sequence for the
/// recurrent model; the baseline records its penultimate layer instead.
SequenceResult forward_sequence(const Episode& episode, const ModelParams& params);

/// Mean squared error over unmasked rows. mask[t] marks prediction row t as
/// live; an all-false mask is an error.
double mse_loss(const Mat& predictions, const Mat& targets, const std::vector<char>& mask);

/// Recorded internal states for a set of episodes, with analysis labels.
struct HiddenTrace {
  std::vector<Mat> states;  // per episode [T x width]
  std::vector<int> speed_class;
  std::vector<int> position_class;
  std::vector<int> valid_len;
  int width() const { return states.empty() ? 0 : static_cast<int>(states.front().cols()); }
};

}  // namespace beltlab::nn
