#pragma once

#include <string>
#include <vector>

#include "beltlab/common.hpp"
#include "beltlab/types.hpp"

namespace beltlab::nn {

enum class ModelKind { recurrent, feedforward_baseline };

std::string to_string(ModelKind k);
ModelKind model_kind_from_string(const std::string& s);

struct ConvLayerSpec {
  int filters = 8;
  int kernel = 3;
  int stride = 2;
};

/// Network topology: conv stack -> tanh feature projection -> either an LSTM
/// core (recurrent) or two tanh dense layers (baseline) -> linear head to the
/// 5 joint outputs.
struct ModelSpec {
  ModelKind kind = ModelKind::recurrent;
  int image_h = 16, image_w = 32, image_c = 3;
  std::vector<ConvLayerSpec> conv{{8, 3, 2}, {16, 3, 2}, {16, 3, 2}};
  int feature_dim = 10;
  int hidden_dim = 50;
  /// The head predicts the joint-space step: a_hat[t+1] = a[t] + head(h).
  /// Holding still is then the zero function, which keeps closed-loop
  /// execution from drifting off the taught poses.
  bool residual_head = true;

  int input_dim() const { return feature_dim + kJointDim; }
};

struct ConvDims {
  int in_h, in_w, in_c;
  int out_h, out_w, out_c;
  int kernel, stride, pad;
  int patch_rows() const { return kernel * kernel * in_c; }
  int out_positions() const { return out_h * out_w; }
};

/// Spatial bookkeeping for each conv layer ("same"-style zero padding of
/// kernel/2, so an input side of n maps to ceil(n/stride)).
std::vector<ConvDims> conv_plan(const ModelSpec& spec);
int conv_flat_dim(const ModelSpec& spec);

/// All weights of one model. Arrays irrelevant to the model kind stay empty.
struct ModelParams {
  ModelSpec spec;
  JointLimits limits;  // normalization contract carried with the weights

  std::vector<Mat> conv_w;  // per layer [filters x kernel^2*in_c]
  std::vector<Vec> conv_b;
  Mat proj_w;  // [feature_dim x flat]
  Vec proj_b;
  Mat lstm_wx, lstm_wh;  // [4H x input_dim], [4H x H]; gate rows i, f, g, o
  Vec lstm_b;
  Mat fc1_w, fc2_w;  // baseline dense stack [H x input_dim], [H x H]
  Vec fc1_b, fc2_b;
  Mat head_w;  // [5 x H]
  Vec head_b;

  /// Visits every live array as (name, rows x cols matrix view) in a fixed
  /// order. Vectors appear as n x 1.
  template <typename F>
  void for_each_array(F&& f);
  template <typename F>
  void for_each_array(F&& f) const;

  bool all_finite() const;
  /// Zero-filled gradient/moment container with this model's shapes.
  ModelParams zeros_like() const;
};

/// Seeded uniform(-1/sqrt(fan_in), +1/sqrt(fan_in)) initialization per array.
ModelParams init_params(const ModelSpec& spec, const JointLimits& limits, std::uint64_t seed);

struct AdamState {
  ModelParams m, v;
  std::int64_t t = 0;
};

namespace detail {
template <typename Self, typename F>
void visit_params(Self& p, F&& f) {
  for (std::size_t l = 0; l < p.conv_w.size(); ++l) {
    f("conv" + std::to_string(l) + "_w", p.conv_w[l]);
    f("conv" + std::to_string(l) + "_b", p.conv_b[l]);
  }
  f("proj_w", p.proj_w);
  f("proj_b", p.proj_b);
  if (p.spec.kind == ModelKind::recurrent) {
    f("lstm_wx", p.lstm_wx);
    f("lstm_wh", p.lstm_wh);
    f("lstm_b", p.lstm_b);
  } else {
    f("fc1_w", p.fc1_w);
    f("fc1_b", p.fc1_b);
    f("fc2_w", p.fc2_w);
    f("fc2_b", p.fc2_b);
  }
  f("head_w", p.head_w);
  f("head_b", p.head_b);
}

// Adapter so Vec and Mat arrays can share one visitor signature.
template <typename F>
struct ArrayFn {
  F& f;
  void operator()(const std::string& name, Mat& m) { f(name, m.data(), m.rows(), m.cols()); }
  void operator()(const std::string& name, Vec& v) { f(name, v.data(), v.rows(), Eigen::Index(1)); }
  void operator()(const std::string& name, const Mat& m) { f(name, m.data(), m.rows(), m.cols()); }
  void operator()(const std::string& name, const Vec& v) { f(name, v.data(), v.rows(), Eigen::Index(1)); }
};
}  // namespace detail

template <typename F>
void ModelParams::for_each_array(F&& f) {
  detail::ArrayFn<F> fn{f};
  detail::visit_params(*this, fn);
}

template <typename F>
void ModelParams::for_each_array(F&& f) const {
  detail::ArrayFn<F> fn{f};
  detail::visit_params(*this, fn);
}

}  // namespace beltlab::nn
