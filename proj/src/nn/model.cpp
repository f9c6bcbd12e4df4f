#include "beltlab/nn/model.hpp"

#include <cmath>
#include <stdexcept>

namespace beltlab::nn {

Vec normalize_joints(const JointVector& q, const JointLimits& limits) {
  Vec a(kJointDim);
  for (int i = 0; i < kArmDof; ++i)
    a[i] = 2.0 * (q[i] - limits.lo[i]) / (limits.hi[i] - limits.lo[i]) - 1.0;
  a[4] = 2.0 * q[4] - 1.0;
  return a;
}

JointVector denormalize_joints(const Vec& a, const JointLimits& limits) {
  JointVector q;
  for (int i = 0; i < kArmDof; ++i)
    q[i] = limits.lo[i] + (a[i] + 1.0) * 0.5 * (limits.hi[i] - limits.lo[i]);
  q[4] = (a[4] + 1.0) * 0.5;
  return limits.clamp(q);
}

Mat image_to_input(const Image& img) {
  Mat x(img.c, img.h * img.w);
  for (int r = 0; r < img.h; ++r)
    for (int col = 0; col < img.w; ++col)
      for (int ch = 0; ch < img.c; ++ch)
        x(ch, r * img.w + col) = static_cast<double>(img.at(r, col, ch));
  return x;
}

Mat im2col(const Mat& x, const ConvDims& d, int n_frames) {
  Mat p = Mat::Zero(d.patch_rows(), static_cast<Eigen::Index>(d.out_positions()) * n_frames);
  const int in_positions = d.in_h * d.in_w;
  for (int f = 0; f < n_frames; ++f) {
    const Eigen::Index in_base = static_cast<Eigen::Index>(f) * in_positions;
    const Eigen::Index out_base = static_cast<Eigen::Index>(f) * d.out_positions();
    for (int orow = 0; orow < d.out_h; ++orow) {
      for (int ocol = 0; ocol < d.out_w; ++ocol) {
        const Eigen::Index out_col = out_base + orow * d.out_w + ocol;
        for (int kr = 0; kr < d.kernel; ++kr) {
          const int ir = orow * d.stride + kr - d.pad;
          if (ir < 0 || ir >= d.in_h) continue;
          for (int kc = 0; kc < d.kernel; ++kc) {
            const int ic = ocol * d.stride + kc - d.pad;
            if (ic < 0 || ic >= d.in_w) continue;
            p.block((kr * d.kernel + kc) * d.in_c, out_col, d.in_c, 1) =
                x.col(in_base + ir * d.in_w + ic);
          }
        }
      }
    }
  }
  return p;
}

void col2im_add(const Mat& patches, const ConvDims& d, int n_frames, Mat& dx) {
  const int in_positions = d.in_h * d.in_w;
  for (int f = 0; f < n_frames; ++f) {
    const Eigen::Index in_base = static_cast<Eigen::Index>(f) * in_positions;
    const Eigen::Index out_base = static_cast<Eigen::Index>(f) * d.out_positions();
    for (int orow = 0; orow < d.out_h; ++orow) {
      for (int ocol = 0; ocol < d.out_w; ++ocol) {
        const Eigen::Index out_col = out_base + orow * d.out_w + ocol;
        for (int kr = 0; kr < d.kernel; ++kr) {
          const int ir = orow * d.stride + kr - d.pad;
          if (ir < 0 || ir >= d.in_h) continue;
          for (int kc = 0; kc < d.kernel; ++kc) {
            const int ic = ocol * d.stride + kc - d.pad;
            if (ic < 0 || ic >= d.in_w) continue;
            dx.col(in_base + ir * d.in_w + ic) +=
                patches.block((kr * d.kernel + kc) * d.in_c, out_col, d.in_c, 1);
          }
        }
      }
    }
  }
}

void conv_forward(const Mat& x0, const ModelParams& params, int n_frames, ConvForward& out,
                  const Mat* reuse_p1) {
  const auto plan = conv_plan(params.spec);
  out.patches.resize(plan.size());
  out.activations.resize(plan.size());

  const Mat* input = &x0;
  for (std::size_t l = 0; l < plan.size(); ++l) {
    const ConvDims& d = plan[l];
    if (l == 0 && reuse_p1) {
      out.patches[l].resize(0, 0);  // borrowed, not stored
    } else {
      out.patches[l] = im2col(*input, d, n_frames);
    }
    const Mat& p = (l == 0 && reuse_p1) ? *reuse_p1 : out.patches[l];
    out.activations[l].noalias() = params.conv_w[l] * p;
    out.activations[l].colwise() += params.conv_b[l];
    out.activations[l] = out.activations[l].cwiseMax(0.0);  // ReLU
    input = &out.activations[l];
  }

  const int flat = conv_flat_dim(params.spec);
  const Mat& last = out.activations.back();
  const Eigen::Map<const Mat> flat_view(last.data(), flat, n_frames);
  out.features.noalias() = params.proj_w * flat_view;
  out.features.colwise() += params.proj_b;
  out.features = out.features.array().tanh().matrix();
}

void conv_backward(const Mat& x0, const ModelParams& params, int n_frames, const ConvForward& fwd,
                   const Mat& dfeat, ModelParams& grads, const Mat* reuse_p1) {
  const auto plan = conv_plan(params.spec);
  const int flat = conv_flat_dim(params.spec);

  // tanh projection
  const Mat dz = dfeat.array() * (1.0 - fwd.features.array().square());
  const Mat& last = fwd.activations.back();
  const Eigen::Map<const Mat> flat_view(last.data(), flat, n_frames);
  grads.proj_w.noalias() += dz * flat_view.transpose();
  grads.proj_b.noalias() += dz.rowwise().sum();
  Mat dflat = params.proj_w.transpose() * dz;  // [flat x n]
  Mat dy = Eigen::Map<Mat>(dflat.data(), plan.back().out_c,
                           static_cast<Eigen::Index>(plan.back().out_positions()) * n_frames);

  for (int l = static_cast<int>(plan.size()) - 1; l >= 0; --l) {
    const ConvDims& d = plan[static_cast<std::size_t>(l)];
    // ReLU gate: activation > 0 iff pre-activation > 0
    dy.array() *= (fwd.activations[static_cast<std::size_t>(l)].array() > 0.0).cast<double>();
    const Mat& p = (l == 0 && reuse_p1) ? *reuse_p1 : fwd.patches[static_cast<std::size_t>(l)];
    grads.conv_w[static_cast<std::size_t>(l)].noalias() += dy * p.transpose();
    grads.conv_b[static_cast<std::size_t>(l)].noalias() += dy.rowwise().sum();
    if (l == 0) break;  // input gradients are not needed
    const Mat dpatches = params.conv_w[static_cast<std::size_t>(l)].transpose() * dy;
    Mat dx = Mat::Zero(d.in_c, static_cast<Eigen::Index>(d.in_h) * d.in_w * n_frames);
    col2im_add(dpatches, d, n_frames, dx);
    dy = std::move(dx);
  }
  (void)x0;
}

Vec conv_encode(const Image& img, const ModelParams& params) {
  if (img.h != params.spec.image_h || img.w != params.spec.image_w || img.c != params.spec.image_c)
    throw std::invalid_argument(
        "conv_encode: image shape " + std::to_string(img.h) + "x" + std::to_string(img.w) + "x" +
        std::to_string(img.c) + " does not match model " + std::to_string(params.spec.image_h) +
        "x" + std::to_string(params.spec.image_w) + "x" + std::to_string(params.spec.image_c));
  const Mat x0 = image_to_input(img);
  ConvForward fwd;
  conv_forward(x0, params, 1, fwd);
  return fwd.features.col(0);
}

namespace {
inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }
}  // namespace

Vec recurrent_step(const Vec& features, const Vec& joints_norm, LstmState& state,
                   const ModelParams& params) {
  const int hidden = params.spec.hidden_dim;
  Vec x(params.spec.input_dim());
  x << features, joints_norm;

  // gate layout: [i; f; g; o]
  Vec gates = params.lstm_wx * x + params.lstm_wh * state.h + params.lstm_b;
  for (int i = 0; i < hidden; ++i) {
    gates[i] = sigmoid(gates[i]);
    gates[hidden + i] = sigmoid(gates[hidden + i]);
    gates[2 * hidden + i] = std::tanh(gates[2 * hidden + i]);
    gates[3 * hidden + i] = sigmoid(gates[3 * hidden + i]);
  }

  const auto gi = gates.segment(0, hidden);
  const auto gf = gates.segment(hidden, hidden);
  const auto gg = gates.segment(2 * hidden, hidden);
  const auto go = gates.segment(3 * hidden, hidden);

  state.c = gf.cwiseProduct(state.c) + gi.cwiseProduct(gg);
  state.h = go.cwiseProduct(state.c.array().tanh().matrix());

  Vec out = params.head_w * state.h + params.head_b;
  if (params.spec.residual_head) out += joints_norm;
  for (int i = 0; i < out.size(); ++i)
    if (!std::isfinite(out[i])) throw std::runtime_error("recurrent_step: non-finite output");
  return out;
}

Vec baseline_step(const Vec& features, const Vec& joints_norm, const ModelParams& params,
                  Vec* penultimate) {
  Vec x(params.spec.input_dim());
  x << features, joints_norm;
  const Vec a1 = (params.fc1_w * x + params.fc1_b).array().tanh().matrix();
  const Vec a2 = (params.fc2_w * a1 + params.fc2_b).array().tanh().matrix();
  if (penultimate) *penultimate = a2;
  Vec out = params.head_w * a2 + params.head_b;
  if (params.spec.residual_head) out += joints_norm;
  return out;
}

SequenceResult forward_sequence(const Episode& episode, const ModelParams& params) {
  const int t_len = episode.length();
  if (t_len < 2) throw std::invalid_argument("forward_sequence: need at least 2 frames");

  const int hidden = params.spec.hidden_dim;
  SequenceResult r;
  r.predictions = Mat(t_len - 1, kJointDim);
  r.trace = Mat::Zero(t_len, hidden);

  LstmState state = LstmState::zero(hidden);
  for (int t = 0; t < t_len - 1; ++t) {
    const Frame& f = episode.frames[static_cast<std::size_t>(t)];
    const Vec feat = conv_encode(f.image, params);
    const Vec joints = normalize_joints(f.joints, params.limits);
    Vec pred;
    if (params.spec.kind == ModelKind::recurrent) {
      pred = recurrent_step(feat, joints, state, params);
      r.trace.row(t + 1) = state.h.transpose();
    } else {
      Vec penult;
      pred = baseline_step(feat, joints, params, &penult);
      r.trace.row(t + 1) = penult.transpose();
    }
    r.predictions.row(t) = pred.transpose();
  }
  return r;
}

double mse_loss(const Mat& predictions, const Mat& targets, const std::vector<char>& mask) {
  if (predictions.rows() != targets.rows() || predictions.cols() != targets.cols())
    throw std::invalid_argument("mse_loss: shape mismatch");
  if (static_cast<Eigen::Index>(mask.size()) != predictions.rows())
    throw std::invalid_argument("mse_loss: mask length mismatch");
  double sum = 0.0;
  Eigen::Index live = 0;
  for (Eigen::Index t = 0; t < predictions.rows(); ++t) {
    if (!mask[static_cast<std::size_t>(t)]) continue;
    sum += (predictions.row(t) - targets.row(t)).squaredNorm();
    ++live;
  }
  if (live == 0) throw std::invalid_argument("mse_loss: empty mask");
  return sum / (static_cast<double>(live) * predictions.cols());
}

}  // namespace beltlab::nn
