#include "beltlab/nn/params.hpp"

#include <cmath>
#include <stdexcept>

namespace beltlab::nn {

std::string to_string(ModelKind k) {
  return k == ModelKind::recurrent ? "recurrent" : "feedforward_baseline";
}

ModelKind model_kind_from_string(const std::string& s) {
  if (s == "recurrent") return ModelKind::recurrent;
  if (s == "feedforward_baseline") return ModelKind::feedforward_baseline;
  throw std::invalid_argument("unknown model kind: " + s);
}

std::vector<ConvDims> conv_plan(const ModelSpec& spec) {
  std::vector<ConvDims> plan;
  int h = spec.image_h, w = spec.image_w, c = spec.image_c;
  for (const ConvLayerSpec& layer : spec.conv) {
    ConvDims d;
    d.in_h = h;
    d.in_w = w;
    d.in_c = c;
    d.kernel = layer.kernel;
    d.stride = layer.stride;
    d.pad = layer.kernel / 2;
    d.out_h = (h + 2 * d.pad - layer.kernel) / layer.stride + 1;
    d.out_w = (w + 2 * d.pad - layer.kernel) / layer.stride + 1;
    d.out_c = layer.filters;
    if (d.out_h < 1 || d.out_w < 1) throw std::invalid_argument("conv stack collapses the image");
    plan.push_back(d);
    h = d.out_h;
    w = d.out_w;
    c = d.out_c;
  }
  return plan;
}

int conv_flat_dim(const ModelSpec& spec) {
  const auto plan = conv_plan(spec);
  const ConvDims& last = plan.back();
  return last.out_c * last.out_positions();
}

bool ModelParams::all_finite() const {
  bool ok = true;
  for_each_array([&](const std::string&, const double* data, Eigen::Index rows, Eigen::Index cols) {
    for (Eigen::Index i = 0; i < rows * cols; ++i)
      if (!std::isfinite(data[i])) ok = false;
  });
  return ok;
}

ModelParams ModelParams::zeros_like() const {
  ModelParams z;
  z.spec = spec;
  z.limits = limits;
  z.conv_w.reserve(conv_w.size());
  z.conv_b.reserve(conv_b.size());
  for (const Mat& w : conv_w) z.conv_w.push_back(Mat::Zero(w.rows(), w.cols()));
  for (const Vec& b : conv_b) z.conv_b.push_back(Vec::Zero(b.rows()));
  auto zm = [](const Mat& m) { return Mat::Zero(m.rows(), m.cols()); };
  auto zv = [](const Vec& v) { return Vec::Zero(v.rows()); };
  z.proj_w = zm(proj_w);
  z.proj_b = zv(proj_b);
  if (spec.kind == ModelKind::recurrent) {
    z.lstm_wx = zm(lstm_wx);
    z.lstm_wh = zm(lstm_wh);
    z.lstm_b = zv(lstm_b);
  } else {
    z.fc1_w = zm(fc1_w);
    z.fc1_b = zv(fc1_b);
    z.fc2_w = zm(fc2_w);
    z.fc2_b = zv(fc2_b);
  }
  z.head_w = zm(head_w);
  z.head_b = zv(head_b);
  return z;
}

namespace {

void fill_uniform(double* data, Eigen::Index n, double bound, Rng& rng) {
  for (Eigen::Index i = 0; i < n; ++i) data[i] = rng.uniform(-bound, bound);
}

}  // namespace

ModelParams init_params(const ModelSpec& spec, const JointLimits& limits, std::uint64_t seed) {
  ModelParams p;
  p.spec = spec;
  p.limits = limits;
  const auto plan = conv_plan(spec);
  Rng rng(derive_seed(seed, "param-init"));

  for (const ConvDims& d : plan) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(d.patch_rows()));
    Mat w(d.out_c, d.patch_rows());
    Vec b(d.out_c);
    fill_uniform(w.data(), w.size(), bound, rng);
    fill_uniform(b.data(), b.size(), bound, rng);
    p.conv_w.push_back(std::move(w));
    p.conv_b.push_back(std::move(b));
  }

  const int flat = conv_flat_dim(spec);
  {
    const double bound = 1.0 / std::sqrt(static_cast<double>(flat));
    p.proj_w = Mat(spec.feature_dim, flat);
    p.proj_b = Vec(spec.feature_dim);
    fill_uniform(p.proj_w.data(), p.proj_w.size(), bound, rng);
    fill_uniform(p.proj_b.data(), p.proj_b.size(), bound, rng);
  }

  const int in = spec.input_dim();
  const int hidden = spec.hidden_dim;
  if (spec.kind == ModelKind::recurrent) {
    const double bx = 1.0 / std::sqrt(static_cast<double>(in));
    const double bh = 1.0 / std::sqrt(static_cast<double>(hidden));
    const double bb = 1.0 / std::sqrt(static_cast<double>(in + hidden));
    p.lstm_wx = Mat(4 * hidden, in);
    p.lstm_wh = Mat(4 * hidden, hidden);
    p.lstm_b = Vec(4 * hidden);
    fill_uniform(p.lstm_wx.data(), p.lstm_wx.size(), bx, rng);
    fill_uniform(p.lstm_wh.data(), p.lstm_wh.size(), bh, rng);
    fill_uniform(p.lstm_b.data(), p.lstm_b.size(), bb, rng);
  } else {
    const double b1 = 1.0 / std::sqrt(static_cast<double>(in));
    const double b2 = 1.0 / std::sqrt(static_cast<double>(hidden));
    p.fc1_w = Mat(hidden, in);
    p.fc1_b = Vec(hidden);
    p.fc2_w = Mat(hidden, hidden);
    p.fc2_b = Vec(hidden);
    fill_uniform(p.fc1_w.data(), p.fc1_w.size(), b1, rng);
    fill_uniform(p.fc1_b.data(), p.fc1_b.size(), b1, rng);
    fill_uniform(p.fc2_w.data(), p.fc2_w.size(), b2, rng);
    fill_uniform(p.fc2_b.data(), p.fc2_b.size(), b2, rng);
  }

  const double bo = 1.0 / std::sqrt(static_cast<double>(hidden));
  p.head_w = Mat(kJointDim, hidden);
  p.head_b = Vec(kJointDim);
  fill_uniform(p.head_w.data(), p.head_w.size(), bo, rng);
  fill_uniform(p.head_b.data(), p.head_b.size(), bo, rng);
  return p;
}

}  // namespace beltlab::nn
