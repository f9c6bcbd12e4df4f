#include "beltlab/nn/train.hpp"

#include <cmath>
#include <stdexcept>
#include <unordered_map>

namespace beltlab::nn {

namespace {

struct View {
  double* data;
  Eigen::Index n;
};
struct ConstView {
  const double* data;
  Eigen::Index n;
};

std::vector<View> array_views(ModelParams& p) {
  std::vector<View> v;
  p.for_each_array([&](const std::string&, double* d, Eigen::Index r, Eigen::Index c) {
    v.push_back({d, r * c});
  });
  return v;
}

std::vector<ConstView> array_views(const ModelParams& p) {
  std::vector<ConstView> v;
  p.for_each_array([&](const std::string&, const double* d, Eigen::Index r, Eigen::Index c) {
    v.push_back({d, r * c});
  });
  return v;
}

}  // namespace

CompiledDataset compile_dataset(const std::vector<Episode>& episodes, const ModelSpec& spec,
                                const JointLimits& limits, bool mask_padding) {
  if (episodes.empty()) throw std::invalid_argument("compile_dataset: no episodes");
  const int t_len = episodes.front().length();
  if (t_len < 2) throw std::invalid_argument("compile_dataset: sequences must have T >= 2");
  for (const Episode& e : episodes) {
    if (e.length() != t_len)
      throw std::invalid_argument("compile_dataset: episodes are not length-equalized");
    const Image& img = e.frames.front().image;
    if (img.h != spec.image_h || img.w != spec.image_w || img.c != spec.image_c)
      throw std::invalid_argument("compile_dataset: image shape does not match the model spec");
  }

  CompiledDataset ds;
  ds.batch = static_cast<int>(episodes.size());
  ds.t_len = t_len;

  // Dedupe images by content; first-appearance order keeps this deterministic.
  std::unordered_map<std::uint64_t, std::vector<int>> buckets;
  std::vector<const Image*> unique_images;
  ds.frame_id.resize(episodes.size());
  for (std::size_t b = 0; b < episodes.size(); ++b) {
    ds.frame_id[b].resize(static_cast<std::size_t>(t_len));
    for (int t = 0; t < t_len; ++t) {
      const Image& img = episodes[b].frames[static_cast<std::size_t>(t)].image;
      const std::uint64_t key = fnv1a64(img.px.data(), img.px.size() * sizeof(float));
      int id = -1;
      for (int cand : buckets[key])
        if (*unique_images[static_cast<std::size_t>(cand)] == img) {
          id = cand;
          break;
        }
      if (id < 0) {
        id = static_cast<int>(unique_images.size());
        unique_images.push_back(&img);
        buckets[key].push_back(id);
      }
      ds.frame_id[b][static_cast<std::size_t>(t)] = id;
    }
  }
  ds.n_frames = static_cast<int>(unique_images.size());

  const int positions = spec.image_h * spec.image_w;
  ds.x0 = Mat(spec.image_c, static_cast<Eigen::Index>(positions) * ds.n_frames);
  for (int f = 0; f < ds.n_frames; ++f)
    ds.x0.middleCols(static_cast<Eigen::Index>(f) * positions, positions) =
        image_to_input(*unique_images[static_cast<std::size_t>(f)]);
  ds.p1 = im2col(ds.x0, conv_plan(spec).front(), ds.n_frames);

  ds.joints.resize(static_cast<std::size_t>(t_len));
  for (int t = 0; t < t_len; ++t) {
    ds.joints[static_cast<std::size_t>(t)] = Mat(kJointDim, ds.batch);
    for (int b = 0; b < ds.batch; ++b)
      ds.joints[static_cast<std::size_t>(t)].col(b) = normalize_joints(
          episodes[static_cast<std::size_t>(b)].frames[static_cast<std::size_t>(t)].joints, limits);
  }

  ds.valid_len.resize(episodes.size());
  ds.mask.assign(static_cast<std::size_t>(t_len - 1), std::vector<char>(static_cast<std::size_t>(ds.batch), 1));
  ds.n_valid = 0;
  for (int b = 0; b < ds.batch; ++b) {
    const int valid = episodes[static_cast<std::size_t>(b)].valid_length();
    ds.valid_len[static_cast<std::size_t>(b)] = valid;
    for (int t = 0; t < t_len - 1; ++t) {
      const bool live = !mask_padding || (t + 1 < valid);
      ds.mask[static_cast<std::size_t>(t)][static_cast<std::size_t>(b)] = live ? 1 : 0;
      if (live) ++ds.n_valid;
    }
  }
  if (ds.n_valid == 0) throw std::invalid_argument("compile_dataset: mask leaves no live targets");
  return ds;
}

double batched_forward(const CompiledDataset& ds, const ModelParams& params, BatchCache& cache,
                       const std::vector<Mat>* input_joints,
                       const std::vector<std::vector<char>>* self_feed,
                       const SynthOverride* ov) {
  const std::vector<Mat>& joints_in = input_joints ? *input_joints : ds.joints;
  cache.ov = ov;
  if (ov && ov->m > 0) conv_forward(ov->x0, params, ov->m, cache.conv_extra);
  const ModelSpec& spec = params.spec;
  const int hidden = spec.hidden_dim;
  const int feat = spec.feature_dim;
  const int steps = ds.t_len - 1;

  conv_forward(ds.x0, params, ds.n_frames, cache.conv, &ds.p1);
  const Mat& features = cache.conv.features;

  cache.x.resize(static_cast<std::size_t>(steps));
  cache.preds.resize(static_cast<std::size_t>(steps));
  if (spec.kind == ModelKind::recurrent) {
    cache.gates.resize(static_cast<std::size_t>(steps));
    cache.c.resize(static_cast<std::size_t>(steps));
    cache.tanh_c.resize(static_cast<std::size_t>(steps));
    cache.h.resize(static_cast<std::size_t>(steps));
  } else {
    cache.a1.resize(static_cast<std::size_t>(steps));
    cache.a2.resize(static_cast<std::size_t>(steps));
  }

  Mat h_prev = Mat::Zero(hidden, ds.batch);
  Mat c_prev = Mat::Zero(hidden, ds.batch);
  double loss_sum = 0.0;

  for (int t = 0; t < steps; ++t) {
    const auto ts = static_cast<std::size_t>(t);
    Mat& x = cache.x[ts];
    x.resize(spec.input_dim(), ds.batch);
    for (int b = 0; b < ds.batch; ++b)
      x.block(0, b, feat, 1) = features.col(ds.frame_id[static_cast<std::size_t>(b)][ts]);
    x.bottomRows(kJointDim) = joints_in[ts];
    if (self_feed && t > 0)
      for (int b = 0; b < ds.batch; ++b)
        if ((*self_feed)[ts][static_cast<std::size_t>(b)])
          x.block(spec.feature_dim, b, kJointDim, 1) = cache.preds[ts - 1].col(b);
    if (ov && ov->m > 0)
      for (int b = 0; b < ds.batch; ++b) {
        const int j = ov->index[ts][static_cast<std::size_t>(b)];
        if (j >= 0) {
          x.block(0, b, feat, 1) = cache.conv_extra.features.col(j);
          x.block(feat, b, kJointDim, 1) = ov->joints.col(j);
        }
      }

    Mat out;
    if (spec.kind == ModelKind::recurrent) {
      Mat& g = cache.gates[ts];
      g.noalias() = params.lstm_wx * x;
      g.noalias() += params.lstm_wh * h_prev;
      g.colwise() += params.lstm_b;
      g.topRows(2 * hidden) =
          (1.0 + (-g.topRows(2 * hidden).array()).exp()).inverse().matrix();
      g.middleRows(2 * hidden, hidden) =
          g.middleRows(2 * hidden, hidden).array().tanh().matrix();
      g.bottomRows(hidden) = (1.0 + (-g.bottomRows(hidden).array()).exp()).inverse().matrix();

      Mat& c = cache.c[ts];
      c = g.middleRows(hidden, hidden).cwiseProduct(c_prev) +
          g.topRows(hidden).cwiseProduct(g.middleRows(2 * hidden, hidden));
      cache.tanh_c[ts] = c.array().tanh().matrix();
      Mat& h = cache.h[ts];
      h = g.bottomRows(hidden).cwiseProduct(cache.tanh_c[ts]);

      out.noalias() = params.head_w * h;
      out.colwise() += params.head_b;
      if (spec.residual_head) out += x.bottomRows(kJointDim);
      h_prev = h;
      c_prev = c;
    } else {
      Mat& a1 = cache.a1[ts];
      a1.noalias() = params.fc1_w * x;
      a1.colwise() += params.fc1_b;
      a1 = a1.array().tanh().matrix();
      Mat& a2 = cache.a2[ts];
      a2.noalias() = params.fc2_w * a1;
      a2.colwise() += params.fc2_b;
      a2 = a2.array().tanh().matrix();
      out.noalias() = params.head_w * a2;
      out.colwise() += params.head_b;
      if (spec.residual_head) out += x.bottomRows(kJointDim);
    }
    cache.preds[ts] = out;

    const Mat& target = ds.joints[ts + 1];
    for (int b = 0; b < ds.batch; ++b)
      if (ds.mask[ts][static_cast<std::size_t>(b)])
        loss_sum += (out.col(b) - target.col(b)).squaredNorm();
  }
  return loss_sum / (static_cast<double>(ds.n_valid) * kJointDim);
}

void batched_backward(const CompiledDataset& ds, const ModelParams& params,
                      const BatchCache& cache, ModelParams& grads, Reduction reduction) {
  const ModelSpec& spec = params.spec;
  const int hidden = spec.hidden_dim;
  const int feat = spec.feature_dim;
  const int steps = ds.t_len - 1;
  const double denom =
      reduction == Reduction::mean ? static_cast<double>(ds.n_valid) * kJointDim : 1.0;

  const SynthOverride* ov = cache.ov;
  Mat dfeat = Mat::Zero(feat, ds.n_frames);
  Mat dfeat_extra;
  if (ov && ov->m > 0) dfeat_extra = Mat::Zero(feat, ov->m);
  auto scatter_dfeat = [&](int t, int b, const Mat& dx) {
    const auto ts = static_cast<std::size_t>(t);
    if (ov && ov->m > 0) {
      const int j = ov->index[ts][static_cast<std::size_t>(b)];
      if (j >= 0) {
        dfeat_extra.col(j) += dx.block(0, b, feat, 1);
        return;
      }
    }
    dfeat.col(ds.frame_id[static_cast<std::size_t>(b)][ts]) += dx.block(0, b, feat, 1);
  };

  if (spec.kind == ModelKind::recurrent) {
    const Mat zero_state = Mat::Zero(hidden, ds.batch);
    Mat dh_next = Mat::Zero(hidden, ds.batch);
    Mat dc_next = Mat::Zero(hidden, ds.batch);
    for (int t = steps - 1; t >= 0; --t) {
      const auto ts = static_cast<std::size_t>(t);
      const Mat& g = cache.gates[ts];
      const auto gi = g.topRows(hidden);
      const auto gf = g.middleRows(hidden, hidden);
      const auto gg = g.middleRows(2 * hidden, hidden);
      const auto go = g.bottomRows(hidden);
      const Mat& c_prev = t > 0 ? cache.c[ts - 1] : zero_state;
      const Mat& h_prev = t > 0 ? cache.h[ts - 1] : zero_state;

      Mat dpred = 2.0 * (cache.preds[ts] - ds.joints[ts + 1]) / denom;
      for (int b = 0; b < ds.batch; ++b)
        if (!ds.mask[ts][static_cast<std::size_t>(b)]) dpred.col(b).setZero();

      grads.head_w.noalias() += dpred * cache.h[ts].transpose();
      grads.head_b.noalias() += dpred.rowwise().sum();

      Mat dh = params.head_w.transpose() * dpred + dh_next;
      const Mat do_gate = dh.cwiseProduct(cache.tanh_c[ts]);
      Mat dc = dh.cwiseProduct(go).cwiseProduct(
                   (1.0 - cache.tanh_c[ts].array().square()).matrix()) +
               dc_next;

      Mat dgates(4 * hidden, ds.batch);
      dgates.topRows(hidden) =
          dc.cwiseProduct(gg).cwiseProduct(gi).cwiseProduct((1.0 - gi.array()).matrix());
      dgates.middleRows(hidden, hidden) =
          dc.cwiseProduct(c_prev).cwiseProduct(gf).cwiseProduct((1.0 - gf.array()).matrix());
      dgates.middleRows(2 * hidden, hidden) =
          dc.cwiseProduct(gi).cwiseProduct((1.0 - gg.array().square()).matrix());
      dgates.bottomRows(hidden) =
          do_gate.cwiseProduct(go).cwiseProduct((1.0 - go.array()).matrix());
      dc_next = dc.cwiseProduct(gf);

      grads.lstm_wx.noalias() += dgates * cache.x[ts].transpose();
      grads.lstm_wh.noalias() += dgates * h_prev.transpose();
      grads.lstm_b.noalias() += dgates.rowwise().sum();
      dh_next.noalias() = params.lstm_wh.transpose() * dgates;

      const Mat dx = params.lstm_wx.transpose() * dgates;
      for (int b = 0; b < ds.batch; ++b) scatter_dfeat(t, b, dx);
    }
  } else {
    for (int t = steps - 1; t >= 0; --t) {
      const auto ts = static_cast<std::size_t>(t);
      Mat dpred = 2.0 * (cache.preds[ts] - ds.joints[ts + 1]) / denom;
      for (int b = 0; b < ds.batch; ++b)
        if (!ds.mask[ts][static_cast<std::size_t>(b)]) dpred.col(b).setZero();

      grads.head_w.noalias() += dpred * cache.a2[ts].transpose();
      grads.head_b.noalias() += dpred.rowwise().sum();
      Mat da2 = (params.head_w.transpose() * dpred).cwiseProduct(
          (1.0 - cache.a2[ts].array().square()).matrix());
      grads.fc2_w.noalias() += da2 * cache.a1[ts].transpose();
      grads.fc2_b.noalias() += da2.rowwise().sum();
      Mat da1 = (params.fc2_w.transpose() * da2).cwiseProduct(
          (1.0 - cache.a1[ts].array().square()).matrix());
      grads.fc1_w.noalias() += da1 * cache.x[ts].transpose();
      grads.fc1_b.noalias() += da1.rowwise().sum();

      const Mat dx = params.fc1_w.transpose() * da1;
      for (int b = 0; b < ds.batch; ++b) scatter_dfeat(t, b, dx);
    }
  }

  conv_backward(ds.x0, params, ds.n_frames, cache.conv, dfeat, grads, &ds.p1);
  if (ov && ov->m > 0)
    conv_backward(ov->x0, params, ov->m, cache.conv_extra, dfeat_extra, grads);

  bool finite = grads.all_finite();
  if (!finite) {
    std::string bad;
    grads.for_each_array([&](const std::string& name, const double* d, Eigen::Index r, Eigen::Index c) {
      if (!bad.empty()) return;
      for (Eigen::Index i = 0; i < r * c; ++i)
        if (!std::isfinite(d[i])) {
          bad = name;
          return;
        }
    });
    throw std::runtime_error("batched_backward: non-finite gradient in " + bad);
  }
}

void zero_params(ModelParams& p) {
  for (View v : array_views(p)) Eigen::Map<Vec>(v.data, v.n).setZero();
}

double param_norm(const ModelParams& p) {
  double sq = 0.0;
  for (ConstView v : array_views(p)) sq += Eigen::Map<const Vec>(v.data, v.n).squaredNorm();
  return std::sqrt(sq);
}

void scale_params(ModelParams& p, double factor) {
  for (View v : array_views(p)) Eigen::Map<Vec>(v.data, v.n) *= factor;
}

void adam_update(ModelParams& params, const ModelParams& grads, AdamState& state,
                 const TrainConfig& cfg) {
  state.t += 1;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.t));

  auto pv = array_views(params);
  auto gv = array_views(grads);
  auto mv = array_views(state.m);
  auto vv = array_views(state.v);
  for (std::size_t k = 0; k < pv.size(); ++k) {
    Eigen::Map<Eigen::ArrayXd> theta(pv[k].data, pv[k].n);
    Eigen::Map<const Eigen::ArrayXd> g(gv[k].data, gv[k].n);
    Eigen::Map<Eigen::ArrayXd> m(mv[k].data, mv[k].n);
    Eigen::Map<Eigen::ArrayXd> v(vv[k].data, vv[k].n);
    m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
    v = cfg.beta2 * v + (1.0 - cfg.beta2) * g.square();
    theta -= cfg.learning_rate * (m / bc1) / ((v / bc2).sqrt() + cfg.epsilon);
  }
}

int TrainResult::first_epoch_at(double threshold) const {
  for (std::size_t i = 0; i < loss_curve.size(); ++i)
    if (loss_curve[i] <= threshold) return static_cast<int>(i);
  return -1;
}

TrainResult train(const std::vector<Episode>& episodes, const ModelSpec& spec,
                  const TrainConfig& cfg) {
  const CompiledDataset ds = compile_dataset(episodes, spec, cfg.limits, cfg.mask_padding);

  TrainResult result;
  ModelParams params = init_params(spec, cfg.limits, cfg.seed);
  AdamState state{params.zeros_like(), params.zeros_like(), 0};
  ModelParams grads = params.zeros_like();
  BatchCache cache;

  result.best_loss = std::numeric_limits<double>::infinity();
  result.loss_curve.reserve(static_cast<std::size_t>(cfg.epochs));

  Rng noise_rng(derive_seed(cfg.seed, "input-noise"));
  Rng feed_rng(derive_seed(cfg.seed, "self-feed"));
  Rng synth_rng(derive_seed(cfg.seed, "synth"));
  std::vector<Mat> noised;
  const bool with_noise = cfg.input_noise_std > 0.0 || cfg.grip_noise_std > 0.0;
  if (with_noise) noised.resize(ds.joints.size());
  std::vector<std::vector<char>> feed_mask;
  if (cfg.self_feed_prob > 0.0)
    feed_mask.assign(static_cast<std::size_t>(ds.t_len - 1),
                     std::vector<char>(static_cast<std::size_t>(ds.batch), 0));
  const bool with_synth = cfg.synth_fraction > 0.0 && static_cast<bool>(cfg.input_synth);
  SynthOverride ov;
  const int positions = spec.image_h * spec.image_w;
  if (with_synth)
    ov.index.assign(static_cast<std::size_t>(ds.t_len - 1),
                    std::vector<int>(static_cast<std::size_t>(ds.batch), -1));

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    // The recorded loss is always the clean masked MSE; the gradient step
    // below may optimize a noise-perturbed copy of the inputs.
    const double loss = batched_forward(ds, params, cache);
    if (!std::isfinite(loss))
      throw std::runtime_error("train: loss diverged at epoch " + std::to_string(epoch));
    result.loss_curve.push_back(loss);
    result.epochs_run = epoch + 1;
    if (loss < result.best_loss) {
      result.best_loss = loss;
      result.best_epoch = epoch;
      result.params = params;
    }
    if (cfg.target_loss > 0.0 && loss <= cfg.target_loss) break;

    if (with_noise || cfg.self_feed_prob > 0.0 || with_synth) {
      const std::vector<Mat>* inputs = nullptr;
      if (with_noise) {
        for (std::size_t t = 0; t + 1 < ds.joints.size(); ++t) {
          noised[t] = ds.joints[t];
          for (Eigen::Index col = 0; col < noised[t].cols(); ++col) {
            for (int k = 0; k < kArmDof; ++k)
              noised[t](k, col) += cfg.input_noise_std * noise_rng.gaussian();
            noised[t](kArmDof, col) += cfg.grip_noise_std * noise_rng.gaussian();
          }
        }
        inputs = &noised;
      }
      const std::vector<std::vector<char>>* feeds = nullptr;
      if (cfg.self_feed_prob > 0.0) {
        for (auto& row : feed_mask)
          for (auto& flag : row) flag = feed_rng.uniform() < cfg.self_feed_prob ? 1 : 0;
        feeds = &feed_mask;
      }
      const SynthOverride* ov_ptr = nullptr;
      if (with_synth) {
        // choose this epoch's re-rendered samples and perturb their poses
        std::vector<std::array<int, 2>> picks;
        for (int t = 0; t + 1 < ds.t_len; ++t)
          for (int b = 0; b < ds.batch; ++b)
            if (synth_rng.uniform() < cfg.synth_fraction) picks.push_back({t, b});
        ov.m = static_cast<int>(picks.size());
        for (auto& row : ov.index) std::fill(row.begin(), row.end(), -1);
        if (ov.m > 0) {
          ov.x0.resize(spec.image_c, static_cast<Eigen::Index>(positions) * ov.m);
          ov.joints.resize(kJointDim, ov.m);
          for (int j = 0; j < ov.m; ++j) {
            const auto [t, b] = picks[static_cast<std::size_t>(j)];
            ov.index[static_cast<std::size_t>(t)][static_cast<std::size_t>(b)] = j;
            Vec a = ds.joints[static_cast<std::size_t>(t)].col(b);
            for (int k = 0; k < kArmDof; ++k) a[k] += cfg.synth_noise_std * synth_rng.gaussian();
            a[kArmDof] += cfg.synth_grip_noise_std * synth_rng.gaussian();
            const JointVector q = denormalize_joints(a, cfg.limits);  // clamps to limits
            ov.joints.col(j) = normalize_joints(q, cfg.limits);
            const Image img = cfg.input_synth(b, t, q);
            ov.x0.middleCols(static_cast<Eigen::Index>(j) * positions, positions) =
                image_to_input(img);
          }
          ov_ptr = &ov;
        }
      }
      batched_forward(ds, params, cache, inputs, feeds, ov_ptr);
    }
    zero_params(grads);
    batched_backward(ds, params, cache, grads, Reduction::mean);
    if (cfg.grad_clip > 0.0) {
      const double norm = param_norm(grads);
      if (norm > cfg.grad_clip) scale_params(grads, cfg.grad_clip / norm);
    }
    TrainConfig step_cfg = cfg;
    if (cfg.learning_rate_final > 0.0 && cfg.epochs > 1) {
      const double u = static_cast<double>(epoch) / (cfg.epochs - 1);
      step_cfg.learning_rate = cfg.learning_rate_final +
                               0.5 * (cfg.learning_rate - cfg.learning_rate_final) *
                                   (1.0 + std::cos(M_PI * u));
    }
    adam_update(params, grads, state, step_cfg);
  }
  return result;
}

}  // namespace beltlab::nn
