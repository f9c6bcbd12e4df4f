#include "beltlab/analysis/pca.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

namespace beltlab::analysis {

namespace {

constexpr double kTolerance = 1e-10;
constexpr int kMaxIterations = 10000;

/// Leading eigenvector of the symmetric PSD matrix c, orthogonalized against
/// the rows already in `components`.
std::pair<Vec, double> power_iterate(const Mat& c, const Mat& components, int found, Rng& rng) {
  const Eigen::Index d = c.rows();
  Vec v(d);
  for (Eigen::Index i = 0; i < d; ++i) v[i] = rng.uniform(-1.0, 1.0);
  for (int k = 0; k < found; ++k) v -= components.row(k).dot(v) * components.row(k).transpose();
  double norm = v.norm();
  if (norm < 1e-300) {
    v.setZero();
    v[found % d] = 1.0;
    norm = 1.0;
  }
  v /= norm;

  double lambda = 0.0;
  for (int it = 0; it < kMaxIterations; ++it) {
    Vec w = c * v;
    for (int k = 0; k < found; ++k) w -= components.row(k).dot(w) * components.row(k).transpose();
    lambda = w.norm();
    if (lambda < 1e-300) return {Vec(), 0.0};  // deflated to nothing
    w /= lambda;
    const double delta = (w - v).norm();
    v = w;
    if (delta <= kTolerance) break;
  }
  return {v, lambda};
}

/// Any unit vector orthogonal to the rows of `components`.
Vec orthonormal_completion(const Mat& components, int found) {
  const Eigen::Index d = components.cols();
  for (Eigen::Index basis = 0; basis < d; ++basis) {
    Vec v = Vec::Zero(d);
    v[basis] = 1.0;
    for (int k = 0; k < found; ++k) v -= components.row(k).dot(v) * components.row(k).transpose();
    const double norm = v.norm();
    if (norm > 1e-6) return v / norm;
  }
  throw std::runtime_error("pca: cannot complete orthonormal basis");
}

}  // namespace

PcaResult pca(const nn::HiddenTrace& trace, int k) {
  if (trace.states.empty()) throw std::invalid_argument("pca: empty trace");
  const int width = trace.width();
  Eigen::Index total = 0;
  for (const Mat& s : trace.states) total += s.rows();
  if (total < k + 1) throw std::invalid_argument("pca: need at least k+1 samples");

  Mat x(total, width);
  PcaResult result;
  result.episode_index.reserve(static_cast<std::size_t>(total));
  result.time_index.reserve(static_cast<std::size_t>(total));
  Eigen::Index row = 0;
  for (std::size_t e = 0; e < trace.states.size(); ++e) {
    const Mat& s = trace.states[e];
    x.middleRows(row, s.rows()) = s;
    for (Eigen::Index t = 0; t < s.rows(); ++t) {
      result.episode_index.push_back(static_cast<int>(e));
      result.time_index.push_back(static_cast<int>(t));
      result.speed_class.push_back(e < trace.speed_class.size() ? trace.speed_class[e] : 0);
      result.position_class.push_back(e < trace.position_class.size() ? trace.position_class[e] : 0);
    }
    row += s.rows();
  }

  result.mean = x.colwise().mean().transpose();
  x.rowwise() -= result.mean.transpose();
  const Mat cov = (x.transpose() * x) / static_cast<double>(total - 1);
  const double total_variance = cov.trace();

  result.components = Mat::Zero(k, width);
  result.explained_ratio = Vec::Zero(k);
  result.achieved_rank = 0;

  Mat deflated = cov;
  Rng rng(0x9c4a5eedull);
  for (int comp = 0; comp < k; ++comp) {
    auto [v, lambda] = power_iterate(deflated, result.components, comp, rng);
    const bool degenerate =
        v.size() == 0 || total_variance <= 0.0 || lambda / total_variance < 1e-14;
    if (degenerate) {
      result.components.row(comp) = orthonormal_completion(result.components, comp).transpose();
      result.explained_ratio[comp] = 0.0;
    } else {
      result.components.row(comp) = v.transpose();
      result.explained_ratio[comp] = lambda / total_variance;
      deflated -= lambda * v * v.transpose();
      ++result.achieved_rank;
    }
  }

  // Stable exports: the largest-magnitude coordinate of each component points
  // in the positive direction.
  for (int comp = 0; comp < k; ++comp) {
    Eigen::Index argmax = 0;
    result.components.row(comp).cwiseAbs().maxCoeff(&argmax);
    if (result.components(comp, argmax) < 0.0) result.components.row(comp) *= -1.0;
  }

  result.projections = x * result.components.transpose();
  return result;
}

void export_projection(const PcaResult& result, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.precision(12);
  out << "episode,t,pc1,pc2,pc3,speed_class,position_class\n";
  const int k = static_cast<int>(result.projections.cols());
  int prev_episode = -1;
  for (Eigen::Index i = 0; i < result.projections.rows(); ++i) {
    const auto idx = static_cast<std::size_t>(i);
    const int episode = result.episode_index[idx];
    if (episode != prev_episode) {
      // start marker "S" row for the episode
      out << episode << ",-1";
      for (int c = 0; c < k; ++c) out << ',' << result.projections(i, c);
      out << ',' << result.speed_class[idx] << ',' << result.position_class[idx] << '\n';
      prev_episode = episode;
    }
    out << episode << ',' << result.time_index[idx];
    for (int c = 0; c < k; ++c) out << ',' << result.projections(i, c);
    out << ',' << result.speed_class[idx] << ',' << result.position_class[idx] << '\n';
  }
}

}  // namespace beltlab::analysis
