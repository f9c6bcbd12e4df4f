#include "beltlab/analysis/probe.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

namespace beltlab::analysis {

nn::HiddenTrace collect_states(const nn::ModelParams& params,
                               const std::vector<Episode>& episodes) {
  if (episodes.empty()) throw std::invalid_argument("collect_states: empty episode list");

  std::vector<Rational> ratios;
  std::vector<TeachPosition> positions;
  for (const Episode& e : episodes) {
    if (std::find(ratios.begin(), ratios.end(), e.meta.velocity_ratio) == ratios.end())
      ratios.push_back(e.meta.velocity_ratio);
    if (std::find(positions.begin(), positions.end(), e.meta.teach_position) == positions.end())
      positions.push_back(e.meta.teach_position);
  }
  std::sort(ratios.begin(), ratios.end());
  std::sort(positions.begin(), positions.end());

  nn::HiddenTrace trace;
  for (const Episode& e : episodes) {
    const nn::SequenceResult r = nn::forward_sequence(e, params);
    trace.states.push_back(r.trace);
    trace.valid_len.push_back(e.valid_length());
    trace.speed_class.push_back(static_cast<int>(
        std::find(ratios.begin(), ratios.end(), e.meta.velocity_ratio) - ratios.begin()));
    trace.position_class.push_back(static_cast<int>(
        std::find(positions.begin(), positions.end(), e.meta.teach_position) - positions.begin()));
  }
  return trace;
}

double separability_probe(const nn::HiddenTrace& trace, ProbeFactor factor, double w_lo,
                          double w_hi) {
  const std::size_t n = trace.states.size();
  if (n < 2) throw std::invalid_argument("separability_probe: need at least two episodes");
  const auto& labels =
      factor == ProbeFactor::speed ? trace.speed_class : trace.position_class;

  std::map<int, int> classes;  // label -> dense class index, sorted by label
  for (int l : labels) classes.emplace(l, 0);
  if (classes.size() < 2) throw std::invalid_argument("separability_probe: fewer than two classes");
  int next = 0;
  for (auto& [label, idx] : classes) idx = next++;
  const int n_classes = next;

  const int width = trace.width();
  auto window = [&](std::size_t e) -> std::pair<int, int> {
    const int valid = trace.valid_len[e] > 0
                          ? std::min<int>(trace.valid_len[e], static_cast<int>(trace.states[e].rows()))
                          : static_cast<int>(trace.states[e].rows());
    int lo = static_cast<int>(std::floor(w_lo * valid));
    int hi = static_cast<int>(std::ceil(w_hi * valid));
    hi = std::min(hi, valid);
    lo = std::min(lo, hi - 1);
    lo = std::max(lo, 0);
    return {lo, hi};
  };

  Eigen::Index correct = 0, total = 0;
  for (std::size_t held = 0; held < n; ++held) {
    Mat centroids = Mat::Zero(n_classes, width);
    Vec counts = Vec::Zero(n_classes);
    for (std::size_t e = 0; e < n; ++e) {
      if (e == held) continue;
      const auto [lo, hi] = window(e);
      const int cls = classes.at(labels[e]);
      for (int t = lo; t < hi; ++t) {
        centroids.row(cls) += trace.states[e].row(t);
        counts[cls] += 1.0;
      }
    }
    for (int c = 0; c < n_classes; ++c)
      if (counts[c] > 0.0) centroids.row(c) /= counts[c];

    const int truth = classes.at(labels[held]);
    const auto [lo, hi] = window(held);
    for (int t = lo; t < hi; ++t) {
      int best = 0;
      double best_dist = std::numeric_limits<double>::infinity();
      for (int c = 0; c < n_classes; ++c) {
        if (counts[c] == 0.0) continue;
        const double d = (centroids.row(c) - trace.states[held].row(t)).squaredNorm();
        if (d < best_dist) {  // strict: ties keep the lowest class index
          best_dist = d;
          best = c;
        }
      }
      if (best == truth) ++correct;
      ++total;
    }
  }
  return static_cast<double>(correct) / static_cast<double>(total);
}

}  // namespace beltlab::analysis
