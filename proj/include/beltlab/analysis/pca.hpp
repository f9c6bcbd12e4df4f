#pragma once

#include <filesystem>

#include "beltlab/nn/model.hpp"

namespace beltlab::analysis {

struct PcaResult {
  Vec mean;
  Mat components;      // [k x width], orthonormal rows, sign-canonicalized
  Vec explained_ratio; // descending, sums to <= 1
  Mat projections;     // [total samples x k], episode-major, t ascending
  int achieved_rank = 0;
  // parallel label columns for the projections
  std::vector<int> episode_index, time_index, speed_class, position_class;
};

/// Principal components of every (episode, t) state vector via power
/// iteration with deflation (tolerance 1e-10, at most 10000 iterations per
/// component). Rank-deficient data yields zero-variance components completed
/// to an orthonormal set, with achieved_rank reporting how many were real.
PcaResult pca(const nn::HiddenTrace& trace, int k = 3);

/// CSV: header "episode,t,pc1,pc2,pc3,speed_class,position_class", one
/// start-marker row per episode (t = -1, repeating the first sample) followed
/// by its data rows.
void export_projection(const PcaResult& result, const std::filesystem::path& path);

}  // namespace beltlab::analysis
