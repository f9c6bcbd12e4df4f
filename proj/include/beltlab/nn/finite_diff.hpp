#pragma once

#include "beltlab/nn/train.hpp"

namespace beltlab::nn {

/// Central-difference gradient of the masked MSE, the independent oracle the
/// analytic backward pass is checked against. Touches only the forward path.
inline ModelParams numeric_gradient(const CompiledDataset& ds, const ModelParams& params,
                                    double h = 1e-5) {
  ModelParams work = params;
  ModelParams grads = params.zeros_like();

  std::vector<double*> work_arrays;
  std::vector<double*> grad_arrays;
  std::vector<Eigen::Index> sizes;
  work.for_each_array([&](const std::string&, double* d, Eigen::Index r, Eigen::Index c) {
    work_arrays.push_back(d);
    sizes.push_back(r * c);
  });
  grads.for_each_array([&](const std::string&, double* d, Eigen::Index, Eigen::Index) {
    grad_arrays.push_back(d);
  });

  BatchCache cache;
  for (std::size_t k = 0; k < work_arrays.size(); ++k) {
    for (Eigen::Index i = 0; i < sizes[k]; ++i) {
      const double saved = work_arrays[k][i];
      work_arrays[k][i] = saved + h;
      const double up = batched_forward(ds, work, cache);
      work_arrays[k][i] = saved - h;
      const double down = batched_forward(ds, work, cache);
      work_arrays[k][i] = saved;
      grad_arrays[k][i] = (up - down) / (2.0 * h);
    }
  }
  return grads;
}

/// max_i |a_i - b_i| / max(|a_i|, |b_i|, floor) over every coordinate.
inline double max_relative_error(const ModelParams& a, const ModelParams& b,
                                 double floor = 1e-8) {
  std::vector<const double*> av, bv;
  std::vector<Eigen::Index> sizes;
  a.for_each_array([&](const std::string&, const double* d, Eigen::Index r, Eigen::Index c) {
    av.push_back(d);
    sizes.push_back(r * c);
  });
  b.for_each_array([&](const std::string&, const double* d, Eigen::Index, Eigen::Index) {
    bv.push_back(d);
  });
  double worst = 0.0;
  for (std::size_t k = 0; k < av.size(); ++k)
    for (Eigen::Index i = 0; i < sizes[k]; ++i) {
      const double denom = std::max({std::abs(av[k][i]), std::abs(bv[k][i]), floor});
      worst = std::max(worst, std::abs(av[k][i] - bv[k][i]) / denom);
    }
  return worst;
}

}  // namespace beltlab::nn
