#pragma once

#include <vector>

#include "beltlab/nn/model.hpp"

namespace beltlab::analysis {

/// Feeds each probe episode through the model and records the internal state
/// per step: the recurrent hidden vector, or the baseline's penultimate
/// layer. Row 0 of each state matrix is the zero start state; speed classes
/// come from the distinct velocity ratios present, position classes from the
/// distinct teach positions.
nn::HiddenTrace collect_states(const nn::ModelParams& params,
                               const std::vector<Episode>& episodes);

enum class ProbeFactor { speed, position };

/// Leave-one-episode-out nearest-centroid classification of the factor label
/// from state vectors inside the window [w_lo, w_hi) of each episode's valid
/// (unpadded) length. Returns pooled sample accuracy; ties resolve to the
/// lowest class index. Needs at least two distinct labels.
double separability_probe(const nn::HiddenTrace& trace, ProbeFactor factor, double w_lo = 2.0 / 3.0,
                          double w_hi = 1.0);

}  // namespace beltlab::analysis
