#pragma once

#include <vector>

#include "beltlab/manifest.hpp"
#include "beltlab/types.hpp"

namespace beltlab::aug {

struct AugmentSpec {
  std::vector<Rational> velocity_ratios{{1, 1}, {3, 2}, {2, 1}};
  std::vector<int> delay_steps{0, 10, 20};
  int post_pad_to_length = 0;  // 0 = pad to the longest episode in the grid
};

/// Indices kept when resampling a length-T series at the given ratio:
/// {floor(j*ratio) : j = 0,1,...} while the value stays below T. Strictly
/// increasing, always starts at 0. Ratio 2 keeps every 2nd step, ratio 3/2
/// keeps 2 of every 3. Ratios below 1 (up-sampling) are rejected.
std::vector<int> select_indices(int length, const Rational& ratio);

/// Gathers frames at select_indices and renumbers steps; images and joints
/// are taken verbatim. The provenance ratio multiplies up the chain.
Episode downsample(const Episode& episode, const Rational& ratio);

/// delay > 0 prepends that many copies of frame 0; delay < 0 drops leading
/// frames. delay <= -T would leave nothing and is rejected.
Episode phase_shift(const Episode& episode, int delay);

/// Pads every episode at the end by repeating its final frame, up to
/// target_length (default: the longest episode present). The pre-padding
/// length is kept in meta.valid_length so losses can mask the tail.
std::vector<Episode> equalize_length(std::vector<Episode> episodes, int target_length = 0);

struct GridResult {
  std::vector<Episode> episodes;
  DatasetManifest manifest;  // entry paths filled by the caller when saving
};

/// Cartesian product demos x ratios x delays: downsample, then phase-shift,
/// then equalize the whole grid. Every demo must validate.
GridResult augment_grid(const std::vector<Episode>& demos, const AugmentSpec& spec);

}  // namespace beltlab::aug
