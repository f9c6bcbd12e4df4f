#include "beltlab/aug/augment.hpp"

#include <algorithm>
#include <stdexcept>

namespace beltlab::aug {

std::vector<int> select_indices(int length, const Rational& ratio) {
  if (length < 1) throw std::invalid_argument("select_indices: empty series");
  if (ratio < Rational{1, 1})
    throw std::invalid_argument("select_indices: ratio below 1 (up-sampling is out of scope)");
  std::vector<int> idx;
  for (std::int64_t j = 0;; ++j) {
    const std::int64_t k = j * ratio.num / ratio.den;  // floor for non-negative values
    if (k > length - 1) break;
    idx.push_back(static_cast<int>(k));
  }
  return idx;
}

Episode downsample(const Episode& episode, const Rational& ratio) {
  const auto idx = select_indices(episode.length(), ratio);
  Episode out;
  out.meta = episode.meta;
  out.meta.velocity_ratio = episode.meta.velocity_ratio * ratio;
  out.meta.valid_length = 0;
  out.frames.reserve(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    Frame f = episode.frames[static_cast<std::size_t>(idx[i])];
    f.step_index = static_cast<int>(i);
    out.frames.push_back(std::move(f));
  }
  return out;
}

Episode phase_shift(const Episode& episode, int delay) {
  const int t = episode.length();
  if (delay <= -t)
    throw std::invalid_argument("phase_shift: delay " + std::to_string(delay) +
                                " empties a length-" + std::to_string(t) + " episode");
  Episode out;
  out.meta = episode.meta;
  out.meta.delay_steps = episode.meta.delay_steps + delay;
  out.meta.valid_length = 0;
  if (delay >= 0) {
    out.frames.reserve(static_cast<std::size_t>(t + delay));
    for (int i = 0; i < delay; ++i) out.frames.push_back(episode.frames.front());
    for (const Frame& f : episode.frames) out.frames.push_back(f);
  } else {
    out.frames.assign(episode.frames.begin() + static_cast<std::ptrdiff_t>(-delay), episode.frames.end());
  }
  for (std::size_t i = 0; i < out.frames.size(); ++i)
    out.frames[i].step_index = static_cast<int>(i);
  return out;
}

std::vector<Episode> equalize_length(std::vector<Episode> episodes, int target_length) {
  int longest = 0;
  for (const Episode& e : episodes) longest = std::max(longest, e.length());
  if (target_length == 0) target_length = longest;
  if (target_length < longest)
    throw std::invalid_argument("equalize_length: target below the longest episode");
  for (Episode& e : episodes) {
    const int t = e.length();
    if (e.meta.valid_length == 0) e.meta.valid_length = t;
    if (t == target_length) continue;
    Frame last = e.frames.back();
    for (int i = t; i < target_length; ++i) {
      last.step_index = i;
      e.frames.push_back(last);
    }
  }
  return episodes;
}

GridResult augment_grid(const std::vector<Episode>& demos, const AugmentSpec& spec) {
  if (demos.empty()) throw std::invalid_argument("augment_grid: no demos");
  if (spec.velocity_ratios.empty() || spec.delay_steps.empty())
    throw std::invalid_argument("augment_grid: empty ratio or delay list");
  for (const Episode& d : demos) {
    if (d.meta.source != Source::demo)
      throw std::invalid_argument("augment_grid: " + d.meta.episode_id + " is not a demo");
    try {
      validate_episode(d);
    } catch (const EpisodeError& e) {
      throw std::invalid_argument("augment_grid: invalid demo " + d.meta.episode_id + ": " +
                                  e.what());
    }
  }

  GridResult result;
  for (const Episode& demo : demos) {
    for (const Rational& ratio : spec.velocity_ratios) {
      for (int delay : spec.delay_steps) {
        Episode e = phase_shift(downsample(demo, ratio), delay);
        e.meta.source = Source::augmented;
        e.meta.parent_episode_id = demo.meta.episode_id;
        e.meta.episode_id =
            demo.meta.episode_id + "_r" + ratio.str() + "_d" + std::to_string(delay);
        // "/" is awkward in ids and filenames.
        std::replace(e.meta.episode_id.begin(), e.meta.episode_id.end(), '/', ':');
        result.episodes.push_back(std::move(e));
      }
    }
  }
  result.episodes = equalize_length(std::move(result.episodes), spec.post_pad_to_length);

  const Image& shape = demos.front().frames.front().image;
  result.manifest.image_h = shape.h;
  result.manifest.image_w = shape.w;
  result.manifest.image_c = shape.c;
  for (const Episode& e : result.episodes) result.manifest.add(e, e.meta.episode_id + ".epi");
  result.manifest.validate();
  return result;
}

}  // namespace beltlab::aug
