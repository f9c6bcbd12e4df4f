#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>

#include "beltlab/types.hpp"

namespace beltlab {

/// Errors raised by the EPI1 codec, tagged so callers (and tests) can tell
/// the failure modes apart.
struct IoError : std::runtime_error {
  enum class Kind {
    bad_magic,
    bad_version,
    truncated,
    pixel_range,
    joint_range,
    meta_parse,
    invariant,
    write_failed,
  };
  Kind kind;
  IoError(Kind k, const std::string& msg) : std::runtime_error(msg), kind(k) {}
};

/// Serializes to the EPI1 layout:
///   "EPI1", u32le x6 {version=1, T, H, W, C, D=5},
///   u32le meta byte count, UTF-8 JSON metadata,
///   T frames of H*W*C float32le pixels (row, col, channel) + D float32le joints.
/// Validates the episode first; nothing is written on a validation failure.
/// Returns the number of bytes emitted.
std::size_t write_episode(const Episode& episode, std::ostream& out);

/// Inverse of write_episode. Checks magic, version, shape bounds, pixel and
/// grip ranges, and step_index contiguity.
Episode read_episode(std::istream& in);

std::size_t save_episode(const Episode& episode, const std::filesystem::path& path);
Episode load_episode(const std::filesystem::path& path);

}  // namespace beltlab
