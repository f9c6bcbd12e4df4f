#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "beltlab/types.hpp"

namespace beltlab {

struct ManifestEntry {
  std::string id;
  std::string path;  // relative to the manifest file
  EpisodeMeta meta;
};

/// Lists a set of episodes with their augmentation provenance. All entries
/// must share one image shape and one set of joint limits.
struct DatasetManifest {
  std::vector<ManifestEntry> entries;
  int image_h = 16, image_w = 32, image_c = 3;
  JointLimits limits;
  std::uint64_t config_hash = 0;

  void add(const Episode& e, const std::string& relative_path);
  void validate() const;  // unique ids, consistent shapes
};

void save_manifest(const DatasetManifest& m, const std::filesystem::path& path);
DatasetManifest load_manifest(const std::filesystem::path& path);

/// Loads every episode, checking each against the manifest shape and limits.
std::vector<Episode> load_manifest_episodes(const DatasetManifest& m,
                                            const std::filesystem::path& manifest_path);

}  // namespace beltlab
