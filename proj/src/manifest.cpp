#include "beltlab/manifest.hpp"

#include <fstream>
#include <set>

#include "beltlab/episode_io.hpp"

namespace beltlab {

void DatasetManifest::add(const Episode& e, const std::string& relative_path) {
  entries.push_back({e.meta.episode_id, relative_path, e.meta});
}

void DatasetManifest::validate() const {
  std::set<std::string> ids;
  for (const auto& entry : entries) {
    if (!ids.insert(entry.id).second)
      throw EpisodeError("manifest: duplicate episode id " + entry.id);
    if (entry.id != entry.meta.episode_id)
      throw EpisodeError("manifest: id mismatch for " + entry.id);
  }
  if (image_h <= 0 || image_w <= 0 || image_c <= 0) throw EpisodeError("manifest: bad image shape");
}

void save_manifest(const DatasetManifest& m, const std::filesystem::path& path) {
  m.validate();
  nlohmann::json j;
  j["format"] = "beltlab-manifest-v1";
  j["image"] = {{"h", m.image_h}, {"w", m.image_w}, {"c", m.image_c}};
  j["joint_limits"] = {{"lo", std::vector<double>(m.limits.lo.data(), m.limits.lo.data() + kArmDof)},
                       {"hi", std::vector<double>(m.limits.hi.data(), m.limits.hi.data() + kArmDof)}};
  j["config_hash"] = hex64(m.config_hash);
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : m.entries)
    entries.push_back({{"id", e.id}, {"path", e.path}, {"meta", to_json(e.meta)}});
  j["episodes"] = entries;

  std::ofstream out(path, std::ios::trunc);
  if (!out) throw EpisodeError("cannot write manifest " + path.string());
  out << j.dump(2) << "\n";
}

DatasetManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw EpisodeError("cannot open manifest " + path.string());
  nlohmann::json j = nlohmann::json::parse(in);
  if (j.at("format").get<std::string>() != "beltlab-manifest-v1")
    throw EpisodeError("unknown manifest format");
  DatasetManifest m;
  m.image_h = j.at("image").at("h").get<int>();
  m.image_w = j.at("image").at("w").get<int>();
  m.image_c = j.at("image").at("c").get<int>();
  const auto lo = j.at("joint_limits").at("lo").get<std::vector<double>>();
  const auto hi = j.at("joint_limits").at("hi").get<std::vector<double>>();
  if (lo.size() != kArmDof || hi.size() != kArmDof) throw EpisodeError("manifest: bad joint limits");
  for (int i = 0; i < kArmDof; ++i) {
    m.limits.lo[i] = lo[static_cast<std::size_t>(i)];
    m.limits.hi[i] = hi[static_cast<std::size_t>(i)];
  }
  m.config_hash = std::stoull(j.at("config_hash").get<std::string>(), nullptr, 16);
  for (const auto& e : j.at("episodes")) {
    ManifestEntry entry;
    entry.id = e.at("id").get<std::string>();
    entry.path = e.at("path").get<std::string>();
    entry.meta = meta_from_json(e.at("meta"));
    m.entries.push_back(std::move(entry));
  }
  m.validate();
  return m;
}

std::vector<Episode> load_manifest_episodes(const DatasetManifest& m,
                                            const std::filesystem::path& manifest_path) {
  const auto base = manifest_path.parent_path();
  std::vector<Episode> episodes;
  episodes.reserve(m.entries.size());
  for (const auto& entry : m.entries) {
    Episode e = load_episode(base / entry.path);
    const Image& shape = e.frames.front().image;
    if (shape.h != m.image_h || shape.w != m.image_w || shape.c != m.image_c)
      throw EpisodeError("episode " + entry.id + ": shape differs from manifest");
    for (const Frame& f : e.frames)
      if (!m.limits.contains(f.joints))
        throw EpisodeError("episode " + entry.id + ": joints outside manifest limits");
    episodes.push_back(std::move(e));
  }
  return episodes;
}

}  // namespace beltlab
