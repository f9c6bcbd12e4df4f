#include <doctest.h>

#include <beltlab/episode_io.hpp>
#include <beltlab/manifest.hpp>

#include <filesystem>

#include "support/builders.hpp"

using namespace beltlab;
namespace fs = std::filesystem;

TEST_CASE("manifest round trip and episode loading") {
  const fs::path dir = fs::temp_directory_path() / "beltlab_manifest_test";
  fs::create_directories(dir);

  Rng rng(71);
  DatasetManifest m;
  m.image_h = 4;
  m.image_w = 4;
  m.image_c = 3;
  std::vector<Episode> eps;
  for (int i = 0; i < 3; ++i) {
    Episode e = testsupport::random_episode(rng, 5, 4, 4, 3);
    e.meta.episode_id = "ep" + std::to_string(i);
    save_episode(e, dir / (e.meta.episode_id + ".epi"));
    m.add(e, e.meta.episode_id + ".epi");
    eps.push_back(std::move(e));
  }
  save_manifest(m, dir / "manifest.json");

  const DatasetManifest back = load_manifest(dir / "manifest.json");
  CHECK(back.entries.size() == 3);
  CHECK(back.image_h == 4);

  const auto loaded = load_manifest_episodes(back, dir / "manifest.json");
  REQUIRE(loaded.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) CHECK(loaded[i] == eps[i]);

  SUBCASE("a shape mismatch against the manifest is caught") {
    DatasetManifest wrong = back;
    wrong.image_w = 8;
    CHECK_THROWS_WITH_AS(load_manifest_episodes(wrong, dir / "manifest.json"),
                         doctest::Contains("shape"), EpisodeError);
  }
  fs::remove_all(dir);
}

TEST_CASE("duplicate episode ids are rejected") {
  Rng rng(72);
  Episode e = testsupport::random_episode(rng, 2, 2, 2, 1);
  e.meta.episode_id = "dup";
  DatasetManifest m;
  m.add(e, "a.epi");
  m.add(e, "b.epi");
  CHECK_THROWS_WITH_AS(m.validate(), doctest::Contains("dup"), EpisodeError);
}
