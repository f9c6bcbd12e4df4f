#include "beltlab/episode_io.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <ostream>
#include <vector>

namespace beltlab {
namespace {

constexpr char kMagic[4] = {'E', 'P', 'I', '1'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::string& buf, std::uint32_t v) {
  buf.push_back(static_cast<char>(v & 0xff));
  buf.push_back(static_cast<char>((v >> 8) & 0xff));
  buf.push_back(static_cast<char>((v >> 16) & 0xff));
  buf.push_back(static_cast<char>((v >> 24) & 0xff));
}

void put_f32(std::string& buf, float f) {
  std::uint32_t v;
  std::memcpy(&v, &f, 4);
  put_u32(buf, v);
}

std::uint32_t get_u32(std::istream& in, const char* what) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4))
    throw IoError(IoError::Kind::truncated, std::string("truncated while reading ") + what);
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

float u32_to_f32(std::uint32_t v) {
  float f;
  std::memcpy(&f, &v, 4);
  return f;
}

}  // namespace

std::size_t write_episode(const Episode& episode, std::ostream& out) {
  try {
    validate_episode(episode);
  } catch (const EpisodeError& e) {
    throw IoError(IoError::Kind::invariant, e.what());
  }

  const Image& shape = episode.frames.front().image;
  const std::string meta = to_json(episode.meta).dump();

  std::string buf;
  buf.reserve(32 + meta.size() +
              episode.frames.size() * (shape.size() * 4 + kJointDim * 4));
  buf.append(kMagic, 4);
  put_u32(buf, kVersion);
  put_u32(buf, static_cast<std::uint32_t>(episode.frames.size()));
  put_u32(buf, static_cast<std::uint32_t>(shape.h));
  put_u32(buf, static_cast<std::uint32_t>(shape.w));
  put_u32(buf, static_cast<std::uint32_t>(shape.c));
  put_u32(buf, static_cast<std::uint32_t>(kJointDim));
  put_u32(buf, static_cast<std::uint32_t>(meta.size()));
  buf.append(meta);
  for (const Frame& f : episode.frames) {
    for (float v : f.image.px) put_f32(buf, v);
    for (int k = 0; k < kJointDim; ++k) put_f32(buf, static_cast<float>(f.joints[k]));
  }

  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw IoError(IoError::Kind::write_failed, "episode write failed");
  return buf.size();
}

Episode read_episode(std::istream& in) {
  char magic[4];
  if (!in.read(magic, 4)) throw IoError(IoError::Kind::truncated, "truncated magic");
  if (std::memcmp(magic, kMagic, 4) != 0)
    throw IoError(IoError::Kind::bad_magic, "bad magic, expected EPI1");

  const std::uint32_t version = get_u32(in, "version");
  if (version != kVersion)
    throw IoError(IoError::Kind::bad_version, "unsupported version " + std::to_string(version));

  const std::uint32_t t = get_u32(in, "T");
  const std::uint32_t h = get_u32(in, "H");
  const std::uint32_t w = get_u32(in, "W");
  const std::uint32_t c = get_u32(in, "C");
  const std::uint32_t d = get_u32(in, "D");
  if (t == 0 || t > kMaxEpisodeLength)
    throw IoError(IoError::Kind::invariant, "frame count out of bounds: " + std::to_string(t));
  if (h == 0 || w == 0 || c == 0 || h > 4096 || w > 4096 || c > 16)
    throw IoError(IoError::Kind::invariant, "image shape out of bounds");
  if (d != kJointDim)
    throw IoError(IoError::Kind::invariant, "joint dimension must be 5, got " + std::to_string(d));

  const std::uint32_t meta_len = get_u32(in, "meta length");
  std::string meta_text(meta_len, '\0');
  if (meta_len > 0 && !in.read(meta_text.data(), meta_len))
    throw IoError(IoError::Kind::truncated, "truncated metadata block");

  Episode e;
  try {
    e.meta = meta_from_json(nlohmann::json::parse(meta_text));
  } catch (const nlohmann::json::exception& ex) {
    throw IoError(IoError::Kind::meta_parse, std::string("metadata parse: ") + ex.what());
  } catch (const EpisodeError& ex) {
    throw IoError(IoError::Kind::meta_parse, std::string("metadata parse: ") + ex.what());
  }

  const std::size_t pixel_count = static_cast<std::size_t>(h) * w * c;
  std::vector<unsigned char> raw((pixel_count + kJointDim) * 4);
  e.frames.reserve(t);
  for (std::uint32_t fi = 0; fi < t; ++fi) {
    if (!in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size())))
      throw IoError(IoError::Kind::truncated, "truncated in frame " + std::to_string(fi));
    Frame f;
    f.image = Image(static_cast<int>(h), static_cast<int>(w), static_cast<int>(c));
    f.step_index = static_cast<int>(fi);
    const unsigned char* p = raw.data();
    for (std::size_t i = 0; i < pixel_count; ++i, p += 4) {
      const std::uint32_t v = static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
                              (static_cast<std::uint32_t>(p[2]) << 16) |
                              (static_cast<std::uint32_t>(p[3]) << 24);
      const float x = u32_to_f32(v);
      if (!(x >= 0.0f && x <= 1.0f))
        throw IoError(IoError::Kind::pixel_range,
                      "pixel out of [0,1] in frame " + std::to_string(fi));
      f.image.px[i] = x;
    }
    for (int k = 0; k < kJointDim; ++k, p += 4) {
      const std::uint32_t v = static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
                              (static_cast<std::uint32_t>(p[2]) << 16) |
                              (static_cast<std::uint32_t>(p[3]) << 24);
      const float x = u32_to_f32(v);
      if (!std::isfinite(x))
        throw IoError(IoError::Kind::joint_range,
                      "non-finite joint in frame " + std::to_string(fi));
      f.joints[k] = static_cast<double>(x);
    }
    if (f.joints[4] < 0.0 || f.joints[4] > 1.0)
      throw IoError(IoError::Kind::joint_range, "grip out of [0,1] in frame " + std::to_string(fi));
    e.frames.push_back(std::move(f));
  }
  return e;
}

std::size_t save_episode(const Episode& episode, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(IoError::Kind::write_failed, "cannot open " + path.string());
  return write_episode(episode, out);
}

Episode load_episode(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(IoError::Kind::truncated, "cannot open " + path.string());
  return read_episode(in);
}

}  // namespace beltlab
