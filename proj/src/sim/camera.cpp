#include "beltlab/sim/camera.hpp"

#include <algorithm>
#include <cmath>

namespace beltlab::sim {

PixelMap pixel_map(const CameraViewport& vp, int h, int w) {
  PixelMap m;
  m.x0 = vp.x0;
  m.y1 = vp.y1;
  m.wpx = (vp.x1 - vp.x0) / w;
  m.hpx = (vp.y1 - vp.y0) / h;
  return m;
}

namespace {

constexpr float kBackground = 0.2f;
constexpr float kBelt = 0.35f;
constexpr float kLink = 0.8f;
constexpr int kSupersample = 4;  // 4x4 coverage samples per pixel

void fill_rect_band(Image& img, const PixelMap& m, double y_lo, double y_hi, float value) {
  const double r_top = m.row_of_y(y_hi);
  const double r_bot = m.row_of_y(y_lo);
  const int r0 = std::max(0, static_cast<int>(std::floor(r_top)));
  const int r1 = std::min(img.h - 1, static_cast<int>(std::ceil(r_bot)) - 1);
  for (int r = r0; r <= r1; ++r)
    for (int col = 0; col < img.w; ++col)
      for (int ch = 0; ch < img.c; ++ch) img.at(r, col, ch) = value;
}

/// Fraction of the pixel covered by the object, from a 4x4 subsample grid.
double coverage(const ObjectSpec& obj, const Vec2& center, const PixelMap& m, int r, int col) {
  int inside = 0;
  for (int sy = 0; sy < kSupersample; ++sy) {
    for (int sx = 0; sx < kSupersample; ++sx) {
      const double px = m.x0 + (col + (sx + 0.5) / kSupersample) * m.wpx;
      const double py = m.y1 - (r + (sy + 0.5) / kSupersample) * m.hpx;
      bool in = false;
      if (obj.shape == ObjectShape::box) {
        in = std::abs(px - center.x()) <= obj.size && std::abs(py - center.y()) <= obj.size;
      } else {
        const double dx = px - center.x();
        const double dy = py - center.y();
        in = dx * dx + dy * dy <= obj.size * obj.size;
      }
      if (in) ++inside;
    }
  }
  return static_cast<double>(inside) / (kSupersample * kSupersample);
}

void draw_object(Image& img, const PixelMap& m, const ObjectSpec& obj, const Vec2& center) {
  const double reach = obj.size * 1.5;
  const int c0 = std::max(0, static_cast<int>(std::floor(m.col_of_x(center.x() - reach))));
  const int c1 = std::min(img.w - 1, static_cast<int>(std::ceil(m.col_of_x(center.x() + reach))));
  const int r0 = std::max(0, static_cast<int>(std::floor(m.row_of_y(center.y() + reach))));
  const int r1 = std::min(img.h - 1, static_cast<int>(std::ceil(m.row_of_y(center.y() - reach))));
  for (int r = r0; r <= r1; ++r) {
    for (int col = c0; col <= c1; ++col) {
      const double cov = coverage(obj, center, m, r, col);
      if (cov <= 0.0) continue;
      for (int ch = 0; ch < std::min(img.c, 3); ++ch) {
        const float base = img.at(r, col, ch);
        img.at(r, col, ch) =
            static_cast<float>((1.0 - cov) * base + cov * obj.color[ch]);
      }
    }
  }
}

void draw_segment(Image& img, const PixelMap& m, const Vec2& a, const Vec2& b, float value) {
  const double len = (b - a).norm();
  const double step = std::min(m.wpx, m.hpx) * 0.5;
  const int n = std::max(1, static_cast<int>(std::ceil(len / step)));
  for (int i = 0; i <= n; ++i) {
    const Vec2 p = a + (b - a) * (static_cast<double>(i) / n);
    const int col = static_cast<int>(std::floor(m.col_of_x(p.x())));
    const int r = static_cast<int>(std::floor(m.row_of_y(p.y())));
    if (col < 0 || col >= img.w || r < 0 || r >= img.h) continue;
    for (int ch = 0; ch < img.c; ++ch) img.at(r, col, ch) = value;
  }
}

}  // namespace

Image render_camera(const WorldState& state, int h, int w, int c, const WorldConfig& cfg,
                    const ObjectSpec& object) {
  Image img(h, w, c);
  const PixelMap m = pixel_map(cfg.camera, h, w);

  std::fill(img.px.begin(), img.px.end(), kBackground);
  fill_rect_band(img, m, cfg.belt_y0, cfg.belt_y1, kBelt);
  if (state.visible) draw_object(img, m, object, state.object_pos);

  const FkResult fk = forward_kinematics(state.joints, cfg.arm);
  for (int k = 0; k < kArmDof; ++k)
    draw_segment(img, m, fk.points[static_cast<std::size_t>(k)], fk.points[static_cast<std::size_t>(k) + 1], kLink);

  const int tip_col = static_cast<int>(std::floor(m.col_of_x(fk.tip.x())));
  const int tip_row = static_cast<int>(std::floor(m.row_of_y(fk.tip.y())));
  if (tip_col >= 0 && tip_col < w && tip_row >= 0 && tip_row < h) {
    const float shade = static_cast<float>(std::clamp(state.joints[4], 0.0, 1.0));
    for (int ch = 0; ch < c; ++ch) img.at(tip_row, tip_col, ch) = shade;
  }
  return img;
}

}  // namespace beltlab::sim
