#pragma once

#include "beltlab/sim/world.hpp"
#include "beltlab/types.hpp"

namespace beltlab::sim {

/// Orthographic top-down render of the world state. Pure function of
/// (state, shape, config): background 0.2, belt band 0.35, the object as a
/// coverage-shaded disk/box of its color, arm links as 1-pixel 0.8 segments,
/// and the tip pixel shaded by the gripper opening (open=white, closed=black).
Image render_camera(const WorldState& state, int h, int w, int c, const WorldConfig& cfg,
                    const ObjectSpec& object);

/// World -> pixel map used by the renderer (x to column, y to row; row 0 is
/// the top of the viewport).
struct PixelMap {
  double col_of_x(double x) const { return (x - x0) / wpx; }
  double row_of_y(double y) const { return (y1 - y) / hpx; }
  double x0, y1, wpx, hpx;
};
PixelMap pixel_map(const CameraViewport& vp, int h, int w);

}  // namespace beltlab::sim
