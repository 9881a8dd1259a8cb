#pragma once

#include "swapread/core_types.hpp"

#include <utility>

namespace swapread {

/// A frame region cropped and resized for the text detector.
///
/// `region` holds the integer crop bounds in frame coordinates. A point (x, y) in
/// the resized crop maps back to (region.x_min + x * scale_x, region.y_min + y * scale_y).
struct RoiCrop {
  AxisAlignedBox region;
  Frame pixels;
  double scale_x = 1;
  double scale_y = 1;
};

struct AspectDecision {
  bool pass = false;
  double ratio = 0;
};

inline constexpr double kDefaultAspectMinRatio = 1.5;
inline constexpr int kDefaultMaxTextInputSide = 1280;

// Top edge moved to the vertical midpoint; x-extent unchanged.
AxisAlignedBox lower_half(const AxisAlignedBox& box);

// Passes iff width / height >= min_ratio.
AspectDecision aspect_gate(const AxisAlignedBox& box, double min_ratio = kDefaultAspectMinRatio);

// Each side floored to a multiple of 32, never below 32.
std::pair<int, int> size_to_multiple_of_32(int w, int h);

// Clips `region` to the frame (EmptyBox if nothing remains), crops with
// floor(min)/ceil(max) bounds and bilinearly resizes to multiples of 32. When the
// longer side exceeds `max_side` the crop is first scaled down to fit.
RoiCrop crop_and_resize(const Frame& frame, const AxisAlignedBox& region,
                        int max_side = kDefaultMaxTextInputSide);

Point2 region_to_frame(const Point2& pt, const RoiCrop& crop);
AxisAlignedBox region_to_frame(const AxisAlignedBox& box, const RoiCrop& crop);
Corners region_to_frame(const Corners& corners, const RoiCrop& crop);

Point2 frame_to_region(const Point2& pt, const RoiCrop& crop);

// Bilinear resample with pixel-centre alignment; identical sizes return a copy.
Frame resize_bilinear(const Frame& src, int width, int height);

// Integer sub-image [x0, x1) x [y0, y1); bounds must lie inside the frame.
Frame crop_pixels(const Frame& src, int x0, int y0, int x1, int y1);

}  // namespace swapread
