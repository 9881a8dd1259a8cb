#include "swapread/roi_gating.hpp"

#include "swapread/errors.hpp"

#include <algorithm>
#include <cmath>

namespace swapread {

AxisAlignedBox lower_half(const AxisAlignedBox& box) {
  return {box.x_min, (box.y_min + box.y_max) / 2, box.x_max, box.y_max};
}

AspectDecision aspect_gate(const AxisAlignedBox& box, double min_ratio) {
  if (!(min_ratio > 0)) throw InvalidArgument("min_ratio must be positive");
  const double ratio = box.width() / box.height();
  return {ratio >= min_ratio, ratio};
}

std::pair<int, int> size_to_multiple_of_32(int w, int h) {
  if (w < 1 || h < 1) throw InvalidArgument("size must be >= 1");
  return {std::max(32, 32 * (w / 32)), std::max(32, 32 * (h / 32))};
}

Frame crop_pixels(const Frame& src, int x0, int y0, int x1, int y1) {
  if (x0 < 0 || y0 < 0 || x1 > src.width() || y1 > src.height() || x0 >= x1 || y0 >= y1)
    throw InvalidArgument("crop bounds outside frame");
  const int c = src.channels();
  Frame out(x1 - x0, y1 - y0, c);
  const auto row_bytes = static_cast<std::size_t>(x1 - x0) * c;
  for (int y = y0; y < y1; ++y) {
    const auto* from = src.pixels().data() + (static_cast<std::size_t>(y) * src.width() + x0) * c;
    std::copy_n(from, row_bytes, out.pixels().data() + static_cast<std::size_t>(y - y0) * row_bytes);
  }
  out.frame_index = src.frame_index;
  out.timestamp_ms = src.timestamp_ms;
  return out;
}

Frame resize_bilinear(const Frame& src, int width, int height) {
  if (width < 1 || height < 1) throw InvalidArgument("resize target must be >= 1");
  if (width == src.width() && height == src.height()) return src;

  const int c = src.channels();
  Frame out(width, height, c);
  out.frame_index = src.frame_index;
  out.timestamp_ms = src.timestamp_ms;
  const double sx = static_cast<double>(src.width()) / width;
  const double sy = static_cast<double>(src.height()) / height;

  for (int y = 0; y < height; ++y) {
    const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, src.height() - 1.0);
    const int y0 = static_cast<int>(fy);
    const int y1 = std::min(y0 + 1, src.height() - 1);
    const double wy = fy - y0;
    for (int x = 0; x < width; ++x) {
      const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, src.width() - 1.0);
      const int x0 = static_cast<int>(fx);
      const int x1 = std::min(x0 + 1, src.width() - 1);
      const double wx = fx - x0;
      for (int ch = 0; ch < c; ++ch) {
        const double top = (1 - wx) * src.at(x0, y0, ch) + wx * src.at(x1, y0, ch);
        const double bottom = (1 - wx) * src.at(x0, y1, ch) + wx * src.at(x1, y1, ch);
        const double v = (1 - wy) * top + wy * bottom;
        out.at(x, y, ch) = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
      }
    }
  }
  return out;
}

RoiCrop crop_and_resize(const Frame& frame, const AxisAlignedBox& region, int max_side) {
  if (max_side < 32) throw InvalidArgument("max_side must be >= 32");
  const auto clipped = clip_box(region, frame.width(), frame.height());
  const int x0 = static_cast<int>(std::floor(clipped.x_min));
  const int y0 = static_cast<int>(std::floor(clipped.y_min));
  const int x1 = static_cast<int>(std::ceil(clipped.x_max));
  const int y1 = static_cast<int>(std::ceil(clipped.y_max));
  const int crop_w = x1 - x0;
  const int crop_h = y1 - y0;

  int target_w = crop_w;
  int target_h = crop_h;
  if (std::max(crop_w, crop_h) > max_side) {
    const double k = static_cast<double>(max_side) / std::max(crop_w, crop_h);
    target_w = std::max(1, static_cast<int>(std::floor(crop_w * k)));
    target_h = std::max(1, static_cast<int>(std::floor(crop_h * k)));
  }
  const auto [w32, h32] = size_to_multiple_of_32(target_w, target_h);

  RoiCrop out;
  out.region = {double(x0), double(y0), double(x1), double(y1)};
  out.pixels = resize_bilinear(crop_pixels(frame, x0, y0, x1, y1), w32, h32);
  out.scale_x = static_cast<double>(crop_w) / w32;
  out.scale_y = static_cast<double>(crop_h) / h32;
  return out;
}

Point2 region_to_frame(const Point2& pt, const RoiCrop& crop) {
  return {crop.region.x_min + pt.x() * crop.scale_x, crop.region.y_min + pt.y() * crop.scale_y};
}

AxisAlignedBox region_to_frame(const AxisAlignedBox& box, const RoiCrop& crop) {
  const auto lo = region_to_frame(Point2(box.x_min, box.y_min), crop);
  const auto hi = region_to_frame(Point2(box.x_max, box.y_max), crop);
  return {lo.x(), lo.y(), hi.x(), hi.y()};
}

Corners region_to_frame(const Corners& corners, const RoiCrop& crop) {
  Corners out = corners.array().colwise() * Eigen::Array2d(crop.scale_x, crop.scale_y);
  out.colwise() += Point2(crop.region.x_min, crop.region.y_min);
  return out;
}

Point2 frame_to_region(const Point2& pt, const RoiCrop& crop) {
  return {(pt.x() - crop.region.x_min) / crop.scale_x, (pt.y() - crop.region.y_min) / crop.scale_y};
}

}  // namespace swapread
