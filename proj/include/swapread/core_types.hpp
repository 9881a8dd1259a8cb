#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace swapread {

using Point2 = Eigen::Vector2d;
// Four corner points stored column-wise.
using Corners = Eigen::Matrix<double, 2, 4>;

/// Interleaved 8-bit image (RGB when channels == 3) plus its position in a stream.
class Frame {
 public:
  Frame() = default;
  Frame(int width, int height, int channels, std::uint8_t fill = 0);
  Frame(int width, int height, int channels, std::vector<std::uint8_t> pixels);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  int channels() const noexcept { return channels_; }
  bool empty() const noexcept { return pixels_.empty(); }

  std::uint8_t& at(int x, int y, int c = 0) {
    return pixels_[(static_cast<std::size_t>(y) * width_ + x) * channels_ + c];
  }
  std::uint8_t at(int x, int y, int c = 0) const {
    return pixels_[(static_cast<std::size_t>(y) * width_ + x) * channels_ + c];
  }

  const std::vector<std::uint8_t>& pixels() const noexcept { return pixels_; }
  std::vector<std::uint8_t>& pixels() noexcept { return pixels_; }

  std::size_t frame_index = 0;
  std::optional<double> timestamp_ms;

  friend bool operator==(const Frame& a, const Frame& b) {
    return a.width_ == b.width_ && a.height_ == b.height_ &&
           a.channels_ == b.channels_ && a.pixels_ == b.pixels_;
  }

 private:
  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  std::vector<std::uint8_t> pixels_;
};

/// Half-open pixel rectangle, origin top-left, y down. Valid iff min < max on both axes.
struct AxisAlignedBox {
  double x_min = 0;
  double y_min = 0;
  double x_max = 0;
  double y_max = 0;

  double width() const noexcept { return x_max - x_min; }
  double height() const noexcept { return y_max - y_min; }
  double area() const noexcept { return width() * height(); }
  Point2 center() const { return {(x_min + x_max) / 2, (y_min + y_max) / 2}; }
  bool valid() const noexcept { return x_min < x_max && y_min < y_max; }
  bool contains(const AxisAlignedBox& other) const noexcept {
    return other.x_min >= x_min && other.y_min >= y_min && other.x_max <= x_max &&
           other.y_max <= y_max;
  }

  friend bool operator==(const AxisAlignedBox&, const AxisAlignedBox&) = default;
};

struct Detection {
  AxisAlignedBox box;
  std::string label;
  double score = 0;

  friend bool operator==(const Detection&, const Detection&) = default;
};

/// Rectangle of size width x height centred at (center_x, center_y), rotated by
/// `angle` radians in (-pi/2, pi/2] using the standard rotation matrix in pixel
/// coordinates.
struct RotatedBox {
  double center_x = 0;
  double center_y = 0;
  double width = 0;
  double height = 0;
  double angle = 0;

  friend bool operator==(const RotatedBox&, const RotatedBox&) = default;
};

double iou(const AxisAlignedBox& a, const AxisAlignedBox& b);

// Intersection of two boxes; may be invalid (empty) when they are disjoint.
AxisAlignedBox intersect(const AxisAlignedBox& a, const AxisAlignedBox& b);

// Throws EmptyBox when nothing of `b` survives inside [0,w]x[0,h].
AxisAlignedBox clip_box(const AxisAlignedBox& b, double frame_w, double frame_h);

// Corners start top-left (at angle 0) and run counter-clockwise in image
// coordinates: TL, BL, BR, TR.
Corners rotated_to_corners(const RotatedBox& r);

// Inverse of rotated_to_corners for corners in that order.
RotatedBox corners_to_rotated(const Corners& corners);

AxisAlignedBox envelope(const Corners& corners);

// Wraps an angle into (-pi/2, pi/2]; a rectangle rotated by pi is the same rectangle.
double normalize_box_angle(double angle);

}  // namespace swapread
