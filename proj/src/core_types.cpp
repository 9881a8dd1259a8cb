#include "swapread/core_types.hpp"

#include "swapread/errors.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace swapread {

Frame::Frame(int width, int height, int channels, std::uint8_t fill)
    : Frame(width, height, channels,
            std::vector<std::uint8_t>(
                static_cast<std::size_t>(std::max(width, 0)) * std::max(height, 0) *
                    std::max(channels, 0),
                fill)) {}

Frame::Frame(int width, int height, int channels, std::vector<std::uint8_t> pixels)
    : width_(width), height_(height), channels_(channels), pixels_(std::move(pixels)) {
  if (width < 1 || height < 1) throw InvalidArgument("frame dimensions must be >= 1");
  if (channels != 1 && channels != 3) throw InvalidArgument("frame must have 1 or 3 channels");
  if (pixels_.size() != static_cast<std::size_t>(width) * height * channels)
    throw InvalidArgument("frame buffer length does not match dimensions");
}

AxisAlignedBox intersect(const AxisAlignedBox& a, const AxisAlignedBox& b) {
  return {std::max(a.x_min, b.x_min), std::max(a.y_min, b.y_min), std::min(a.x_max, b.x_max),
          std::min(a.y_max, b.y_max)};
}

double iou(const AxisAlignedBox& a, const AxisAlignedBox& b) {
  const auto i = intersect(a, b);
  if (!i.valid()) return 0.0;
  const double inter = i.area();
  const double uni = a.area() + b.area() - inter;
  return uni > 0 ? std::clamp(inter / uni, 0.0, 1.0) : 0.0;
}

AxisAlignedBox clip_box(const AxisAlignedBox& b, double frame_w, double frame_h) {
  if (frame_w < 1 || frame_h < 1) throw InvalidArgument("frame size must be >= 1");
  AxisAlignedBox out{std::clamp(b.x_min, 0.0, frame_w), std::clamp(b.y_min, 0.0, frame_h),
                     std::clamp(b.x_max, 0.0, frame_w), std::clamp(b.y_max, 0.0, frame_h)};
  if (!out.valid()) throw EmptyBox("box lies outside the frame after clipping");
  return out;
}

Corners rotated_to_corners(const RotatedBox& r) {
  const double hw = r.width / 2;
  const double hh = r.height / 2;
  Corners local;
  local << -hw, -hw, hw, hw,
           -hh, hh, hh, -hh;
  const Eigen::Matrix2d rot = Eigen::Rotation2Dd(r.angle).toRotationMatrix();
  Corners out = rot * local;
  out.colwise() += Point2(r.center_x, r.center_y);
  return out;
}

RotatedBox corners_to_rotated(const Corners& corners) {
  const Point2 center = corners.rowwise().mean();
  const Point2 top = corners.col(3) - corners.col(0);
  const Point2 side = corners.col(1) - corners.col(0);
  return {center.x(), center.y(), top.norm(), side.norm(), std::atan2(top.y(), top.x())};
}

AxisAlignedBox envelope(const Corners& corners) {
  const Point2 lo = corners.rowwise().minCoeff();
  const Point2 hi = corners.rowwise().maxCoeff();
  return {lo.x(), lo.y(), hi.x(), hi.y()};
}

double normalize_box_angle(double angle) {
  constexpr double pi = std::numbers::pi;
  double a = std::remainder(angle, pi);  // [-pi/2, pi/2]
  if (a <= -pi / 2) a += pi;
  return a;
}

}  // namespace swapread
