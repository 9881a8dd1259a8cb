#include "swapread/text_detect.hpp"

#include "swapread/errors.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace swapread {

EastMaps::EastMaps(int rows, int cols, int stride_) : stride(stride_) {
  score = Eigen::ArrayXXf::Zero(rows, cols);
  for (auto& g : geometry) g = Eigen::ArrayXXf::Zero(rows, cols);
}

void EastMaps::validate() const {
  if (stride < 1) throw MapShapeError("stride must be >= 1");
  for (const auto& g : geometry)
    if (g.rows() != score.rows() || g.cols() != score.cols())
      throw MapShapeError("geometry and score map dimensions disagree");
  if (score.size() > 0 && (score.minCoeff() < 0.0f || score.maxCoeff() > 1.0f))
    throw MapShapeError("score map values outside [0,1]");
  for (int ch = kTop; ch <= kLeft; ++ch)
    if (geometry[ch].size() > 0 && geometry[ch].minCoeff() < 0.0f)
      throw MapShapeError("negative edge distance in geometry map");
}

std::vector<TextCandidate> decode_east(const EastMaps& maps, double score_threshold) {
  if (!(score_threshold >= 0.0 && score_threshold <= 1.0))
    throw InvalidArgument("score_threshold must be in [0,1]");
  maps.validate();

  std::vector<TextCandidate> out;
  for (int row = 0; row < maps.rows(); ++row) {
    for (int col = 0; col < maps.cols(); ++col) {
      const double s = maps.score(row, col);
      if (s < score_threshold) continue;
      const double top = maps.geometry[EastMaps::kTop](row, col);
      const double right = maps.geometry[EastMaps::kRight](row, col);
      const double bottom = maps.geometry[EastMaps::kBottom](row, col);
      const double left = maps.geometry[EastMaps::kLeft](row, col);
      const double angle = maps.geometry[EastMaps::kAngle](row, col);
      const double width = left + right;
      const double height = top + bottom;
      if (width <= 0 || height <= 0) continue;

      const Point2 anchor(double(maps.stride) * col, double(maps.stride) * row);
      const Point2 center = anchor + Eigen::Rotation2Dd(angle) *
                                         Point2((right - left) / 2, (bottom - top) / 2);
      out.push_back({{center.x(), center.y(), width, height, normalize_box_angle(angle)}, s});
    }
  }
  return out;
}

std::vector<TextCandidate> suppress_text(const std::vector<TextCandidate>& cands,
                                         double iou_threshold) {
  if (!(iou_threshold >= 0.0 && iou_threshold <= 1.0))
    throw InvalidArgument("iou_threshold must be in [0,1]");

  std::vector<AxisAlignedBox> env;
  env.reserve(cands.size());
  for (const auto& c : cands) env.push_back(envelope(rotated_to_corners(c.box)));

  std::vector<std::size_t> order(cands.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    if (cands[i].score != cands[j].score) return cands[i].score > cands[j].score;
    if (env[i].x_min != env[j].x_min) return env[i].x_min < env[j].x_min;
    return env[i].y_min < env[j].y_min;
  });

  std::vector<std::size_t> kept;
  for (std::size_t i : order) {
    const bool suppressed = std::any_of(kept.begin(), kept.end(), [&](std::size_t k) {
      return iou(env[k], env[i]) >= iou_threshold;
    });
    if (!suppressed) kept.push_back(i);
  }

  std::vector<TextCandidate> out;
  out.reserve(kept.size());
  for (std::size_t i : kept) out.push_back(cands[i]);
  return out;
}

std::vector<TextRegion> detect_text(TextDetectorBackend& backend, const RoiCrop& crop,
                                    double score_threshold, double nms_iou) {
  const int w = crop.pixels.width();
  const int h = crop.pixels.height();
  if (w % 32 != 0 || h % 32 != 0)
    throw InputShapeError("text detector input must be a multiple of 32 on each side");

  EastMaps maps;
  try {
    maps = backend.run(crop);
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw BackendFailure(backend.name() + ": " + e.what());
  }
  maps.validate();
  if (maps.cols() * maps.stride != w || maps.rows() * maps.stride != h)
    throw MapShapeError("map dimensions do not cover the " + std::to_string(w) + "x" +
                        std::to_string(h) + " input at stride " + std::to_string(maps.stride));

  const auto kept = suppress_text(decode_east(maps, score_threshold), nms_iou);

  std::vector<TextRegion> out;
  for (const auto& cand : kept) {
    TextRegion region;
    region.rbox = cand.box;
    region.score = cand.score;
    region.quad = region_to_frame(rotated_to_corners(cand.box), crop);
    region.envelope = intersect(envelope(region.quad), crop.region);
    if (!region.envelope.valid()) continue;
    out.push_back(std::move(region));
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const TextRegion& a, const TextRegion& b) { return a.score > b.score; });
  return out;
}

void StubTextDetector::script_regions(std::size_t frame_index, std::vector<ScriptedRegion> regions) {
  regions_[frame_index] = std::move(regions);
}

void StubTextDetector::script_maps(std::size_t frame_index, EastMaps maps) {
  maps_[frame_index] = std::move(maps);
}

void StubTextDetector::fail_on(std::size_t frame_index) { failing_[frame_index] = true; }

EastMaps StubTextDetector::run(const RoiCrop& crop) {
  const auto index = crop.pixels.frame_index;
  if (failing_.contains(index))
    throw BackendFailure("scripted text-detector failure at frame " + std::to_string(index));
  if (auto it = maps_.find(index); it != maps_.end()) return it->second;

  const int rows = crop.pixels.height() / kEastStride;
  const int cols = crop.pixels.width() / kEastStride;
  EastMaps maps(rows, cols);
  auto it = regions_.find(index);
  if (it == regions_.end()) return maps;

  for (const auto& scripted : it->second) {
    const auto& fb = scripted.frame_box;
    const Point2 center = frame_to_region(Point2(fb.center_x, fb.center_y), crop);
    const double width = fb.width / crop.scale_x;
    const double height = fb.height / crop.scale_y;
    const int col = static_cast<int>(std::lround(center.x() / kEastStride));
    const int row = static_cast<int>(std::lround(center.y() / kEastStride));
    if (col < 0 || row < 0 || col >= cols || row >= rows) continue;

    const Point2 anchor(double(kEastStride) * col, double(kEastStride) * row);
    const Point2 local = Eigen::Rotation2Dd(-fb.angle) * (center - anchor);
    const double right = width / 2 + local.x();
    const double left = width / 2 - local.x();
    const double bottom = height / 2 + local.y();
    const double top = height / 2 - local.y();
    if (right < 0 || left < 0 || bottom < 0 || top < 0)
      throw InvalidArgument("scripted text region too small to anchor on the stride grid");

    maps.score(row, col) = static_cast<float>(scripted.score);
    maps.geometry[EastMaps::kTop](row, col) = static_cast<float>(top);
    maps.geometry[EastMaps::kRight](row, col) = static_cast<float>(right);
    maps.geometry[EastMaps::kBottom](row, col) = static_cast<float>(bottom);
    maps.geometry[EastMaps::kLeft](row, col) = static_cast<float>(left);
    maps.geometry[EastMaps::kAngle](row, col) = static_cast<float>(fb.angle);
  }
  return maps;
}

}  // namespace swapread
