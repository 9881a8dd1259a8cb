#pragma once

#include "swapread/core_types.hpp"
#include "swapread/roi_gating.hpp"

#include <Eigen/Core>

#include <array>
#include <map>
#include <string>
#include <vector>

namespace swapread {

inline constexpr int kEastStride = 4;

/// Dense output of an EAST-style text detector in RBOX form.
///
/// `score(row, col)` is the text confidence of the cell whose anchor pixel is
/// (stride * col, stride * row) in detector-input coordinates. `geometry` holds,
/// per cell, the distances from the anchor to the top, right, bottom and left box
/// edges followed by the box angle in radians.
struct EastMaps {
  enum Channel { kTop = 0, kRight, kBottom, kLeft, kAngle };

  Eigen::ArrayXXf score;
  std::array<Eigen::ArrayXXf, 5> geometry;
  int stride = kEastStride;

  EastMaps() = default;
  EastMaps(int rows, int cols, int stride = kEastStride);

  int rows() const { return static_cast<int>(score.rows()); }
  int cols() const { return static_cast<int>(score.cols()); }

  // Throws MapShapeError on mismatched dimensions, scores outside [0,1] or
  // negative distances.
  void validate() const;
};

struct TextCandidate {
  RotatedBox box;  // detector-input coordinates
  double score = 0;
};

struct TextRegion {
  Corners quad;              // frame coordinates
  RotatedBox rbox;           // detector-input coordinates
  double score = 0;
  AxisAlignedBox envelope;   // frame coordinates, clipped to the crop region
};

/// Text detector contract. Receives the whole crop so that stubs can script in
/// frame coordinates; real backends only look at `crop.pixels`.
class TextDetectorBackend {
 public:
  virtual ~TextDetectorBackend() = default;
  virtual std::string name() const = 0;
  virtual EastMaps run(const RoiCrop& crop) = 0;
};

/// Scripted text detector keyed by frame index.
///
/// Region scripts are given in frame coordinates and painted into a single map cell
/// near the region centre, so they travel through the same decode path as real
/// model output. Rotated regions are exact only for isotropic crop scales.
class StubTextDetector final : public TextDetectorBackend {
 public:
  struct ScriptedRegion {
    RotatedBox frame_box;
    double score = 1.0;
  };

  void script_regions(std::size_t frame_index, std::vector<ScriptedRegion> regions);
  void script_maps(std::size_t frame_index, EastMaps maps);
  void fail_on(std::size_t frame_index);

  std::string name() const override { return "stub-text"; }
  EastMaps run(const RoiCrop& crop) override;

 private:
  std::map<std::size_t, std::vector<ScriptedRegion>> regions_;
  std::map<std::size_t, EastMaps> maps_;
  std::map<std::size_t, bool> failing_;
};

// One candidate per cell whose score is >= score_threshold, in row-major order.
std::vector<TextCandidate> decode_east(const EastMaps& maps, double score_threshold);

// Greedy NMS on the candidates' axis-aligned envelopes; same ordering rules as greedy_nms.
std::vector<TextCandidate> suppress_text(const std::vector<TextCandidate>& cands,
                                         double iou_threshold);

// backend -> decode -> suppress -> map to frame space, sorted by descending score.
std::vector<TextRegion> detect_text(TextDetectorBackend& backend, const RoiCrop& crop,
                                    double score_threshold, double nms_iou);

}  // namespace swapread
