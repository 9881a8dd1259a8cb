#pragma once

#include "swapread/core_types.hpp"
#include "swapread/detection.hpp"
#include "swapread/ocr_ilu.hpp"
#include "swapread/roi_gating.hpp"
#include "swapread/text_detect.hpp"

#include <deque>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace swapread {

/// Every threshold the image and video pipelines use, housed once.
struct PipelineConfig {
  double det_score_threshold = 0.5;
  double det_nms_iou = 0.5;
  double aspect_min_ratio = kDefaultAspectMinRatio;
  double text_score_threshold = 0.5;
  double text_nms_iou = 0.4;
  double ocr_min_confidence = kDefaultOcrMinConfidence;
  OcrConfig ocr;
  IluPattern ilu_pattern;
  int window_n = 10;
  int require_k = 3;
  int max_text_input_side = kDefaultMaxTextInputSide;

  void validate() const;
};

std::vector<TextRegion> detect_text(TextDetectorBackend& backend, const RoiCrop& crop,
                                    const PipelineConfig& cfg);

struct Backends {
  DetectorBackend& detector;
  TextDetectorBackend& text;
  OcrEngine& ocr;
};

struct StageFailure {
  std::string stage;
  std::string message;
};

struct FrameReport {
  std::size_t frame_index = 0;
  std::string source;  // file name or stream id, may be empty
  std::vector<Detection> detections;
  std::size_t gated_out = 0;
  std::size_t text_regions = 0;
  std::vector<IluCodeReading> readings;
  std::optional<IluCodeReading> accepted_code;
  std::vector<StageFailure> errors;
};

/// k-of-n vote over the best reading of the last n frames.
class TemporalAggregator {
 public:
  TemporalAggregator(int window_n, int require_k);

  // Pushes one frame's best reading (or nothing). Returns the reading that completes
  // require_k occurrences of its code inside the window; the window is cleared then.
  std::optional<IluCodeReading> update(std::optional<IluCodeReading> reading);

  std::size_t window_size() const noexcept { return window_.size(); }
  int window_n() const noexcept { return window_n_; }
  int require_k() const noexcept { return require_k_; }

 private:
  int window_n_;
  int require_k_;
  std::deque<std::optional<IluCodeReading>> window_;
};

inline std::optional<IluCodeReading> aggregator_update(TemporalAggregator& agg,
                                                       std::optional<IluCodeReading> reading) {
  return agg.update(std::move(reading));
}

// Runs the whole image path. A failure in the detector stage throws StageError;
// failures while handling one detection are recorded in `errors` and the remaining
// detections still run.
FrameReport process_image(const Frame& frame, Backends backends, const PipelineConfig& cfg);

class FrameSource {
 public:
  virtual ~FrameSource() = default;
  // Next frame, or nullopt at end of stream.
  virtual std::optional<Frame> next() = 0;
  // Optional label for the frame just returned (e.g. its file name).
  virtual std::string current_source() const { return {}; }
};

class VectorFrameSource final : public FrameSource {
 public:
  explicit VectorFrameSource(std::vector<Frame> frames, std::vector<std::string> names = {});
  std::optional<Frame> next() override;
  std::string current_source() const override;

 private:
  std::vector<Frame> frames_;
  std::vector<std::string> names_;
  std::size_t pos_ = 0;
};

struct AcceptedCode {
  IluCodeReading reading;
  std::size_t first_frame = 0;
};

struct VideoSummary {
  std::size_t frames = 0;
  std::vector<AcceptedCode> codes;  // distinct codes in acceptance order
};

struct VideoResult {
  std::vector<FrameReport> reports;
  VideoSummary summary;
};

using ReportSink = std::function<void(const FrameReport&)>;

VideoResult process_video(FrameSource& source, Backends backends, const PipelineConfig& cfg,
                          const ReportSink& sink = {});
VideoResult process_video(const std::vector<Frame>& frames, Backends backends,
                          const PipelineConfig& cfg, const ReportSink& sink = {});

}  // namespace swapread
