#include "swapread/pipeline.hpp"

#include "swapread/errors.hpp"

#include <algorithm>

namespace swapread {

namespace {

void require_unit(double v, const char* name) {
  if (!(v >= 0.0 && v <= 1.0)) throw InvalidArgument(std::string(name) + " must be in [0,1]");
}

}  // namespace

void PipelineConfig::validate() const {
  require_unit(det_score_threshold, "det_score_threshold");
  require_unit(det_nms_iou, "det_nms_iou");
  require_unit(text_score_threshold, "text_score_threshold");
  require_unit(text_nms_iou, "text_nms_iou");
  require_unit(ocr_min_confidence, "ocr_min_confidence");
  if (!(aspect_min_ratio > 0)) throw InvalidArgument("aspect_min_ratio must be positive");
  if (window_n < 1 || require_k < 1 || require_k > window_n)
    throw InvalidArgument("need 1 <= require_k <= window_n");
  if (max_text_input_side < 32) throw InvalidArgument("max_text_input_side must be >= 32");
  ocr.validate();
  ilu_pattern.validate();
}

std::vector<TextRegion> detect_text(TextDetectorBackend& backend, const RoiCrop& crop,
                                    const PipelineConfig& cfg) {
  return detect_text(backend, crop, cfg.text_score_threshold, cfg.text_nms_iou);
}

TemporalAggregator::TemporalAggregator(int window_n, int require_k)
    : window_n_(window_n), require_k_(require_k) {
  if (window_n < 1 || require_k < 1 || require_k > window_n)
    throw InvalidArgument("need 1 <= require_k <= window_n");
}

std::optional<IluCodeReading> TemporalAggregator::update(std::optional<IluCodeReading> reading) {
  window_.push_back(reading);
  while (window_.size() > static_cast<std::size_t>(window_n_)) window_.pop_front();
  if (!reading) return std::nullopt;

  const auto code = reading->code();
  const auto hits = std::count_if(window_.begin(), window_.end(), [&](const auto& r) {
    return r && r->code() == code;
  });
  if (hits < require_k_) return std::nullopt;
  window_.clear();
  return reading;
}

FrameReport process_image(const Frame& frame, Backends backends, const PipelineConfig& cfg) {
  cfg.validate();
  FrameReport report;
  report.frame_index = frame.frame_index;

  std::vector<Detection> dets;
  try {
    dets = infer(backends.detector, frame);
  } catch (const Error& e) {
    throw StageError("detect", e.what());
  }
  dets = greedy_nms(filter_by_score(dets, cfg.det_score_threshold), cfg.det_nms_iou);
  report.detections = dets;

  for (const auto& det : dets) {
    if (!aspect_gate(det.box, cfg.aspect_min_ratio).pass) {
      ++report.gated_out;
      continue;
    }

    std::string stage = "crop";
    try {
      const auto crop = crop_and_resize(frame, lower_half(det.box), cfg.max_text_input_side);
      stage = "text";
      const auto regions = detect_text(backends.text, crop, cfg);
      report.text_regions += regions.size();

      stage = "ocr";
      for (const auto& region : regions) {
        const auto result = recognize(backends.ocr, frame, region.envelope, cfg.ocr);
        auto parsed = parse_ilu(result, cfg.ocr_min_confidence, cfg.ilu_pattern,
                                {frame.frame_index, region.envelope});
        if (parsed.reading) report.readings.push_back(std::move(*parsed.reading));
      }
    } catch (const Error& e) {
      report.errors.push_back({stage, e.what()});
    }
  }

  std::stable_sort(report.readings.begin(), report.readings.end(),
                   [](const IluCodeReading& a, const IluCodeReading& b) {
                     return a.confidence > b.confidence;
                   });
  return report;
}

VectorFrameSource::VectorFrameSource(std::vector<Frame> frames, std::vector<std::string> names)
    : frames_(std::move(frames)), names_(std::move(names)) {}

std::optional<Frame> VectorFrameSource::next() {
  if (pos_ >= frames_.size()) return std::nullopt;
  return frames_[pos_++];
}

std::string VectorFrameSource::current_source() const {
  if (pos_ == 0 || pos_ > names_.size()) return {};
  return names_[pos_ - 1];
}

VideoResult process_video(FrameSource& source, Backends backends, const PipelineConfig& cfg,
                          const ReportSink& sink) {
  cfg.validate();
  TemporalAggregator agg(cfg.window_n, cfg.require_k);
  VideoResult result;

  while (true) {
    std::optional<Frame> frame;
    FrameReport report;
    try {
      frame = source.next();
      if (!frame) break;
      report = process_image(*frame, backends, cfg);
    } catch (const StageError& e) {
      report = FrameReport{};
      report.frame_index = frame ? frame->frame_index : result.reports.size();
      report.errors.push_back({e.stage(), e.what()});
    } catch (const Error& e) {
      if (!frame) throw;
      report = FrameReport{};
      report.frame_index = frame->frame_index;
      report.errors.push_back({"pipeline", e.what()});
    }
    report.source = source.current_source();

    std::optional<IluCodeReading> best;
    if (!report.readings.empty()) best = report.readings.front();
    if (auto fired = agg.update(best)) {
      report.accepted_code = fired;
      const auto code = fired->code();
      const bool seen = std::any_of(result.summary.codes.begin(), result.summary.codes.end(),
                                    [&](const AcceptedCode& c) { return c.reading.code() == code; });
      if (!seen) result.summary.codes.push_back({*fired, report.frame_index});
    }

    if (sink) sink(report);
    result.reports.push_back(std::move(report));
  }
  result.summary.frames = result.reports.size();
  return result;
}

VideoResult process_video(const std::vector<Frame>& frames, Backends backends,
                          const PipelineConfig& cfg, const ReportSink& sink) {
  VectorFrameSource source(frames);
  return process_video(source, backends, cfg, sink);
}

}  // namespace swapread
