#include "swapread/ocr_ilu.hpp"

#include "swapread/errors.hpp"
#include "swapread/roi_gating.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

namespace swapread {

void OcrConfig::validate() const {
  if (language.empty()) throw InvalidArgument("ocr language must be non-empty");
  if (!(padding_ratio >= 0.0 && padding_ratio <= 0.5))
    throw InvalidArgument("ocr padding_ratio must be in [0, 0.5]");
}

std::string to_string(EngineMode) { return "LSTM_ONLY"; }
std::string to_string(SegmentationMode) { return "SINGLE_LINE"; }

EngineMode engine_mode_from_string(const std::string& s) {
  if (s == "LSTM_ONLY") return EngineMode::kLstmOnly;
  throw InvalidArgument("unknown engine_mode '" + s + "'");
}

SegmentationMode segmentation_mode_from_string(const std::string& s) {
  if (s == "SINGLE_LINE") return SegmentationMode::kSingleLine;
  throw InvalidArgument("unknown segmentation_mode '" + s + "'");
}

std::string to_string(RejectReason reason) {
  switch (reason) {
    case RejectReason::kLowConfidence: return "LowConfidence";
    case RejectReason::kNoPrefix: return "NoPrefix";
    case RejectReason::kCheckFailed: return "CheckFailed";
  }
  return "Unknown";
}

void StubOcr::script(std::size_t frame_index, OcrResult result, std::optional<AxisAlignedBox> where) {
  script_[frame_index].push_back({where, std::move(result)});
}

void StubOcr::fail_on(std::size_t frame_index) { failing_[frame_index] = true; }

OcrResult StubOcr::read_line(const OcrRequest& request, const OcrConfig&) {
  const auto index = request.gray.frame_index;
  if (failing_.contains(index))
    throw EngineFailure("scripted OCR failure at frame " + std::to_string(index));
  auto it = script_.find(index);
  if (it == script_.end()) return {};

  const Entry* best = nullptr;
  double best_overlap = 0;
  for (const auto& entry : it->second) {
    if (!entry.where) {
      if (!best) best = &entry;
      continue;
    }
    const double overlap = iou(*entry.where, request.source_region);
    if (overlap > best_overlap) {
      best_overlap = overlap;
      best = &entry;
    }
  }
  return best ? best->result : OcrResult{};
}

Frame to_grayscale(const Frame& frame) {
  if (frame.channels() == 1) return frame;
  Frame out(frame.width(), frame.height(), 1);
  out.frame_index = frame.frame_index;
  out.timestamp_ms = frame.timestamp_ms;
  for (int y = 0; y < frame.height(); ++y)
    for (int x = 0; x < frame.width(); ++x) {
      const double v =
          0.299 * frame.at(x, y, 0) + 0.587 * frame.at(x, y, 1) + 0.114 * frame.at(x, y, 2);
      out.at(x, y) = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
    }
  return out;
}

OcrResult recognize(OcrEngine& engine, const Frame& frame, const AxisAlignedBox& region,
                    const OcrConfig& cfg) {
  cfg.validate();
  if (!region.valid()) throw InvalidArgument("OCR region is empty");
  const double pad_x = region.width() * cfg.padding_ratio;
  const double pad_y = region.height() * cfg.padding_ratio;
  const auto padded = clip_box({region.x_min - pad_x, region.y_min - pad_y, region.x_max + pad_x,
                                region.y_max + pad_y},
                               frame.width(), frame.height());
  const int x0 = static_cast<int>(std::floor(padded.x_min));
  const int y0 = static_cast<int>(std::floor(padded.y_min));
  const int x1 = static_cast<int>(std::ceil(padded.x_max));
  const int y1 = static_cast<int>(std::ceil(padded.y_max));

  OcrRequest request{to_grayscale(crop_pixels(frame, x0, y0, x1, y1)),
                     {double(x0), double(y0), double(x1), double(y1)}};
  OcrResult result;
  try {
    result = engine.read_line(request, cfg);
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw EngineFailure(engine.name() + ": " + e.what());
  }
  if (std::isnan(result.confidence)) result.confidence = 0;
  result.confidence = std::clamp(result.confidence, 0.0, 1.0);
  return result;
}

void IluPattern::validate() const {
  if (prefixes.empty()) throw InvalidArgument("ILU pattern needs at least one prefix");
  for (const auto& p : prefixes) {
    if (p.empty()) throw InvalidArgument("ILU prefix must be non-empty");
    for (char c : p)
      if (!std::isupper(static_cast<unsigned char>(c)) && !std::isdigit(static_cast<unsigned char>(c)))
        throw InvalidArgument("ILU prefix must be uppercase alphanumeric: " + p);
  }
  if (min_digits < 1 || max_digits < min_digits)
    throw InvalidArgument("ILU digit bounds must satisfy 1 <= min <= max");
}

namespace {

std::string clean(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  for (char c : raw) {
    const auto u = static_cast<unsigned char>(c);
    if (std::isalnum(u) && u < 0x80) out.push_back(static_cast<char>(std::toupper(u)));
  }
  return out;
}

// Leftmost prefix occurrence; ties go to the earlier prefix in the list.
std::optional<std::pair<std::size_t, std::size_t>> find_prefix(const std::string& s,
                                                               const IluPattern& pattern,
                                                               std::size_t from = 0) {
  std::optional<std::pair<std::size_t, std::size_t>> best;
  for (std::size_t i = 0; i < pattern.prefixes.size(); ++i) {
    const auto pos = s.find(pattern.prefixes[i], from);
    if (pos != std::string::npos && (!best || pos < best->first)) best = {{pos, i}};
  }
  return best;
}

char unconfuse(char c) {
  switch (c) {
    case 'S': return '5';
    case 'O': return '0';
    case 'I': return '1';
    case 'B': return '8';
    case 'Z': return '2';
    default: return c;
  }
}

}  // namespace

std::string normalize_confusions(std::string_view raw, const IluPattern& pattern) {
  std::string s = clean(raw);
  const auto hit = find_prefix(s, pattern);
  if (!hit) return s;
  const std::size_t begin = hit->first + pattern.prefixes[hit->second].size();
  const std::size_t end = std::min(s.size(), begin + static_cast<std::size_t>(pattern.max_digits));
  for (std::size_t i = begin; i < end; ++i) s[i] = unconfuse(s[i]);
  return s;
}

ParseOutcome parse_ilu(const OcrResult& result, double min_conf, const IluPattern& pattern,
                       const ReadingContext& ctx) {
  if (!(min_conf >= 0.0 && min_conf <= 1.0)) throw InvalidArgument("min_conf must be in [0,1]");
  pattern.validate();

  ParseOutcome out;
  if (!(result.confidence >= min_conf)) {
    out.rejection = RejectReason::kLowConfidence;
    return out;
  }

  const std::string s = normalize_confusions(result.text, pattern);
  for (std::size_t i = 0; i < s.size(); ++i) {
    for (const auto& prefix : pattern.prefixes) {
      if (s.compare(i, prefix.size(), prefix) != 0) continue;
      const std::size_t start = i + prefix.size();
      std::size_t n = 0;
      while (start + n < s.size() && n < static_cast<std::size_t>(pattern.max_digits) &&
             std::isdigit(static_cast<unsigned char>(s[start + n])))
        ++n;
      if (n < static_cast<std::size_t>(pattern.min_digits)) continue;

      const std::string digits = s.substr(start, n);
      if (pattern.check && !pattern.check(prefix, digits)) {
        out.rejection = RejectReason::kCheckFailed;
        return out;
      }
      out.reading = IluCodeReading{prefix, digits, result.text, result.confidence,
                                   ctx.frame_index, ctx.region};
      return out;
    }
  }
  out.rejection = RejectReason::kNoPrefix;
  return out;
}

}  // namespace swapread
