#pragma once

#include "swapread/core_types.hpp"

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace swapread {

enum class EngineMode { kLstmOnly };
enum class SegmentationMode { kSingleLine };

/// Recognition settings handed to the OCR engine. The defaults are the ones the
/// pipeline is tuned for: English, LSTM-only engine, single text line.
struct OcrConfig {
  std::string language = "eng";
  EngineMode engine_mode = EngineMode::kLstmOnly;
  SegmentationMode segmentation_mode = SegmentationMode::kSingleLine;
  double padding_ratio = 0.05;  // per side, in [0, 0.5]

  void validate() const;
  friend bool operator==(const OcrConfig&, const OcrConfig&) = default;
};

std::string to_string(EngineMode mode);
std::string to_string(SegmentationMode mode);
EngineMode engine_mode_from_string(const std::string& s);
SegmentationMode segmentation_mode_from_string(const std::string& s);

struct OcrResult {
  std::string text;
  double confidence = 0;  // [0,1]
};

/// Grayscale line crop plus where it came from in the source frame.
struct OcrRequest {
  Frame gray;
  AxisAlignedBox source_region;
};

/// OCR engine adapter. Adapters own the normalisation of native confidences to [0,1].
/// Not thread-safe; use one instance per worker.
class OcrEngine {
 public:
  virtual ~OcrEngine() = default;
  virtual std::string name() const = 0;
  virtual OcrResult read_line(const OcrRequest& request, const OcrConfig& cfg) = 0;
};

/// Scripted OCR keyed by frame index. An entry with a box answers the request whose
/// source region overlaps it most; an entry without a box answers any request.
class StubOcr final : public OcrEngine {
 public:
  void script(std::size_t frame_index, OcrResult result,
              std::optional<AxisAlignedBox> where = std::nullopt);
  void fail_on(std::size_t frame_index);

  std::string name() const override { return "stub-ocr"; }
  OcrResult read_line(const OcrRequest& request, const OcrConfig& cfg) override;

 private:
  struct Entry {
    std::optional<AxisAlignedBox> where;
    OcrResult result;
  };
  std::map<std::size_t, std::vector<Entry>> script_;
  std::map<std::size_t, bool> failing_;
};

// Pads `region` by cfg.padding_ratio per side (clipped to the frame), converts the
// crop to grayscale and asks the engine. Confidence is clamped into [0,1].
OcrResult recognize(OcrEngine& engine, const Frame& frame, const AxisAlignedBox& region,
                    const OcrConfig& cfg);

Frame to_grayscale(const Frame& frame);

/// Accepted code shape: one of `prefixes` followed by min_digits..max_digits digits.
struct IluPattern {
  std::vector<std::string> prefixes{"SJSB", "SCSB"};
  int min_digits = 4;
  int max_digits = 7;
  // Optional extra validation (e.g. a check digit); empty accepts everything.
  std::function<bool(std::string_view prefix, std::string_view digits)> check;

  void validate() const;
};

struct IluCodeReading {
  std::string prefix;
  std::string digits;
  std::string raw_text;
  double confidence = 0;
  std::size_t frame_index = 0;
  AxisAlignedBox region;

  std::string code() const { return prefix + digits; }
};

enum class RejectReason { kLowConfidence, kNoPrefix, kCheckFailed };
std::string to_string(RejectReason reason);

struct ParseOutcome {
  std::optional<IluCodeReading> reading;
  std::optional<RejectReason> rejection;

  bool accepted() const noexcept { return reading.has_value(); }
};

struct ReadingContext {
  std::size_t frame_index = 0;
  AxisAlignedBox region;
};

inline constexpr double kDefaultOcrMinConfidence = 0.99;

// Uppercases, drops everything but [A-Z0-9], then maps S/O/I/B/Z to 5/0/1/8/2 in
// the digit positions following the first prefix occurrence.
std::string normalize_confusions(std::string_view raw, const IluPattern& pattern = {});

ParseOutcome parse_ilu(const OcrResult& result, double min_conf = kDefaultOcrMinConfidence,
                       const IluPattern& pattern = {}, const ReadingContext& ctx = {});

}  // namespace swapread
