#pragma once

// Adapters for real inference runtimes. None of them is needed by the test suite;
// each fails at construction when its model or binary is missing.

#include "swapread/detection.hpp"
#include "swapread/ocr_ilu.hpp"
#include "swapread/text_detect.hpp"

#include <filesystem>
#include <memory>
#include <string>

namespace swapread::io {

/// SSD-style frozen detection graph run through OpenCV's dnn module. Output rows are
/// [image_id, class_id, score, x1, y1, x2, y2] with normalised coordinates; class ids
/// are resolved through the label map.
class OpenCvSsdDetector final : public DetectorBackend {
 public:
  OpenCvSsdDetector(const std::filesystem::path& model, const std::filesystem::path& config,
                    LabelMap labels, int input_width = 300, int input_height = 300);
  ~OpenCvSsdDetector() override;

  std::string name() const override { return "opencv-ssd"; }
  std::optional<std::pair<int, int>> expected_input() const override;
  const LabelMap& label_map() const override { return labels_; }
  std::vector<Detection> run(const Frame& frame) override;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  LabelMap labels_;
};

/// EAST frozen graph run through OpenCV's dnn module.
class OpenCvEastDetector final : public TextDetectorBackend {
 public:
  explicit OpenCvEastDetector(const std::filesystem::path& model);
  ~OpenCvEastDetector() override;

  std::string name() const override { return "opencv-east"; }
  EastMaps run(const RoiCrop& crop) override;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Runs the `tesseract` executable with `-l <lang> --oem 1 --psm 7` and reads its TSV
/// output. Confidence is the character-weighted mean word confidence divided by 100.
class TesseractCliEngine final : public OcrEngine {
 public:
  // Throws EngineUnavailable when the executable cannot be run.
  explicit TesseractCliEngine(std::string executable = "tesseract");

  static bool available(const std::string& executable = "tesseract");

  std::string name() const override { return "tesseract"; }
  OcrResult read_line(const OcrRequest& request, const OcrConfig& cfg) override;

 private:
  std::string executable_;
};

// Exposed for testing: parses tesseract TSV output into a normalised result.
OcrResult parse_tesseract_tsv(const std::string& tsv);

}  // namespace swapread::io
