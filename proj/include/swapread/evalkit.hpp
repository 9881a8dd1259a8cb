#pragma once

#include "swapread/core_types.hpp"

#include <filesystem>
#include <istream>
#include <map>
#include <string>
#include <vector>

namespace swapread {

struct LabeledBox {
  std::string label;
  AxisAlignedBox box;
};

// Keyed by image identifier (file name).
using GroundTruthSet = std::map<std::string, std::vector<LabeledBox>>;
using PredictionSet = std::map<std::string, std::vector<Detection>>;

struct MatchResult {
  std::vector<bool> pred_tp;        // input order
  std::vector<bool> truth_matched;  // input order
};

// Single image, single class. Predictions are visited by descending score (ties by
// smaller x_min, then y_min); each takes its best-IoU unmatched truth if that IoU is
// at least `iou_threshold`.
MatchResult match_detections(const std::vector<Detection>& preds,
                             const std::vector<AxisAlignedBox>& truths,
                             double iou_threshold = 0.5);

struct ScoredFlag {
  double score = 0;
  bool tp = false;
};

// All-points interpolated AP. Predictions sharing a score enter the curve together.
// Throws ZeroTruth when truth_count == 0.
double average_precision(std::vector<ScoredFlag> flags, std::size_t truth_count);

double mean_average_precision(const std::vector<double>& per_class_ap);

struct EvalReport {
  std::map<std::string, double> per_class_ap;
  double map = 0;
};

// Classes are those present in the ground truth. Throws ZeroTruth when there is none.
EvalReport evaluate(const GroundTruthSet& truth, const PredictionSet& preds,
                    double iou_threshold = 0.5);

GroundTruthSet truth_from_csv(const std::filesystem::path& csv_path);

// Reads newline-delimited frame reports; lines with "summary" are skipped. The image
// key is the report's "source" (base name) or, when empty, its frame index.
PredictionSet predictions_from_ndjson(std::istream& in, const std::string& source = "<stream>");
PredictionSet predictions_from_ndjson(const std::filesystem::path& path);

}  // namespace swapread
