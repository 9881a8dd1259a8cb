#include "swapread/evalkit.hpp"

#include "swapread/data_tools.hpp"
#include "swapread/errors.hpp"
#include "swapread/report_io.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <fstream>
#include <numeric>
#include <set>

namespace swapread {

MatchResult match_detections(const std::vector<Detection>& preds,
                             const std::vector<AxisAlignedBox>& truths, double iou_threshold) {
  if (!(iou_threshold >= 0.0 && iou_threshold <= 1.0))
    throw InvalidArgument("iou_threshold must be in [0,1]");

  std::vector<std::size_t> order(preds.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    const auto& a = preds[i];
    const auto& b = preds[j];
    if (a.score != b.score) return a.score > b.score;
    if (a.box.x_min != b.box.x_min) return a.box.x_min < b.box.x_min;
    return a.box.y_min < b.box.y_min;
  });

  MatchResult out{std::vector<bool>(preds.size(), false), std::vector<bool>(truths.size(), false)};
  for (std::size_t p : order) {
    double best = -1;
    std::size_t best_t = truths.size();
    for (std::size_t t = 0; t < truths.size(); ++t) {
      if (out.truth_matched[t]) continue;
      const double v = iou(preds[p].box, truths[t]);
      if (v > best) {
        best = v;
        best_t = t;
      }
    }
    if (best_t < truths.size() && best >= iou_threshold) {
      out.pred_tp[p] = true;
      out.truth_matched[best_t] = true;
    }
  }
  return out;
}

double average_precision(std::vector<ScoredFlag> flags, std::size_t truth_count) {
  if (truth_count == 0) throw ZeroTruth("average precision needs at least one ground truth");
  std::stable_sort(flags.begin(), flags.end(),
                   [](const ScoredFlag& a, const ScoredFlag& b) { return a.score > b.score; });

  std::vector<double> recall;
  std::vector<double> precision;
  std::size_t tp = 0;
  std::size_t fp = 0;
  for (std::size_t i = 0; i < flags.size(); ++i) {
    (flags[i].tp ? tp : fp) += 1;
    const bool group_end = i + 1 == flags.size() || flags[i + 1].score != flags[i].score;
    if (!group_end) continue;
    recall.push_back(static_cast<double>(tp) / static_cast<double>(truth_count));
    precision.push_back(static_cast<double>(tp) / static_cast<double>(tp + fp));
  }

  // Precision envelope: max precision at any recall >= the current one.
  for (std::size_t i = precision.size(); i-- > 1;)
    precision[i - 1] = std::max(precision[i - 1], precision[i]);

  double ap = 0;
  double prev_recall = 0;
  for (std::size_t i = 0; i < recall.size(); ++i) {
    ap += (recall[i] - prev_recall) * precision[i];
    prev_recall = recall[i];
  }
  return std::clamp(ap, 0.0, 1.0);
}

double mean_average_precision(const std::vector<double>& per_class_ap) {
  if (per_class_ap.empty()) throw InvalidArgument("mAP needs at least one class");
  double sum = 0;
  for (double ap : per_class_ap) sum += ap;
  return sum / static_cast<double>(per_class_ap.size());
}

EvalReport evaluate(const GroundTruthSet& truth, const PredictionSet& preds, double iou_threshold) {
  std::set<std::string> classes;
  for (const auto& [image, boxes] : truth)
    for (const auto& b : boxes) classes.insert(b.label);
  if (classes.empty()) throw ZeroTruth("ground truth contains no objects");

  EvalReport report;
  std::vector<double> aps;
  for (const auto& cls : classes) {
    std::vector<ScoredFlag> flags;
    std::size_t n_truth = 0;
    std::set<std::string> images;
    for (const auto& [image, _] : truth) images.insert(image);
    for (const auto& [image, _] : preds) images.insert(image);

    for (const auto& image : images) {
      std::vector<AxisAlignedBox> t;
      if (auto it = truth.find(image); it != truth.end())
        for (const auto& b : it->second)
          if (b.label == cls) t.push_back(b.box);
      std::vector<Detection> p;
      if (auto it = preds.find(image); it != preds.end())
        for (const auto& d : it->second)
          if (d.label == cls) p.push_back(d);
      n_truth += t.size();
      const auto m = match_detections(p, t, iou_threshold);
      for (std::size_t i = 0; i < p.size(); ++i) flags.push_back({p[i].score, m.pred_tp[i]});
    }
    const double ap = average_precision(std::move(flags), n_truth);
    report.per_class_ap[cls] = ap;
    aps.push_back(ap);
  }
  report.map = mean_average_precision(aps);
  return report;
}

namespace {

std::string image_key(const std::string& name) {
  return std::filesystem::path(name).filename().string();
}

}  // namespace

GroundTruthSet truth_from_csv(const std::filesystem::path& csv_path) {
  GroundTruthSet out;
  for (const auto& rec : read_annotation_csv(csv_path)) {
    auto& boxes = out[image_key(rec.filename)];
    for (const auto& obj : rec.objects) boxes.push_back({obj.label, obj.box});
  }
  return out;
}

PredictionSet predictions_from_ndjson(std::istream& in, const std::string& source) {
  PredictionSet out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto where = source + ":" + std::to_string(line_no);
    try {
      const auto j = nlohmann::json::parse(line);
      if (!j.is_object()) throw ParseError(where, "expected a JSON object");
      if (j.contains("summary")) continue;
      std::string key = j.value("source", std::string{});
      key = key.empty() ? std::to_string(j.at("frame_index").get<std::size_t>()) : image_key(key);
      auto& dets = out[key];
      for (const auto& d : j.at("detections")) {
        Detection det{box_from_json(d.at("box")), d.at("label").get<std::string>(),
                      d.at("score").get<double>()};
        if (!(det.score >= 0 && det.score <= 1)) throw ParseError(where, "score outside [0,1]");
        dets.push_back(std::move(det));
      }
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(where, e.what());
    } catch (const InvalidArgument& e) {
      throw ParseError(where, e.what());
    }
  }
  return out;
}

PredictionSet predictions_from_ndjson(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return predictions_from_ndjson(in, path.string());
}

}  // namespace swapread
