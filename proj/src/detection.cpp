#include "swapread/detection.hpp"

#include "swapread/errors.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <numeric>
#include <sstream>

namespace swapread {

void LabelMap::add(int id, std::string name) {
  if (id < 1) throw InvalidArgument("label id must be >= 1");
  if (name.empty()) throw InvalidArgument("label name must be non-empty");
  if (entries_.contains(id)) throw DuplicateId("duplicate label id " + std::to_string(id));
  if (contains_name(name)) throw DuplicateId("duplicate label name '" + name + "'");
  entries_.emplace(id, std::move(name));
}

bool LabelMap::contains_name(const std::string& name) const { return id_of(name).has_value(); }

std::optional<std::string> LabelMap::name_of(int id) const {
  if (auto it = entries_.find(id); it != entries_.end()) return it->second;
  return std::nullopt;
}

std::optional<int> LabelMap::id_of(const std::string& name) const {
  for (const auto& [id, n] : entries_)
    if (n == name) return id;
  return std::nullopt;
}

LabelMap parse_label_map(std::istream& in, const std::string& source) {
  LabelMap map;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto where = source + ":" + std::to_string(line_no);

    const auto space = line.find(' ');
    if (space == std::string::npos || space == 0)
      throw ParseError(where, "expected '<id> <name>'");
    int id = 0;
    const auto* first = line.data();
    const auto* last = line.data() + space;
    auto [ptr, ec] = std::from_chars(first, last, id);
    if (ec != std::errc{} || ptr != last || id < 1)
      throw ParseError(where, "id must be a positive integer");
    std::string name = line.substr(space + 1);
    if (name.empty() || name.front() == ' ') throw ParseError(where, "missing or malformed name");

    if (map.name_of(id)) throw DuplicateId(where + ": duplicate id " + std::to_string(id));
    if (map.contains_name(name)) throw DuplicateId(where + ": duplicate name '" + name + "'");
    map.add(id, std::move(name));
  }
  return map;
}

LabelMap load_label_map(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open label map " + path.string());
  return parse_label_map(in, path.string());
}

std::string format_label_map(const LabelMap& map) {
  std::ostringstream out;
  for (const auto& [id, name] : map.entries()) out << id << ' ' << name << '\n';
  return out.str();
}

StubDetector::StubDetector(LabelMap labels, std::optional<std::pair<int, int>> expected)
    : labels_(std::move(labels)), expected_(expected) {}

void StubDetector::script(std::size_t frame_index, std::vector<Detection> detections) {
  script_[frame_index] = std::move(detections);
}

void StubDetector::fail_on(std::size_t frame_index) { failing_[frame_index] = true; }

std::vector<Detection> StubDetector::run(const Frame& frame) {
  if (expected_ && (frame.width() != expected_->first || frame.height() != expected_->second))
    throw InputShapeError("stub detector expects " + std::to_string(expected_->first) + "x" +
                          std::to_string(expected_->second) + " input");
  if (failing_.contains(frame.frame_index))
    throw BackendFailure("scripted failure at frame " + std::to_string(frame.frame_index));
  if (auto it = script_.find(frame.frame_index); it != script_.end()) return it->second;
  return {};
}

std::vector<Detection> infer(DetectorBackend& backend, const Frame& frame) {
  if (frame.empty()) throw InvalidArgument("cannot run detection on an empty frame");
  std::vector<Detection> raw;
  try {
    raw = backend.run(frame);
  } catch (const InputShapeError&) {
    throw;
  } catch (const BackendFailure&) {
    throw;
  } catch (const std::exception& e) {
    throw BackendFailure(backend.name() + ": " + e.what());
  }

  std::vector<Detection> out;
  out.reserve(raw.size());
  for (auto& det : raw) {
    if (!(det.score >= 0.0 && det.score <= 1.0))
      throw BackendFailure(backend.name() + ": score out of [0,1]");
    if (!backend.label_map().contains_name(det.label)) continue;
    if (!det.box.valid()) continue;
    try {
      det.box = clip_box(det.box, frame.width(), frame.height());
    } catch (const EmptyBox&) {
      continue;
    }
    out.push_back(std::move(det));
  }
  return out;
}

std::vector<Detection> filter_by_score(const std::vector<Detection>& dets, double min_score) {
  if (!(min_score >= 0.0 && min_score <= 1.0)) throw InvalidArgument("min_score must be in [0,1]");
  std::vector<Detection> out;
  std::copy_if(dets.begin(), dets.end(), std::back_inserter(out),
               [min_score](const Detection& d) { return d.score >= min_score; });
  return out;
}

std::vector<Detection> greedy_nms(const std::vector<Detection>& dets, double iou_threshold) {
  if (!(iou_threshold >= 0.0 && iou_threshold <= 1.0))
    throw InvalidArgument("iou_threshold must be in [0,1]");

  std::vector<std::size_t> order(dets.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    const auto& a = dets[i];
    const auto& b = dets[j];
    if (a.score != b.score) return a.score > b.score;
    if (a.box.x_min != b.box.x_min) return a.box.x_min < b.box.x_min;
    return a.box.y_min < b.box.y_min;
  });

  std::vector<Detection> kept;
  for (std::size_t idx : order) {
    const auto& cand = dets[idx];
    const bool suppressed = std::any_of(kept.begin(), kept.end(), [&](const Detection& k) {
      return k.label == cand.label && iou(k.box, cand.box) >= iou_threshold;
    });
    if (!suppressed) kept.push_back(cand);
  }
  return kept;
}

}  // namespace swapread
