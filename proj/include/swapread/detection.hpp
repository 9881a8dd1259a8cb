#pragma once

#include "swapread/core_types.hpp"

#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace swapread {

/// Integer class id (>= 1) to class name. Ids and names are unique.
class LabelMap {
 public:
  LabelMap() = default;

  void add(int id, std::string name);

  bool contains_name(const std::string& name) const;
  std::optional<std::string> name_of(int id) const;
  std::optional<int> id_of(const std::string& name) const;

  const std::map<int, std::string>& entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }

  friend bool operator==(const LabelMap&, const LabelMap&) = default;

 private:
  std::map<int, std::string> entries_;
};

// One `<id> <name>` per line; `#` comment lines and blank lines ignored.
LabelMap parse_label_map(std::istream& in, const std::string& source = "<stream>");
LabelMap load_label_map(const std::filesystem::path& path);
std::string format_label_map(const LabelMap& map);

/// Object detector contract. Instances are not thread-safe; use one per worker.
class DetectorBackend {
 public:
  virtual ~DetectorBackend() = default;

  virtual std::string name() const = 0;
  virtual std::optional<std::pair<int, int>> expected_input() const { return std::nullopt; }
  virtual const LabelMap& label_map() const = 0;

  // Raw backend output; may extend outside the frame. Post-processing is done by infer().
  virtual std::vector<Detection> run(const Frame& frame) = 0;
};

/// Returns scripted detections keyed by Frame::frame_index.
class StubDetector final : public DetectorBackend {
 public:
  explicit StubDetector(LabelMap labels, std::optional<std::pair<int, int>> expected = {});

  void script(std::size_t frame_index, std::vector<Detection> detections);
  // Every call throws BackendFailure; exercises error isolation.
  void fail_on(std::size_t frame_index);

  std::string name() const override { return "stub"; }
  std::optional<std::pair<int, int>> expected_input() const override { return expected_; }
  const LabelMap& label_map() const override { return labels_; }
  std::vector<Detection> run(const Frame& frame) override;

 private:
  LabelMap labels_;
  std::optional<std::pair<int, int>> expected_;
  std::map<std::size_t, std::vector<Detection>> script_;
  std::map<std::size_t, bool> failing_;
};

// Runs the backend and post-processes: boxes clipped to the frame (fully outside
// ones dropped), labels absent from the backend's label map dropped. Throws
// BackendFailure for out-of-range scores or backend errors, InputShapeError when the
// backend rejects the frame size.
std::vector<Detection> infer(DetectorBackend& backend, const Frame& frame);

std::vector<Detection> filter_by_score(const std::vector<Detection>& dets, double min_score);

// Greedy per-label NMS. Candidates are visited by descending score, ties broken by
// smaller x_min then smaller y_min; a candidate is kept iff its IoU with every kept
// detection of the same label is below the threshold.
std::vector<Detection> greedy_nms(const std::vector<Detection>& dets, double iou_threshold);

}  // namespace swapread
