#include "swapread/report_io.hpp"

#include "swapread/errors.hpp"

#include <ostream>

namespace swapread {

using nlohmann::json;

json box_to_json(const AxisAlignedBox& box) {
  return json::array({box.x_min, box.y_min, box.x_max, box.y_max});
}

AxisAlignedBox box_from_json(const json& j) {
  if (!j.is_array() || j.size() != 4) throw InvalidArgument("box must be [x_min,y_min,x_max,y_max]");
  for (const auto& v : j)
    if (!v.is_number()) throw InvalidArgument("box coordinates must be numbers");
  AxisAlignedBox b{j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
  if (!b.valid()) throw InvalidArgument("box must satisfy min < max");
  return b;
}

json reading_to_json(const IluCodeReading& r) {
  return {{"prefix", r.prefix},       {"digits", r.digits},
          {"confidence", r.confidence}, {"frame_index", r.frame_index},
          {"raw_text", r.raw_text},   {"region", box_to_json(r.region)}};
}

json report_to_json(const FrameReport& report) {
  json dets = json::array();
  for (const auto& d : report.detections)
    dets.push_back({{"label", d.label}, {"score", d.score}, {"box", box_to_json(d.box)}});
  json readings = json::array();
  for (const auto& r : report.readings) readings.push_back(reading_to_json(r));
  json errors = json::array();
  for (const auto& e : report.errors) errors.push_back({{"stage", e.stage}, {"message", e.message}});

  json j = {{"frame_index", report.frame_index},
            {"source", report.source},
            {"detections", std::move(dets)},
            {"gated_out", report.gated_out},
            {"text_regions", report.text_regions},
            {"readings", std::move(readings)},
            {"accepted_code", nullptr},
            {"errors", std::move(errors)}};
  if (report.accepted_code) j["accepted_code"] = reading_to_json(*report.accepted_code);
  return j;
}

json summary_to_json(const VideoSummary& summary) {
  json codes = json::array();
  for (const auto& c : summary.codes) {
    json entry = reading_to_json(c.reading);
    entry["frame_index"] = c.first_frame;
    codes.push_back(std::move(entry));
  }
  return {{"summary", true}, {"frames", summary.frames}, {"codes", std::move(codes)}};
}

void write_ndjson_line(std::ostream& out, const json& j) { out << j.dump() << '\n'; }

}  // namespace swapread
