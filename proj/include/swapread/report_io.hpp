#pragma once

#include "swapread/pipeline.hpp"

#include <nlohmann/json.hpp>

#include <iosfwd>
#include <string>

namespace swapread {

// Boxes are written as [x_min, y_min, x_max, y_max]; codes as
// {"prefix", "digits", "confidence", "frame_index"}.
nlohmann::json box_to_json(const AxisAlignedBox& box);
AxisAlignedBox box_from_json(const nlohmann::json& j);

nlohmann::json reading_to_json(const IluCodeReading& reading);
nlohmann::json report_to_json(const FrameReport& report);
nlohmann::json summary_to_json(const VideoSummary& summary);

// One compact JSON document per line.
void write_ndjson_line(std::ostream& out, const nlohmann::json& j);

}  // namespace swapread
