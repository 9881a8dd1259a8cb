#pragma once

#include "swapread/detection.hpp"
#include "swapread/ocr_ilu.hpp"
#include "swapread/pipeline.hpp"
#include "swapread/text_detect.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace swapread {

/// Which implementation backs a stage, plus the files it needs.
///
///   detector       kind "stub" (script, label_map) | "opencv-ssd" (model, config, label_map)
///   text_detector  kind "stub" (script)            | "opencv-east" (model)
///   ocr_engine     kind "stub" (script)            | "tesseract" (executable)
struct BackendSpec {
  std::string kind = "stub";
  std::string model;
  std::string config;
  std::string label_map;
  std::string script;
  std::string executable;

  friend bool operator==(const BackendSpec&, const BackendSpec&) = default;
};

/// Contents of the CLI configuration file. Unknown keys are rejected and every
/// threshold invariant is checked at load time.
struct CliConfig {
  PipelineConfig pipeline;
  BackendSpec detector;
  BackendSpec text_detector;
  BackendSpec ocr_engine;
};

nlohmann::json cli_config_to_json(const CliConfig& cfg);
// Relative backend paths are resolved against `base_dir`.
CliConfig cli_config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
CliConfig load_cli_config(const std::filesystem::path& path);

/// Per-frame script shared by the three stub backends.
struct StubFrameScript {
  std::vector<Detection> detections;
  std::vector<StubTextDetector::ScriptedRegion> text_regions;
  struct Ocr {
    std::optional<AxisAlignedBox> where;
    OcrResult result;
  };
  std::vector<Ocr> ocr;
};

// Script entries are matched to frames by "source" (file base name, looked up in
// `sources`) when present, otherwise by "frame_index".
std::map<std::size_t, StubFrameScript> load_stub_script(const std::filesystem::path& path,
                                                        const std::vector<std::string>& sources);
nlohmann::json stub_script_entry(const std::string& source, const StubFrameScript& script);

void apply_script(const std::map<std::size_t, StubFrameScript>& script, StubDetector* detector,
                  StubTextDetector* text, StubOcr* ocr);

}  // namespace swapread
