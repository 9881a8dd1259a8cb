#include "swapread/config_file.hpp"

#include "swapread/errors.hpp"
#include "swapread/report_io.hpp"

#include <fstream>
#include <set>

namespace swapread {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ParseError(where, "expected an object");
  for (const auto& [key, _] : j.items())
    if (!allowed.contains(key)) throw ParseError(where, "unknown key '" + key + "'");
}

template <typename T>
void read(const json& j, const char* key, T& into) {
  if (auto it = j.find(key); it != j.end()) into = it->get<T>();
}

std::string resolve(const std::string& p, const fs::path& base) {
  if (p.empty() || base.empty() || fs::path(p).is_absolute()) return p;
  return (base / p).lexically_normal().string();
}

json backend_to_json(const BackendSpec& b) {
  json j = {{"kind", b.kind}};
  if (!b.model.empty()) j["model"] = b.model;
  if (!b.config.empty()) j["config"] = b.config;
  if (!b.label_map.empty()) j["label_map"] = b.label_map;
  if (!b.script.empty()) j["script"] = b.script;
  if (!b.executable.empty()) j["executable"] = b.executable;
  return j;
}

BackendSpec backend_from_json(const json& j, const std::string& where, const fs::path& base,
                              const std::set<std::string>& kinds) {
  reject_unknown(j, {"kind", "model", "config", "label_map", "script", "executable"}, where);
  BackendSpec b;
  read(j, "kind", b.kind);
  read(j, "model", b.model);
  read(j, "config", b.config);
  read(j, "label_map", b.label_map);
  read(j, "script", b.script);
  read(j, "executable", b.executable);
  if (!kinds.contains(b.kind)) throw ParseError(where + "/kind", "unsupported backend '" + b.kind + "'");
  b.model = resolve(b.model, base);
  b.config = resolve(b.config, base);
  b.label_map = resolve(b.label_map, base);
  b.script = resolve(b.script, base);
  return b;
}

}  // namespace

json cli_config_to_json(const CliConfig& cfg) {
  const auto& p = cfg.pipeline;
  return {
      {"det_score_threshold", p.det_score_threshold},
      {"det_nms_iou", p.det_nms_iou},
      {"aspect_min_ratio", p.aspect_min_ratio},
      {"text_score_threshold", p.text_score_threshold},
      {"text_nms_iou", p.text_nms_iou},
      {"ocr_min_confidence", p.ocr_min_confidence},
      {"window_n", p.window_n},
      {"require_k", p.require_k},
      {"max_text_input_side", p.max_text_input_side},
      {"ocr",
       {{"language", p.ocr.language},
        {"engine_mode", to_string(p.ocr.engine_mode)},
        {"segmentation_mode", to_string(p.ocr.segmentation_mode)},
        {"padding_ratio", p.ocr.padding_ratio}}},
      {"ilu_pattern",
       {{"prefixes", p.ilu_pattern.prefixes},
        {"min_digits", p.ilu_pattern.min_digits},
        {"max_digits", p.ilu_pattern.max_digits}}},
      {"backends",
       {{"detector", backend_to_json(cfg.detector)},
        {"text_detector", backend_to_json(cfg.text_detector)},
        {"ocr_engine", backend_to_json(cfg.ocr_engine)}}}};
}

CliConfig cli_config_from_json(const json& j, const fs::path& base_dir) {
  CliConfig cfg;
  try {
    reject_unknown(j,
                   {"det_score_threshold", "det_nms_iou", "aspect_min_ratio", "text_score_threshold",
                    "text_nms_iou", "ocr_min_confidence", "window_n", "require_k",
                    "max_text_input_side", "ocr", "ilu_pattern", "backends"},
                   "config");
    auto& p = cfg.pipeline;
    read(j, "det_score_threshold", p.det_score_threshold);
    read(j, "det_nms_iou", p.det_nms_iou);
    read(j, "aspect_min_ratio", p.aspect_min_ratio);
    read(j, "text_score_threshold", p.text_score_threshold);
    read(j, "text_nms_iou", p.text_nms_iou);
    read(j, "ocr_min_confidence", p.ocr_min_confidence);
    read(j, "window_n", p.window_n);
    read(j, "require_k", p.require_k);
    read(j, "max_text_input_side", p.max_text_input_side);

    if (auto it = j.find("ocr"); it != j.end()) {
      reject_unknown(*it, {"language", "engine_mode", "segmentation_mode", "padding_ratio"}, "config/ocr");
      read(*it, "language", p.ocr.language);
      read(*it, "padding_ratio", p.ocr.padding_ratio);
      if (it->contains("engine_mode"))
        p.ocr.engine_mode = engine_mode_from_string(it->at("engine_mode").get<std::string>());
      if (it->contains("segmentation_mode"))
        p.ocr.segmentation_mode =
            segmentation_mode_from_string(it->at("segmentation_mode").get<std::string>());
    }
    if (auto it = j.find("ilu_pattern"); it != j.end()) {
      reject_unknown(*it, {"prefixes", "min_digits", "max_digits"}, "config/ilu_pattern");
      read(*it, "prefixes", p.ilu_pattern.prefixes);
      read(*it, "min_digits", p.ilu_pattern.min_digits);
      read(*it, "max_digits", p.ilu_pattern.max_digits);
    }
    if (auto it = j.find("backends"); it != j.end()) {
      reject_unknown(*it, {"detector", "text_detector", "ocr_engine"}, "config/backends");
      if (it->contains("detector"))
        cfg.detector = backend_from_json(it->at("detector"), "config/backends/detector", base_dir,
                                         {"stub", "opencv-ssd"});
      if (it->contains("text_detector"))
        cfg.text_detector = backend_from_json(it->at("text_detector"), "config/backends/text_detector",
                                              base_dir, {"stub", "opencv-east"});
      if (it->contains("ocr_engine"))
        cfg.ocr_engine = backend_from_json(it->at("ocr_engine"), "config/backends/ocr_engine",
                                           base_dir, {"stub", "tesseract"});
    }
  } catch (const json::exception& e) {
    throw ParseError("config", e.what());
  }
  try {
    cfg.pipeline.validate();
  } catch (const InvalidArgument& e) {
    throw ParseError("config", e.what());
  }
  return cfg;
}

CliConfig load_cli_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError(path.string(), e.what());
  }
  try {
    return cli_config_from_json(j, path.parent_path());
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.where(), e.what());
  }
}

std::map<std::size_t, StubFrameScript> load_stub_script(const fs::path& path,
                                                        const std::vector<std::string>& sources) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open stub script " + path.string());
  std::map<std::size_t, StubFrameScript> out;
  try {
    const json j = json::parse(in);
    reject_unknown(j, {"frames"}, path.string());
    for (const auto& f : j.at("frames")) {
      reject_unknown(f, {"frame_index", "source", "detections", "text_regions", "ocr"},
                     path.string() + "/frames");
      std::size_t index = 0;
      if (f.contains("source")) {
        const auto name = f.at("source").get<std::string>();
        const auto it = std::find(sources.begin(), sources.end(), name);
        if (it == sources.end()) continue;
        index = static_cast<std::size_t>(it - sources.begin());
      } else {
        index = f.value("frame_index", std::size_t{0});
      }
      auto& script = out[index];
      for (const auto& d : f.value("detections", json::array()))
        script.detections.push_back(
            {box_from_json(d.at("box")), d.at("label").get<std::string>(), d.at("score").get<double>()});
      for (const auto& t : f.value("text_regions", json::array())) {
        const auto b = box_from_json(t.at("box"));
        script.text_regions.push_back(
            {{b.center().x(), b.center().y(), b.width(), b.height(), t.value("angle", 0.0)},
             t.value("score", 1.0)});
      }
      for (const auto& o : f.value("ocr", json::array())) {
        StubFrameScript::Ocr entry;
        if (o.contains("box")) entry.where = box_from_json(o.at("box"));
        entry.result = {o.at("text").get<std::string>(), o.at("confidence").get<double>()};
        script.ocr.push_back(std::move(entry));
      }
    }
  } catch (const json::exception& e) {
    throw ParseError(path.string(), e.what());
  } catch (const InvalidArgument& e) {
    throw ParseError(path.string(), e.what());
  }
  return out;
}

json stub_script_entry(const std::string& source, const StubFrameScript& script) {
  json dets = json::array();
  for (const auto& d : script.detections)
    dets.push_back({{"label", d.label}, {"score", d.score}, {"box", box_to_json(d.box)}});
  json regions = json::array();
  for (const auto& r : script.text_regions) {
    const auto& b = r.frame_box;
    regions.push_back({{"box", box_to_json({b.center_x - b.width / 2, b.center_y - b.height / 2,
                                            b.center_x + b.width / 2, b.center_y + b.height / 2})},
                       {"angle", b.angle},
                       {"score", r.score}});
  }
  json ocr = json::array();
  for (const auto& o : script.ocr) {
    json e = {{"text", o.result.text}, {"confidence", o.result.confidence}};
    if (o.where) e["box"] = box_to_json(*o.where);
    ocr.push_back(std::move(e));
  }
  return {{"source", source}, {"detections", dets}, {"text_regions", regions}, {"ocr", ocr}};
}

void apply_script(const std::map<std::size_t, StubFrameScript>& script, StubDetector* detector,
                  StubTextDetector* text, StubOcr* ocr) {
  for (const auto& [index, s] : script) {
    if (detector) detector->script(index, s.detections);
    if (text) text->script_regions(index, s.text_regions);
    if (ocr)
      for (const auto& o : s.ocr) ocr->script(index, o.result, o.where);
  }
}

}  // namespace swapread
