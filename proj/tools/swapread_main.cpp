// swapread command-line entry point.
//
// Exit codes: 0 success with a result, 2 success without a result, 1 error.

#include "swapread/adapters.hpp"
#include "swapread/config_file.hpp"
#include "swapread/data_tools.hpp"
#include "swapread/errors.hpp"
#include "swapread/evalkit.hpp"
#include "swapread/io.hpp"
#include "swapread/pipeline.hpp"
#include "swapread/report_io.hpp"
#include "swapread/synth_scenes.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdio>
#include <fstream>
#include <future>
#include <iomanip>
#include <iostream>
#include <random>
#include <thread>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace swapread;

namespace {

constexpr int kOk = 0;
constexpr int kError = 1;
constexpr int kNoResult = 2;

struct OwnedBackends {
  std::unique_ptr<DetectorBackend> detector;
  std::unique_ptr<TextDetectorBackend> text;
  std::unique_ptr<OcrEngine> ocr;

  Backends view() { return {*detector, *text, *ocr}; }
};

OwnedBackends make_backends(const CliConfig& cfg, const std::vector<std::string>& sources) {
  OwnedBackends b;
  std::map<std::string, std::map<std::size_t, StubFrameScript>> scripts;
  auto script_for = [&](const BackendSpec& spec) -> const std::map<std::size_t, StubFrameScript>* {
    if (spec.script.empty()) return nullptr;
    auto [it, inserted] = scripts.try_emplace(spec.script);
    if (inserted) it->second = load_stub_script(spec.script, sources);
    return &it->second;
  };

  const LabelMap labels =
      cfg.detector.label_map.empty() ? default_label_map() : load_label_map(cfg.detector.label_map);
  if (cfg.detector.kind == "stub") {
    auto d = std::make_unique<StubDetector>(labels);
    if (auto s = script_for(cfg.detector)) apply_script(*s, d.get(), nullptr, nullptr);
    b.detector = std::move(d);
  } else {
    b.detector = std::make_unique<io::OpenCvSsdDetector>(cfg.detector.model, cfg.detector.config, labels);
  }

  if (cfg.text_detector.kind == "stub") {
    auto t = std::make_unique<StubTextDetector>();
    if (auto s = script_for(cfg.text_detector)) apply_script(*s, nullptr, t.get(), nullptr);
    b.text = std::move(t);
  } else {
    b.text = std::make_unique<io::OpenCvEastDetector>(cfg.text_detector.model);
  }

  if (cfg.ocr_engine.kind == "stub") {
    auto o = std::make_unique<StubOcr>();
    if (auto s = script_for(cfg.ocr_engine)) apply_script(*s, nullptr, nullptr, o.get());
    b.ocr = std::move(o);
  } else {
    b.ocr = std::make_unique<io::TesseractCliEngine>(
        cfg.ocr_engine.executable.empty() ? "tesseract" : cfg.ocr_engine.executable);
  }
  return b;
}

struct Overrides {
  std::optional<double> det_score;
  std::optional<double> det_nms;
  std::optional<double> aspect_min;
  std::optional<double> text_score;
  std::optional<double> text_nms;
  std::optional<double> ocr_min_conf;
  std::optional<int> window_n;
  std::optional<int> require_k;

  void add_to(CLI::App* app) {
    app->add_option("--det-score", det_score, "Detector score threshold");
    app->add_option("--det-nms", det_nms, "Detector NMS IoU");
    app->add_option("--aspect-min", aspect_min, "Minimum detection aspect ratio");
    app->add_option("--text-score", text_score, "Text score threshold");
    app->add_option("--text-nms", text_nms, "Text NMS IoU");
    app->add_option("--ocr-min-conf", ocr_min_conf, "Minimum OCR confidence");
    app->add_option("--window", window_n, "Temporal window length");
    app->add_option("--require", require_k, "Readings required inside the window");
  }

  void apply(PipelineConfig& p) const {
    if (det_score) p.det_score_threshold = *det_score;
    if (det_nms) p.det_nms_iou = *det_nms;
    if (aspect_min) p.aspect_min_ratio = *aspect_min;
    if (text_score) p.text_score_threshold = *text_score;
    if (text_nms) p.text_nms_iou = *text_nms;
    if (ocr_min_conf) p.ocr_min_confidence = *ocr_min_conf;
    if (window_n) p.window_n = *window_n;
    if (require_k) p.require_k = *require_k;
    p.validate();
  }
};

std::string format_box(const AxisAlignedBox& b) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(1) << '[' << b.x_min << ',' << b.y_min << ',' << b.x_max
      << ',' << b.y_max << ']';
  return out.str();
}

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& seed) {
  if (seed) return *seed;
  std::random_device rd;
  const std::uint64_t s = (static_cast<std::uint64_t>(rd()) << 32) | rd();
  std::cerr << "seed: " << s << '\n';
  return s;
}

// ---------------------------------------------------------------------------

int cmd_detect_image(const std::string& config_path, const std::string& input,
                     const std::string& json_out, const Overrides& ov) {
  auto cfg = load_cli_config(config_path);
  ov.apply(cfg.pipeline);
  Frame frame = io::read_image(input);
  frame.frame_index = 0;
  const std::string name = fs::path(input).filename().string();
  auto backends = make_backends(cfg, {name});

  FrameReport report = process_image(frame, backends.view(), cfg.pipeline);
  report.source = name;

  std::cout << "detections " << report.detections.size() << ", gated " << report.gated_out
            << ", text regions " << report.text_regions << '\n';
  for (const auto& e : report.errors) std::cerr << "stage " << e.stage << ": " << e.message << '\n';
  for (const auto& r : report.readings)
    std::cout << r.prefix << ' ' << r.digits << "  confidence " << std::fixed << std::setprecision(4)
              << r.confidence << "  region " << format_box(r.region) << '\n';
  if (report.readings.empty()) std::cout << "no ILU code accepted\n";

  if (!json_out.empty()) {
    std::ofstream out(json_out);
    if (!out) throw IoError("cannot write " + json_out);
    write_ndjson_line(out, report_to_json(report));
  }
  return report.readings.empty() ? kNoResult : kOk;
}

int cmd_detect_video(const std::string& config_path, const std::string& input,
                     const std::string& report_path, const Overrides& ov) {
  auto cfg = load_cli_config(config_path);
  ov.apply(cfg.pipeline);
  auto source = io::open_frame_source(input);

  std::vector<std::string> names;
  if (auto* dir = dynamic_cast<io::DirectoryFrameSource*>(source.get()))
    for (const auto& f : dir->files()) names.push_back(f.filename().string());
  else if (!input.starts_with("blank:"))
    names.push_back(fs::path(input).filename().string());
  auto backends = make_backends(cfg, names);

  std::ofstream out(report_path);
  if (!out) throw IoError("cannot write " + report_path);
  const auto result = process_video(*source, backends.view(), cfg.pipeline, [&](const FrameReport& r) {
    for (const auto& e : r.errors)
      std::cerr << "frame " << r.frame_index << " stage " << e.stage << ": " << e.message << '\n';
    write_ndjson_line(out, report_to_json(r));
  });
  write_ndjson_line(out, summary_to_json(result.summary));

  std::cout << "frames " << result.summary.frames << '\n';
  for (const auto& c : result.summary.codes)
    std::cout << "accepted " << c.reading.prefix << ' ' << c.reading.digits << " at frame "
              << c.first_frame << '\n';
  return result.summary.codes.empty() ? kNoResult : kOk;
}

// ---------------------------------------------------------------------------

std::vector<fs::path> collect_files(const std::vector<std::string>& inputs,
                                    bool (*accept)(const fs::path&)) {
  std::vector<fs::path> files;
  for (const auto& in : inputs) {
    const fs::path p(in);
    if (fs::is_directory(p)) {
      std::vector<fs::path> found;
      for (const auto& e : fs::directory_iterator(p))
        if (e.is_regular_file() && accept(e.path())) found.push_back(e.path());
      std::sort(found.begin(), found.end());
      files.insert(files.end(), found.begin(), found.end());
    } else if (fs::is_regular_file(p)) {
      files.push_back(p);
    } else {
      throw IoError("input not found: " + in);
    }
  }
  return files;
}

template <typename T, typename Fn>
std::vector<T> parallel_map(const std::vector<fs::path>& files, int workers, Fn fn) {
  std::vector<T> out(files.size());
  workers = std::max(1, workers);
  std::vector<std::future<void>> jobs;
  for (int w = 0; w < workers; ++w)
    jobs.push_back(std::async(std::launch::async, [&, w] {
      for (std::size_t i = w; i < files.size(); i += workers) out[i] = fn(i, files[i]);
    }));
  for (auto& j : jobs) j.get();
  return out;
}

int cmd_parse(const std::string& input) {
  const auto rec = parse_annotation(input);
  for (const auto& w : rec.warnings) std::cerr << "warning: " << w << '\n';
  json objects = json::array();
  for (const auto& o : rec.objects) objects.push_back({{"label", o.label}, {"box", box_to_json(o.box)}});
  std::cout << json{{"filename", rec.filename}, {"width", rec.width}, {"height", rec.height},
                    {"objects", objects}}
                   .dump(2)
            << '\n';
  return kOk;
}

int cmd_to_csv(const std::vector<std::string>& inputs, const std::string& out, int workers) {
  const auto files = collect_files(inputs, [](const fs::path& p) { return p.extension() == ".xml"; });
  auto records = parallel_map<AnnotationRecord>(
      files, workers, [](std::size_t, const fs::path& f) { return parse_annotation(f); });
  for (const auto& r : records)
    for (const auto& w : r.warnings) std::cerr << "warning: " << w << '\n';
  std::stable_sort(records.begin(), records.end(),
                   [](const auto& a, const auto& b) { return a.filename < b.filename; });
  const auto rows = annotations_to_csv(records, out);
  std::cout << "wrote " << rows << " rows from " << records.size() << " annotations to " << out << '\n';
  return kOk;
}

int cmd_split(const std::string& input, double fraction, std::optional<std::uint64_t> seed_opt,
              std::string train_out, std::string test_out) {
  const auto seed = resolve_seed(seed_opt);
  const auto records = read_annotation_csv(fs::path(input));
  const auto split = split_dataset(records, fraction, seed);
  const fs::path in(input);
  if (train_out.empty()) train_out = (in.parent_path() / (in.stem().string() + "_train.csv")).string();
  if (test_out.empty()) test_out = (in.parent_path() / (in.stem().string() + "_test.csv")).string();
  const auto train_rows = annotations_to_csv(split.train, train_out);
  const auto test_rows = annotations_to_csv(split.test, test_out);
  std::cout << "train " << split.train.size() << " records (" << train_rows << " rows) -> " << train_out
            << "\ntest " << split.test.size() << " records (" << test_rows << " rows) -> " << test_out
            << '\n';
  return kOk;
}

struct AugmentArgs {
  std::vector<std::string> inputs;
  std::string out_dir;
  std::string kind;
  std::optional<double> delta, factor, shift, scale_min, scale_max;
  double min_retention = 0.25;
  std::optional<std::uint64_t> seed;
  std::string csv;
  int workers = 1;
};

int cmd_augment(const AugmentArgs& a) {
  const auto seed = resolve_seed(a.seed);
  const auto kind = augmentation_kind_from_string(a.kind);
  AugmentationSpec base = AugmentationSpec::defaults(kind, seed);
  auto fixed = [&](const std::optional<double>& v) {
    if (v) base.lo = base.hi = *v;
  };
  switch (kind) {
    case AugmentationKind::kBrightness: fixed(a.delta); break;
    case AugmentationKind::kContrast:
    case AugmentationKind::kSaturation: fixed(a.factor); break;
    case AugmentationKind::kHue: fixed(a.shift); break;
    case AugmentationKind::kRandomCrop:
      if (a.scale_min) base.lo = *a.scale_min;
      if (a.scale_max) base.hi = *a.scale_max;
      break;
  }
  base.min_box_retention = a.min_retention;
  base.validate();

  std::map<std::string, AnnotationRecord> annotations;
  if (!a.csv.empty())
    for (auto& r : read_annotation_csv(fs::path(a.csv)))
      annotations[fs::path(r.filename).filename().string()] = std::move(r);

  fs::create_directories(a.out_dir);
  const auto files = collect_files(a.inputs, &io::is_image_file);
  auto out_records = parallel_map<AnnotationRecord>(files, a.workers, [&](std::size_t i, const fs::path& f) {
    const auto name = f.filename().string();
    const Frame frame = io::read_image(f);
    AugmentationSpec spec = base;
    spec.seed = seed + i;

    std::vector<AxisAlignedBox> boxes;
    std::vector<std::string> labels;
    if (auto it = annotations.find(name); it != annotations.end())
      for (const auto& o : it->second.objects) {
        boxes.push_back(o.box);
        labels.push_back(o.label);
      }
    const auto result = augment(frame, boxes, spec);
    io::write_image(fs::path(a.out_dir) / name, result.frame);

    AnnotationRecord rec{name, result.frame.width(), result.frame.height(), {}, {}};
    // Photometric kinds keep the box list intact; crops may drop boxes, so labels are
    // re-associated by position only when nothing was dropped.
    if (result.boxes.size() == boxes.size()) {
      for (std::size_t k = 0; k < boxes.size(); ++k) rec.objects.push_back({labels[k], result.boxes[k]});
    } else {
      for (const auto& b : result.boxes) rec.objects.push_back({labels.empty() ? "" : labels.front(), b});
    }
    return rec;
  });

  if (!a.csv.empty()) annotations_to_csv(out_records, fs::path(a.out_dir) / "annotations.csv");
  std::cout << "augmented " << files.size() << " images (" << to_string(kind) << ") -> " << a.out_dir
            << '\n';
  return kOk;
}

struct EmitArgs {
  std::string out;
  std::string label_map;
  std::string train_records;
  std::string test_records;
  std::optional<int> num_classes, batch_size, total_steps, checkpoint_step;
  std::optional<double> learning_rate, dropout;
};

int cmd_emit_config(const EmitArgs& a) {
  TrainingDocument doc;
  if (!a.label_map.empty()) {
    doc.label_map = load_label_map(a.label_map);
    doc.config.num_classes = static_cast<int>(doc.label_map.size());
  }
  if (a.num_classes) doc.config.num_classes = *a.num_classes;
  if (a.batch_size) doc.config.batch_size = *a.batch_size;
  if (a.total_steps) doc.config.total_steps = *a.total_steps;
  if (a.checkpoint_step) doc.config.checkpoint_step = *a.checkpoint_step;
  if (a.learning_rate) doc.config.learning_rate = *a.learning_rate;
  if (a.dropout) doc.config.dropout_probability = *a.dropout;
  doc.train_records = a.train_records;
  doc.test_records = a.test_records;
  emit_training_config(doc, a.out);
  std::cout << "wrote " << a.out << '\n';
  return kOk;
}

// ---------------------------------------------------------------------------

int cmd_eval(const std::string& truth_path, const std::string& pred_path, double iou_threshold) {
  const auto truth = truth_from_csv(truth_path);
  const auto preds = predictions_from_ndjson(fs::path(pred_path));
  try {
    const auto report = evaluate(truth, preds, iou_threshold);
    std::cout << std::fixed << std::setprecision(4);
    for (const auto& [cls, ap] : report.per_class_ap) std::cout << "AP " << cls << ' ' << ap << '\n';
    std::cout << "mAP " << report.map << '\n';
  } catch (const ZeroTruth& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kNoResult;
  }
  return kOk;
}

int cmd_synth(const std::string& out_dir, int n, std::optional<std::uint64_t> seed_opt) {
  const auto seed = resolve_seed(seed_opt);
  const auto suite = generate_suite(n, seed);
  const fs::path dir(out_dir);
  write_suite(suite, dir, &io::write_image);

  // Stub script answering with the ground truth, plus a config that uses it.
  json frames = json::array();
  for (std::size_t i = 0; i < suite.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "scene_%03zu.png", i);
    const auto& t = suite[i].scene.truth;
    StubFrameScript s;
    s.detections.push_back({t.detection_box, kSwapBodyLabel, 0.98});
    const auto c = t.text_box.center();
    s.text_regions.push_back({{c.x(), c.y(), t.text_box.width(), t.text_box.height(), 0.0}, 0.95});
    s.ocr.push_back({t.text_box, {t.code, 0.995}});
    frames.push_back(stub_script_entry(name, s));
  }
  std::ofstream(dir / "stub_script.json") << json{{"frames", frames}}.dump(2) << '\n';

  CliConfig cfg;
  cfg.detector.script = cfg.text_detector.script = cfg.ocr_engine.script = "stub_script.json";
  std::ofstream(dir / "stub_config.json") << cli_config_to_json(cfg).dump(2) << '\n';
  std::cout << "wrote " << suite.size() << " scenes to " << out_dir << '\n';
  return kOk;
}

int cmd_default_config(const std::string& out) {
  const auto text = cli_config_to_json(CliConfig{}).dump(2);
  if (out.empty()) {
    std::cout << text << '\n';
  } else {
    std::ofstream f(out);
    if (!f) throw IoError("cannot write " + out);
    f << text << '\n';
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Swap-body detection and ILU code reading"};
  app.require_subcommand(1);

  std::string config, input, json_out, report;
  Overrides overrides;

  auto* di = app.add_subcommand("detect-image", "Read ILU codes from one image");
  di->add_option("--config", config, "Configuration file")->required();
  di->add_option("--input", input, "Image file")->required();
  di->add_option("--json", json_out, "Write the frame report as JSON");
  overrides.add_to(di);

  auto* dv = app.add_subcommand("detect-video", "Read ILU codes from a frame stream");
  dv->add_option("--config", config, "Configuration file")->required();
  dv->add_option("--input", input, "Video file, image directory or blank:N[:WxH]")->required();
  dv->add_option("--report", report, "Newline-delimited JSON report")->required();
  overrides.add_to(dv);

  auto* prep = app.add_subcommand("prep-data", "Dataset preparation");
  prep->require_subcommand(1);

  std::string parse_input;
  auto* parse = prep->add_subcommand("parse", "Parse one annotation document");
  parse->add_option("--input", parse_input)->required();

  std::vector<std::string> csv_inputs;
  std::string csv_out;
  int workers = 1;
  auto* to_csv = prep->add_subcommand("to-csv", "Convert annotation documents to CSV");
  to_csv->add_option("--input", csv_inputs, "Annotation files or directories")->required();
  to_csv->add_option("--out", csv_out)->required();
  to_csv->add_option("--workers", workers)->check(CLI::PositiveNumber);

  std::string split_input, train_out, test_out;
  double fraction = 0.8;
  std::optional<std::uint64_t> split_seed;
  auto* split = prep->add_subcommand("split", "Deterministic train/test split of a CSV");
  split->add_option("--input", split_input)->required();
  split->add_option("--fraction", fraction)->check(CLI::Range(0.0, 1.0));
  split->add_option("--seed", split_seed);
  split->add_option("--train-out", train_out);
  split->add_option("--test-out", test_out);

  AugmentArgs aug;
  auto* augment_cmd = prep->add_subcommand("augment", "Augment images (and their boxes)");
  augment_cmd->add_option("--input", aug.inputs, "Image files or directories")->required();
  augment_cmd->add_option("--out", aug.out_dir)->required();
  augment_cmd->add_option("--kind", aug.kind, "brightness|contrast|hue|saturation|random-crop")->required();
  augment_cmd->add_option("--delta", aug.delta);
  augment_cmd->add_option("--factor", aug.factor);
  augment_cmd->add_option("--shift", aug.shift);
  augment_cmd->add_option("--scale-min", aug.scale_min);
  augment_cmd->add_option("--scale-max", aug.scale_max);
  augment_cmd->add_option("--min-retention", aug.min_retention);
  augment_cmd->add_option("--csv", aug.csv, "Annotation CSV whose boxes follow the images");
  augment_cmd->add_option("--seed", aug.seed);
  augment_cmd->add_option("--workers", aug.workers)->check(CLI::PositiveNumber);

  EmitArgs emit;
  auto* emit_cmd = prep->add_subcommand("emit-config", "Write the training configuration document");
  emit_cmd->add_option("--out", emit.out)->required();
  emit_cmd->add_option("--label-map", emit.label_map);
  emit_cmd->add_option("--train-records", emit.train_records);
  emit_cmd->add_option("--test-records", emit.test_records);
  emit_cmd->add_option("--num-classes", emit.num_classes);
  emit_cmd->add_option("--batch-size", emit.batch_size);
  emit_cmd->add_option("--learning-rate", emit.learning_rate);
  emit_cmd->add_option("--dropout", emit.dropout);
  emit_cmd->add_option("--total-steps", emit.total_steps);
  emit_cmd->add_option("--checkpoint-step", emit.checkpoint_step);

  std::string truth, pred;
  double iou_threshold = 0.5;
  auto* ev = app.add_subcommand("eval", "Per-class AP and mAP of predictions");
  ev->add_option("--truth", truth, "Ground-truth CSV")->required();
  ev->add_option("--pred", pred, "Prediction reports (NDJSON)")->required();
  ev->add_option("--iou", iou_threshold)->check(CLI::Range(0.0, 1.0));

  std::string synth_out;
  int synth_n = 50;
  std::optional<std::uint64_t> synth_seed;
  auto* synth = app.add_subcommand("synth", "Render a synthetic scene suite with ground truth");
  synth->add_option("--out", synth_out)->required();
  synth->add_option("--n", synth_n)->check(CLI::PositiveNumber);
  synth->add_option("--seed", synth_seed);

  std::string default_out;
  auto* defaults = app.add_subcommand("default-config", "Print the default configuration file");
  defaults->add_option("--out", default_out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kError;
  }

  try {
    if (*di) return cmd_detect_image(config, input, json_out, overrides);
    if (*dv) return cmd_detect_video(config, input, report, overrides);
    if (*parse) return cmd_parse(parse_input);
    if (*to_csv) return cmd_to_csv(csv_inputs, csv_out, workers);
    if (*split) return cmd_split(split_input, fraction, split_seed, train_out, test_out);
    if (*augment_cmd) return cmd_augment(aug);
    if (*emit_cmd) return cmd_emit_config(emit);
    if (*ev) return cmd_eval(truth, pred, iou_threshold);
    if (*synth) return cmd_synth(synth_out, synth_n, synth_seed);
    if (*defaults) return cmd_default_config(default_out);
  } catch (const StageError& e) {
    std::cerr << "error: stage " << e.stage() << ": " << e.what() << '\n';
    return kError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kError;
  }
  return kError;
}
