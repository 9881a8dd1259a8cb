#include "swapread/data_tools.hpp"

#include "swapread/errors.hpp"

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

namespace swapread {

namespace pt = boost::property_tree;
using nlohmann::json;

// ---------------------------------------------------------------------------
// Annotation parsing

namespace {

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

const pt::ptree& require_child(const pt::ptree& node, const std::string& name,
                               const std::string& field_path) {
  auto child = node.get_child_optional(name);
  if (!child) throw MissingField(field_path);
  return *child;
}

double parse_number(const pt::ptree& node, const std::string& name, const std::string& path) {
  const auto& child = require_child(node, name, path);
  const std::string text = trim(child.data());
  double value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size())
    throw ParseError(path, "expected a number, got '" + text + "'");
  return value;
}

}  // namespace

AnnotationRecord parse_annotation_xml(std::istream& in, const std::string& source) {
  pt::ptree tree;
  try {
    pt::read_xml(in, tree);
  } catch (const pt::xml_parser_error& e) {
    throw ParseError(source + ":" + std::to_string(e.line()), e.message());
  }

  const auto& root = require_child(tree, "annotation", "annotation");
  AnnotationRecord rec;
  rec.filename = trim(require_child(root, "filename", "annotation/filename").data());
  if (rec.filename.empty()) throw ParseError("annotation/filename", "empty file name");

  const auto& size = require_child(root, "size", "size");
  const double w = parse_number(size, "width", "annotation/size/width");
  const double h = parse_number(size, "height", "annotation/size/height");
  if (w < 1 || h < 1 || w != std::floor(w) || h != std::floor(h))
    throw ParseError("annotation/size", "width and height must be positive integers");
  rec.width = static_cast<int>(w);
  rec.height = static_cast<int>(h);

  int index = 0;
  for (const auto& [tag, node] : root) {
    if (tag != "object") continue;
    ++index;
    const std::string path = "annotation/object[" + std::to_string(index) + "]";
    AnnotatedObject obj;
    obj.label = trim(require_child(node, "name", path + "/name").data());
    if (obj.label.empty()) throw ParseError(path + "/name", "empty label");
    const auto& bb = require_child(node, "bndbox", path + "/bndbox");
    const std::string bpath = path + "/bndbox";
    obj.box = {parse_number(bb, "xmin", bpath + "/xmin"), parse_number(bb, "ymin", bpath + "/ymin"),
               parse_number(bb, "xmax", bpath + "/xmax"), parse_number(bb, "ymax", bpath + "/ymax")};
    if (!obj.box.valid()) throw ParseError(bpath, "box must satisfy min < max");

    const AxisAlignedBox image{0, 0, double(rec.width), double(rec.height)};
    if (!image.contains(obj.box)) {
      const auto clipped = intersect(obj.box, image);
      if (!clipped.valid()) {
        rec.warnings.push_back(source + ": " + path + " lies outside the image, dropped");
        continue;
      }
      rec.warnings.push_back(source + ": " + path + " clipped to the image");
      obj.box = clipped;
    }
    rec.objects.push_back(std::move(obj));
  }
  return rec;
}

AnnotationRecord parse_annotation(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open annotation " + path.string());
  return parse_annotation_xml(in, path.string());
}

// ---------------------------------------------------------------------------
// CSV

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

std::vector<std::string> split_csv_line(const std::string& line, const std::string& where) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (quoted) throw ParseError(where, "unterminated quoted field");
  fields.push_back(std::move(cur));
  return fields;
}

long parse_int(const std::string& s, const std::string& where, const char* column) {
  long v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size())
    throw ParseError(where, std::string("column '") + column + "' is not an integer: '" + s + "'");
  return v;
}

}  // namespace

std::size_t write_annotation_csv(const std::vector<AnnotationRecord>& records, std::ostream& out) {
  out << kCsvHeader << '\n';
  std::size_t rows = 0;
  for (const auto& rec : records) {
    for (const auto& obj : rec.objects) {
      out << csv_field(rec.filename) << ',' << rec.width << ',' << rec.height << ','
          << csv_field(obj.label) << ',' << std::lround(obj.box.x_min) << ','
          << std::lround(obj.box.y_min) << ',' << std::lround(obj.box.x_max) << ','
          << std::lround(obj.box.y_max) << '\n';
      ++rows;
    }
  }
  return rows;
}

std::size_t annotations_to_csv(const std::vector<AnnotationRecord>& records,
                               const std::filesystem::path& out_path) {
  std::ofstream out(out_path);
  if (!out) throw IoError("cannot write " + out_path.string());
  const auto rows = write_annotation_csv(records, out);
  out.flush();
  if (!out) throw IoError("write failed for " + out_path.string());
  return rows;
}

std::vector<AnnotationRecord> read_annotation_csv(std::istream& in, const std::string& source) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError(source + ":1", "missing CSV header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kCsvHeader) throw ParseError(source + ":1", "unexpected CSV header '" + line + "'");

  std::vector<AnnotationRecord> records;
  std::map<std::string, std::size_t> index;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto where = source + ":" + std::to_string(line_no);
    const auto f = split_csv_line(line, where);
    if (f.size() != 8) throw ParseError(where, "expected 8 columns, got " + std::to_string(f.size()));

    const int width = static_cast<int>(parse_int(f[1], where, "width"));
    const int height = static_cast<int>(parse_int(f[2], where, "height"));
    AnnotatedObject obj{f[3], {double(parse_int(f[4], where, "xmin")), double(parse_int(f[5], where, "ymin")),
                               double(parse_int(f[6], where, "xmax")), double(parse_int(f[7], where, "ymax"))}};
    if (obj.label.empty()) throw ParseError(where, "empty class");
    if (!obj.box.valid()) throw ParseError(where, "box must satisfy min < max");

    auto [it, inserted] = index.try_emplace(f[0], records.size());
    if (inserted) {
      records.push_back({f[0], width, height, {}, {}});
    } else if (records[it->second].width != width || records[it->second].height != height) {
      throw ParseError(where, "inconsistent image size for " + f[0]);
    }
    records[it->second].objects.push_back(std::move(obj));
  }
  return records;
}

std::vector<AnnotationRecord> read_annotation_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return read_annotation_csv(in, path.string());
}

// ---------------------------------------------------------------------------
// Split

std::vector<std::size_t> seeded_permutation(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  std::mt19937_64 rng(seed);
  for (std::size_t i = n; i > 1; --i) {
    // Unbiased draw in [0, i) by rejection; mt19937_64 output is fully specified.
    const std::uint64_t bound = i;
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t r = 0;
    do {
      r = rng();
    } while (r >= limit);
    std::swap(perm[i - 1], perm[r % bound]);
  }
  return perm;
}

DatasetSplit split_dataset(const std::vector<AnnotationRecord>& records, double train_fraction,
                           std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw InvalidArgument("train_fraction must be in (0,1)");
  const auto perm = seeded_permutation(records.size(), seed);
  const auto n_train = static_cast<std::size_t>(std::llround(records.size() * train_fraction));

  DatasetSplit split;
  split.train.reserve(n_train);
  split.test.reserve(records.size() - n_train);
  for (std::size_t i = 0; i < perm.size(); ++i)
    (i < n_train ? split.train : split.test).push_back(records[perm[i]]);
  return split;
}

// ---------------------------------------------------------------------------
// Augmentation

std::string to_string(AugmentationKind kind) {
  switch (kind) {
    case AugmentationKind::kRandomCrop: return "RANDOM_CROP";
    case AugmentationKind::kBrightness: return "BRIGHTNESS";
    case AugmentationKind::kContrast: return "CONTRAST";
    case AugmentationKind::kHue: return "HUE";
    case AugmentationKind::kSaturation: return "SATURATION";
  }
  return "UNKNOWN";
}

AugmentationKind augmentation_kind_from_string(const std::string& s) {
  std::string u;
  for (char c : s) u += c == '-' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  for (auto k : {AugmentationKind::kRandomCrop, AugmentationKind::kBrightness,
                 AugmentationKind::kContrast, AugmentationKind::kHue, AugmentationKind::kSaturation})
    if (to_string(k) == u) return k;
  throw InvalidArgument("unknown augmentation kind '" + s + "'");
}

AugmentationSpec AugmentationSpec::defaults(AugmentationKind kind, std::uint64_t seed) {
  switch (kind) {
    case AugmentationKind::kRandomCrop: return {kind, 0.6, 1.0, 0.25, seed};
    case AugmentationKind::kBrightness: return {kind, -32, 32, 0.25, seed};
    case AugmentationKind::kContrast: return {kind, 0.75, 1.25, 0.25, seed};
    case AugmentationKind::kHue: return {kind, -18, 18, 0.25, seed};
    case AugmentationKind::kSaturation: return {kind, 0.75, 1.25, 0.25, seed};
  }
  throw InvalidArgument("unknown augmentation kind");
}

void AugmentationSpec::validate() const {
  double min = 0, max = 0;
  bool open_min = false;
  switch (kind) {
    case AugmentationKind::kBrightness: min = -255; max = 255; break;
    case AugmentationKind::kContrast: min = 0; max = 4; break;
    case AugmentationKind::kHue: min = -180; max = 180; break;
    case AugmentationKind::kSaturation: min = 0; max = 4; break;
    case AugmentationKind::kRandomCrop: min = 0; max = 1; open_min = true; break;
  }
  const bool lo_ok = open_min ? lo > min : lo >= min;
  if (!(lo_ok && hi <= max && lo <= hi))
    throw InvalidArgument(to_string(kind) + " range [" + std::to_string(lo) + ", " +
                          std::to_string(hi) + "] outside allowed bounds");
  if (!(min_box_retention >= 0 && min_box_retention <= 1))
    throw InvalidArgument("min_box_retention must be in [0,1]");
}

namespace {

class Sampler {
 public:
  explicit Sampler(std::uint64_t seed) : rng_(seed) {}
  double uniform(double lo, double hi) {
    if (lo == hi) return lo;
    const double u = static_cast<double>(rng_() >> 11) * 0x1.0p-53;
    return lo + (hi - lo) * u;
  }
  int integer(int lo, int hi) {  // inclusive
    if (lo >= hi) return lo;
    const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<int>(rng_() % span);
  }

 private:
  std::mt19937_64 rng_;
};

std::uint8_t saturate(double v) {
  return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
}

template <typename Fn>
Frame map_pixels(const Frame& src, Fn&& fn) {
  Frame out = src;
  for (auto& p : out.pixels()) p = fn(p);
  return out;
}

struct Hsv {
  double h, s, v;  // h in [0,360), s and v in [0,1]
};

Hsv rgb_to_hsv(double r, double g, double b) {
  const double mx = std::max({r, g, b});
  const double mn = std::min({r, g, b});
  const double d = mx - mn;
  double h = 0;
  if (d > 0) {
    if (mx == r) h = 60 * std::fmod((g - b) / d, 6.0);
    else if (mx == g) h = 60 * ((b - r) / d + 2);
    else h = 60 * ((r - g) / d + 4);
  }
  if (h < 0) h += 360;
  return {h, mx > 0 ? d / mx : 0, mx};
}

void hsv_to_rgb(const Hsv& hsv, double& r, double& g, double& b) {
  const double c = hsv.v * hsv.s;
  const double hp = hsv.h / 60;
  const double x = c * (1 - std::fabs(std::fmod(hp, 2.0) - 1));
  double r1 = 0, g1 = 0, b1 = 0;
  if (hp < 1) { r1 = c; g1 = x; }
  else if (hp < 2) { r1 = x; g1 = c; }
  else if (hp < 3) { g1 = c; b1 = x; }
  else if (hp < 4) { g1 = x; b1 = c; }
  else if (hp < 5) { r1 = x; b1 = c; }
  else { r1 = c; b1 = x; }
  const double m = hsv.v - c;
  r = r1 + m;
  g = g1 + m;
  b = b1 + m;
}

template <typename Fn>
Frame map_hsv(const Frame& src, Fn&& fn) {
  if (src.channels() != 3) return src;
  Frame out = src;
  auto& px = out.pixels();
  for (std::size_t i = 0; i + 2 < px.size(); i += 3) {
    Hsv hsv = rgb_to_hsv(px[i] / 255.0, px[i + 1] / 255.0, px[i + 2] / 255.0);
    fn(hsv);
    double r = 0, g = 0, b = 0;
    hsv_to_rgb(hsv, r, g, b);
    px[i] = saturate(r * 255);
    px[i + 1] = saturate(g * 255);
    px[i + 2] = saturate(b * 255);
  }
  return out;
}

}  // namespace

std::vector<AxisAlignedBox> crop_boxes(const std::vector<AxisAlignedBox>& boxes,
                                       const AxisAlignedBox& window, double min_retention) {
  std::vector<AxisAlignedBox> out;
  for (const auto& b : boxes) {
    const auto inter = intersect(b, window);
    if (!inter.valid() || inter.area() < min_retention * b.area()) continue;
    out.push_back({inter.x_min - window.x_min, inter.y_min - window.y_min,
                   inter.x_max - window.x_min, inter.y_max - window.y_min});
  }
  return out;
}

Augmented augment(const Frame& frame, const std::vector<AxisAlignedBox>& boxes,
                  const AugmentationSpec& spec) {
  spec.validate();
  Sampler rng(spec.seed);

  switch (spec.kind) {
    case AugmentationKind::kBrightness: {
      const double delta = rng.uniform(spec.lo, spec.hi);
      return {map_pixels(frame, [delta](std::uint8_t p) { return saturate(p + delta); }), boxes};
    }
    case AugmentationKind::kContrast: {
      const double f = rng.uniform(spec.lo, spec.hi);
      return {map_pixels(frame, [f](std::uint8_t p) { return saturate((p - 128.0) * f + 128.0); }),
              boxes};
    }
    case AugmentationKind::kHue: {
      const double shift = rng.uniform(spec.lo, spec.hi);
      return {map_hsv(frame,
                      [shift](Hsv& hsv) {
                        hsv.h = std::fmod(hsv.h + shift, 360.0);
                        if (hsv.h < 0) hsv.h += 360;
                      }),
              boxes};
    }
    case AugmentationKind::kSaturation: {
      const double f = rng.uniform(spec.lo, spec.hi);
      return {map_hsv(frame, [f](Hsv& hsv) { hsv.s = std::clamp(hsv.s * f, 0.0, 1.0); }), boxes};
    }
    case AugmentationKind::kRandomCrop: {
      constexpr int kAttempts = 10;
      for (int attempt = 0; attempt < kAttempts; ++attempt) {
        const int cw = static_cast<int>(std::lround(frame.width() * rng.uniform(spec.lo, spec.hi)));
        const int ch = static_cast<int>(std::lround(frame.height() * rng.uniform(spec.lo, spec.hi)));
        if (cw < 1 || ch < 1 || cw > frame.width() || ch > frame.height()) continue;
        const int x0 = rng.integer(0, frame.width() - cw);
        const int y0 = rng.integer(0, frame.height() - ch);
        if (cw == frame.width() && ch == frame.height()) return {frame, boxes};

        const AxisAlignedBox window{double(x0), double(y0), double(x0 + cw), double(y0 + ch)};
        Augmented out;
        out.frame = Frame(cw, ch, frame.channels());
        for (int y = 0; y < ch; ++y)
          for (int x = 0; x < cw; ++x)
            for (int c = 0; c < frame.channels(); ++c) out.frame.at(x, y, c) = frame.at(x0 + x, y0 + y, c);
        out.frame.frame_index = frame.frame_index;
        out.frame.timestamp_ms = frame.timestamp_ms;
        out.boxes = crop_boxes(boxes, window, spec.min_box_retention);
        return out;
      }
      return {frame, boxes};
    }
  }
  return {frame, boxes};
}

// ---------------------------------------------------------------------------
// Training config

std::vector<AugmentationSpec> TrainingConfig::default_augmentations() {
  return {AugmentationSpec::defaults(AugmentationKind::kBrightness),
          AugmentationSpec::defaults(AugmentationKind::kContrast),
          AugmentationSpec::defaults(AugmentationKind::kHue),
          AugmentationSpec::defaults(AugmentationKind::kSaturation),
          AugmentationSpec::defaults(AugmentationKind::kRandomCrop)};
}

void TrainingConfig::validate() const {
  if (num_classes < 1 || batch_size < 1 || total_steps < 1 || checkpoint_step < 1)
    throw InvalidArgument("training counts must be positive");
  if (!(learning_rate > 0)) throw InvalidArgument("learning_rate must be positive");
  if (!(dropout_probability > 0 && dropout_probability < 1))
    throw InvalidArgument("dropout_probability must be in (0,1)");
  for (const auto& a : augmentations) a.validate();
}

LabelMap default_label_map() {
  LabelMap map;
  map.add(1, kSwapBodyLabel);
  return map;
}

void emit_training_config(const TrainingDocument& doc, const std::filesystem::path& out_path) {
  doc.config.validate();
  if (doc.label_map.size() != static_cast<std::size_t>(doc.config.num_classes))
    throw InvalidArgument("label map size must equal num_classes");

  const auto& tc = doc.config;
  json augs = json::array();
  for (const auto& a : tc.augmentations)
    augs.push_back({{"kind", to_string(a.kind)}, {"lo", a.lo}, {"hi", a.hi},
                    {"min_box_retention", a.min_box_retention}, {"seed", a.seed}});
  json labels = json::array();
  for (const auto& [id, name] : doc.label_map.entries()) labels.push_back({{"id", id}, {"name", name}});

  const json j = {
      {"model", {{"num_classes", tc.num_classes}}},
      {"train_config",
       {{"batch_size", tc.batch_size},
        {"learning_rate", tc.learning_rate},
        {"dropout_probability", tc.dropout_probability},
        {"total_steps", tc.total_steps},
        {"checkpoint_step", tc.checkpoint_step},
        {"augmentations", std::move(augs)}}},
      {"label_map", std::move(labels)},
      {"dataset", {{"train_records", doc.train_records}, {"test_records", doc.test_records}}}};

  std::ofstream out(out_path);
  if (!out) throw IoError("cannot write " + out_path.string());
  out << j.dump(2) << '\n';
  out.flush();
  if (!out) throw IoError("write failed for " + out_path.string());
}

void emit_training_config(const TrainingConfig& tc, const std::filesystem::path& out_path) {
  TrainingDocument doc;
  doc.config = tc;
  emit_training_config(doc, out_path);
}

TrainingDocument load_training_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  TrainingDocument doc;
  try {
    const json j = json::parse(in);
    auto& tc = doc.config;
    tc.num_classes = j.at("model").at("num_classes").get<int>();
    const auto& t = j.at("train_config");
    tc.batch_size = t.at("batch_size").get<int>();
    tc.learning_rate = t.at("learning_rate").get<double>();
    tc.dropout_probability = t.at("dropout_probability").get<double>();
    tc.total_steps = t.at("total_steps").get<int>();
    tc.checkpoint_step = t.at("checkpoint_step").get<int>();
    tc.augmentations.clear();
    for (const auto& a : t.at("augmentations"))
      tc.augmentations.push_back({augmentation_kind_from_string(a.at("kind").get<std::string>()),
                                  a.at("lo").get<double>(), a.at("hi").get<double>(),
                                  a.at("min_box_retention").get<double>(),
                                  a.at("seed").get<std::uint64_t>()});
    doc.label_map = LabelMap{};
    for (const auto& l : j.at("label_map"))
      doc.label_map.add(l.at("id").get<int>(), l.at("name").get<std::string>());
    doc.train_records = j.at("dataset").at("train_records").get<std::string>();
    doc.test_records = j.at("dataset").at("test_records").get<std::string>();
  } catch (const json::exception& e) {
    throw ParseError(path.string(), e.what());
  }
  doc.config.validate();
  return doc;
}

}  // namespace swapread
