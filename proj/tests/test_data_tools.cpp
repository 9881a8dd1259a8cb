#include "oracles.hpp"

#include "swapread/data_tools.hpp"
#include "swapread/errors.hpp"

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace swapread;
namespace fs = std::filesystem;

namespace {

const char* kMinimalXml = R"(<annotation>
  <folder>images</folder>
  <filename>yard_001.jpg</filename>
  <size><width>640</width><height>480</height><depth>3</depth></size>
  <object>
    <name>sb_DB</name>
    <bndbox><xmin>10</xmin><ymin>20</ymin><xmax>110</xmax><ymax>220</ymax></bndbox>
  </object>
</annotation>)";

fs::path temp_dir(const std::string& name) {
  const auto d = fs::temp_directory_path() / ("swapread_test_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

std::vector<AnnotationRecord> random_records(std::mt19937_64& rng, int n) {
  std::uniform_int_distribution<int> objs(0, 4), pos(0, 500), side(1, 120);
  std::vector<AnnotationRecord> out;
  for (int i = 0; i < n; ++i) {
    AnnotationRecord r{"img_" + std::to_string(i) + ".jpg", 640, 640, {}, {}};
    for (int k = objs(rng); k > 0; --k) {
      const int x = pos(rng), y = pos(rng);
      r.objects.push_back({k % 2 ? "sb_DB" : "truck, cab",
                           {double(x), double(y), double(x + side(rng)), double(y + side(rng))}});
    }
    out.push_back(std::move(r));
  }
  return out;
}

Frame noise_frame(std::uint64_t seed, int w = 64, int h = 48) {
  std::mt19937_64 rng(seed);
  Frame f(w, h, 3);
  for (auto& p : f.pixels()) p = static_cast<std::uint8_t>(rng() & 0xff);
  return f;
}

}  // namespace

TEST(ParseAnnotation, MinimalDocument) {
  std::istringstream in(kMinimalXml);
  const auto r = parse_annotation_xml(in);
  EXPECT_EQ(r.filename, "yard_001.jpg");
  EXPECT_EQ(r.width, 640);
  EXPECT_EQ(r.height, 480);
  ASSERT_EQ(r.objects.size(), 1u);
  EXPECT_EQ(r.objects[0].label, "sb_DB");
  EXPECT_EQ(r.objects[0].box, (AxisAlignedBox{10, 20, 110, 220}));
  EXPECT_TRUE(r.warnings.empty());
}

TEST(ParseAnnotation, NoObjectsIsBackground) {
  std::istringstream in(
      "<annotation><filename>a.jpg</filename><size><width>10</width><height>10</height></size>"
      "</annotation>");
  EXPECT_TRUE(parse_annotation_xml(in).objects.empty());
}

TEST(ParseAnnotation, MissingSize) {
  std::istringstream in("<annotation><filename>a.jpg</filename></annotation>");
  try {
    parse_annotation_xml(in);
    FAIL();
  } catch (const MissingField& e) {
    EXPECT_EQ(e.field(), "size");
  }
}

TEST(ParseAnnotation, ClipsWithWarning) {
  std::istringstream in(
      "<annotation><filename>a.jpg</filename><size><width>100</width><height>100</height></size>"
      "<object><name>sb_DB</name><bndbox><xmin>-5</xmin><ymin>10</ymin><xmax>120</xmax>"
      "<ymax>50</ymax></bndbox></object>"
      "<object><name>sb_DB</name><bndbox><xmin>200</xmin><ymin>200</ymin><xmax>220</xmax>"
      "<ymax>250</ymax></bndbox></object></annotation>");
  const auto r = parse_annotation_xml(in);
  ASSERT_EQ(r.objects.size(), 1u);
  EXPECT_EQ(r.objects[0].box, (AxisAlignedBox{0, 10, 100, 50}));
  EXPECT_EQ(r.warnings.size(), 2u);
}

TEST(ParseAnnotation, MalformedXmlIsParseError) {
  std::istringstream in("<annotation><size>");
  EXPECT_THROW(parse_annotation_xml(in), ParseError);
  std::istringstream bad_number(
      "<annotation><filename>a</filename><size><width>ten</width><height>1</height></size>"
      "</annotation>");
  EXPECT_THROW(parse_annotation_xml(bad_number), ParseError);
}

TEST(Csv, RowPerObjectAndEmpty) {
  const auto d = temp_dir("csv");
  AnnotationRecord r{"a.jpg", 100, 100, {{"sb_DB", {1, 2, 3, 4}}, {"sb_DB", {5, 6, 7, 8}}}, {}};
  EXPECT_EQ(annotations_to_csv({r}, d / "one.csv"), 2u);
  EXPECT_EQ(annotations_to_csv({}, d / "empty.csv"), 0u);
  std::ifstream in(d / "empty.csv");
  std::string header, extra;
  std::getline(in, header);
  EXPECT_EQ(header, kCsvHeader);
  EXPECT_FALSE(std::getline(in, extra));
}

TEST(Csv, RoundTripRandomRecords) {
  std::mt19937_64 rng(61);
  for (int t = 0; t < 20; ++t) {
    const auto records = random_records(rng, 10);
    std::stringstream ss;
    std::size_t expected_rows = 0;
    for (const auto& r : records) expected_rows += r.objects.size();
    EXPECT_EQ(write_annotation_csv(records, ss), expected_rows);
    const auto back = read_annotation_csv(ss);
    std::vector<std::tuple<std::string, std::string, AxisAlignedBox>> want, got;
    for (const auto& r : records)
      for (const auto& o : r.objects) want.emplace_back(r.filename, o.label, o.box);
    for (const auto& r : back)
      for (const auto& o : r.objects) got.emplace_back(r.filename, o.label, o.box);
    EXPECT_EQ(got, want);
  }
}

TEST(Csv, MalformedRowNamesLine) {
  std::istringstream in(std::string(kCsvHeader) + "\na.jpg,10,10,sb_DB,1,2,x,4\n");
  try {
    read_annotation_csv(in, "t.csv");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.where()).find("t.csv:2"), std::string::npos);
  }
}

TEST(Split, ThousandGivesEightHundred) {
  std::mt19937_64 rng(62);
  const auto records = random_records(rng, 1000);
  const auto s = split_dataset(records, 0.8, 7);
  EXPECT_EQ(s.train.size(), 800u);
  EXPECT_EQ(s.test.size(), 200u);
}

TEST(Split, RoundingAndDeterminism) {
  std::mt19937_64 rng(63);
  const auto records = random_records(rng, 5);
  const auto a = split_dataset(records, 0.8, 3);
  EXPECT_EQ(a.train.size(), 4u);
  EXPECT_EQ(a.test.size(), 1u);
  const auto b = split_dataset(records, 0.8, 3);
  EXPECT_EQ(a.train, b.train);
  EXPECT_EQ(a.test, b.test);
  EXPECT_THROW(split_dataset(records, 1.0, 3), InvalidArgument);
  EXPECT_THROW(split_dataset(records, 0.0, 3), InvalidArgument);
}

TEST(Split, DisjointAndCompleteOverSeeds) {
  std::mt19937_64 rng(64);
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto records = random_records(rng, 1 + static_cast<int>(seed) * 3);
    const auto s = split_dataset(records, 0.7, seed);
    std::multiset<std::string> names;
    for (const auto& r : s.train) names.insert(r.filename);
    for (const auto& r : s.test) names.insert(r.filename);
    std::multiset<std::string> want;
    for (const auto& r : records) want.insert(r.filename);
    EXPECT_EQ(names, want);
  }
}

TEST(Split, PermutationIsStable) {
  // Pinned: splits must not drift across platforms or releases.
  EXPECT_EQ(seeded_permutation(8, 42), (std::vector<std::size_t>{7, 0, 5, 1, 2, 4, 3, 6}));
  auto p = seeded_permutation(50, 9);
  std::sort(p.begin(), p.end());
  for (std::size_t i = 0; i < p.size(); ++i) EXPECT_EQ(p[i], i);
}

TEST(Augment, PhotometricIdentities) {
  const Frame f = noise_frame(1);
  const std::vector<AxisAlignedBox> boxes = {{1, 2, 30, 40}};
  for (auto [kind, v] : {std::pair{AugmentationKind::kBrightness, 0.0},
                         std::pair{AugmentationKind::kContrast, 1.0},
                         std::pair{AugmentationKind::kHue, 0.0},
                         std::pair{AugmentationKind::kSaturation, 1.0}}) {
    AugmentationSpec s{kind, v, v, 0.25, 5};
    const auto out = augment(f, boxes, s);
    EXPECT_EQ(out.frame, f) << to_string(kind);
    EXPECT_EQ(out.boxes, boxes);
  }
}

TEST(Augment, PhotometricKeepsShapeAndBoxes) {
  const Frame f = noise_frame(2);
  const std::vector<AxisAlignedBox> boxes = {{1, 2, 30, 40}, {5, 5, 9, 9}};
  for (auto kind : {AugmentationKind::kBrightness, AugmentationKind::kContrast,
                    AugmentationKind::kHue, AugmentationKind::kSaturation}) {
    const auto out = augment(f, boxes, AugmentationSpec::defaults(kind, 99));
    EXPECT_EQ(out.frame.width(), f.width());
    EXPECT_EQ(out.frame.height(), f.height());
    EXPECT_EQ(out.boxes, boxes);
  }
  AugmentationSpec b{AugmentationKind::kBrightness, 300, 300, 0.25, 0};
  EXPECT_THROW(b.validate(), InvalidArgument);
  const auto bright = augment(f, {}, {AugmentationKind::kBrightness, 255, 255, 0.25, 0});
  for (auto p : bright.frame.pixels()) EXPECT_EQ(p, 255);
}

TEST(Augment, FullWindowCropIsIdentity) {
  const Frame f = noise_frame(3);
  const std::vector<AxisAlignedBox> boxes = {{1, 2, 30, 40}};
  const auto out = augment(f, boxes, {AugmentationKind::kRandomCrop, 1.0, 1.0, 0.25, 4});
  EXPECT_EQ(out.frame, f);
  EXPECT_EQ(out.boxes, boxes);
}

TEST(Augment, CropBoxesMatchIntervalIntersection) {
  std::mt19937_64 rng(65);
  std::uniform_real_distribution<double> u(0, 200), s(1, 80);
  for (int t = 0; t < 300; ++t) {
    const double wx = u(rng), wy = u(rng);
    const AxisAlignedBox window{wx, wy, wx + 20 + u(rng), wy + 20 + u(rng)};
    std::vector<AxisAlignedBox> boxes;
    for (int i = 0; i < 6; ++i) {
      const double x = u(rng), y = u(rng);
      boxes.push_back({x, y, x + s(rng), y + s(rng)});
    }
    std::vector<AxisAlignedBox> want;
    for (const auto& b : boxes)
      if (auto c = oracle::window_clip(b, window, 0.25)) want.push_back(*c);
    EXPECT_EQ(crop_boxes(boxes, window, 0.25), want);
  }
}

TEST(Augment, RandomCropBoxesInsideOutput) {
  std::mt19937_64 rng(66);
  const Frame f = noise_frame(4, 200, 150);
  std::uniform_real_distribution<double> u(0, 150), s(5, 60);
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    std::vector<AxisAlignedBox> boxes;
    for (int i = 0; i < 4; ++i) {
      const double x = u(rng), y = u(rng) * 0.7;
      boxes.push_back(clip_box({x, y, x + s(rng), y + s(rng)}, 200, 150));
    }
    const auto out = augment(f, boxes, AugmentationSpec::defaults(AugmentationKind::kRandomCrop, seed));
    EXPECT_GE(out.frame.width(), 1);
    EXPECT_LE(out.boxes.size(), boxes.size());
    const AxisAlignedBox frame_box{0, 0, double(out.frame.width()), double(out.frame.height())};
    for (const auto& b : out.boxes) {
      EXPECT_TRUE(b.valid());
      EXPECT_TRUE(frame_box.contains(b));
    }
    EXPECT_EQ(augment(f, boxes, AugmentationSpec::defaults(AugmentationKind::kRandomCrop, seed)).frame,
              out.frame);
  }
}

TEST(Augment, KindNames) {
  EXPECT_EQ(augmentation_kind_from_string("random-crop"), AugmentationKind::kRandomCrop);
  EXPECT_EQ(augmentation_kind_from_string(to_string(AugmentationKind::kHue)), AugmentationKind::kHue);
  EXPECT_THROW(augmentation_kind_from_string("blur"), InvalidArgument);
}

TEST(TrainingConfig, DefaultsEmitted) {
  const auto d = temp_dir("train");
  emit_training_config(TrainingConfig{}, d / "train.json");
  std::ifstream in(d / "train.json");
  const auto j = nlohmann::json::parse(in);
  EXPECT_EQ(j.at("model").at("num_classes"), 1);
  EXPECT_EQ(j.at("train_config").at("batch_size"), 32);
  EXPECT_EQ(j.at("train_config").at("learning_rate"), 0.0001);
  EXPECT_EQ(j.at("train_config").at("dropout_probability"), 0.8);
  EXPECT_EQ(j.at("train_config").at("checkpoint_step"), 16000);
  EXPECT_EQ(j.at("label_map").at(0).at("name"), "sb_DB");
}

TEST(TrainingConfig, RoundTripAndRejection) {
  const auto d = temp_dir("train_rt");
  TrainingDocument doc;
  doc.config.batch_size = 16;
  doc.config.augmentations.push_back({AugmentationKind::kRandomCrop, 0.7, 0.9, 0.3, 12});
  doc.train_records = "data/train.csv";
  doc.test_records = "data/test.csv";
  emit_training_config(doc, d / "doc.json");
  EXPECT_EQ(load_training_config(d / "doc.json"), doc);

  TrainingConfig bad;
  bad.dropout_probability = 1.5;
  EXPECT_THROW(emit_training_config(bad, d / "bad.json"), InvalidArgument);
  EXPECT_FALSE(fs::exists(d / "bad.json"));
  EXPECT_THROW(emit_training_config(TrainingConfig{}, "/nonexistent/dir/x.json"), IoError);
}
