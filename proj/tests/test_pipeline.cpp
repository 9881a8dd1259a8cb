#include "oracles.hpp"

#include "swapread/data_tools.hpp"
#include "swapread/errors.hpp"
#include "swapread/pipeline.hpp"
#include "swapread/report_io.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace swapread;

namespace {

struct Stubs {
  StubDetector det{default_label_map()};
  StubTextDetector text;
  StubOcr ocr;
  Backends view() { return {det, text, ocr}; }

  // One swap body whose code sits in the lower half.
  void body(std::size_t frame, const std::string& code, double conf = 0.995,
            AxisAlignedBox box = {100, 100, 500, 300}) {
    det.script(frame, {{box, kSwapBodyLabel, 0.9}});
    const double cy = box.y_min + 0.75 * box.height();
    text.script_regions(frame, {{{box.center().x(), cy, 200, 30, 0}, 0.9}});
    ocr.script(frame, {code, conf});
  }
};

Frame frame_at(std::size_t i) {
  Frame f(640, 480, 3, 255);
  f.frame_index = i;
  return f;
}

IluCodeReading reading(const std::string& code) {
  IluCodeReading r;
  r.prefix = code.substr(0, 4);
  r.digits = code.substr(4);
  r.confidence = 1.0;
  return r;
}

}  // namespace

TEST(PipelineConfig, DefaultsAndValidation) {
  const PipelineConfig c;
  EXPECT_EQ(c.det_score_threshold, 0.5);
  EXPECT_EQ(c.det_nms_iou, 0.5);
  EXPECT_EQ(c.aspect_min_ratio, 1.5);
  EXPECT_EQ(c.text_score_threshold, 0.5);
  EXPECT_EQ(c.text_nms_iou, 0.4);
  EXPECT_EQ(c.ocr_min_confidence, 0.99);
  EXPECT_EQ(c.window_n, 10);
  EXPECT_EQ(c.require_k, 3);
  EXPECT_EQ(c.max_text_input_side, 1280);
  PipelineConfig bad;
  bad.require_k = 11;
  EXPECT_THROW(bad.validate(), InvalidArgument);
  bad = {};
  bad.det_score_threshold = 1.5;
  EXPECT_THROW(bad.validate(), InvalidArgument);
}

TEST(ProcessImage, ScriptedBodyYieldsReading) {
  Stubs s;
  s.body(0, "SJSB123456");
  const auto r = process_image(frame_at(0), s.view(), {});
  EXPECT_EQ(r.detections.size(), 1u);
  EXPECT_EQ(r.gated_out, 0u);
  EXPECT_EQ(r.text_regions, 1u);
  ASSERT_EQ(r.readings.size(), 1u);
  EXPECT_EQ(r.readings[0].prefix, "SJSB");
  EXPECT_EQ(r.readings[0].digits, "123456");
  EXPECT_TRUE(r.errors.empty());
  // The reading region lies inside the lower half of the detection.
  EXPECT_TRUE(lower_half(r.detections[0].box).contains(r.readings[0].region));
}

TEST(ProcessImage, SquareDetectionIsGated) {
  Stubs s;
  s.body(0, "SJSB123456", 0.995, {100, 100, 300, 300});
  const auto r = process_image(frame_at(0), s.view(), {});
  EXPECT_EQ(r.detections.size(), 1u);
  EXPECT_EQ(r.gated_out, 1u);
  EXPECT_EQ(r.text_regions, 0u);
  EXPECT_TRUE(r.readings.empty());
}

TEST(ProcessImage, EmptyScriptEmptyReport) {
  Stubs s;
  const auto r = process_image(frame_at(0), s.view(), {});
  EXPECT_TRUE(r.detections.empty());
  EXPECT_EQ(r.gated_out, 0u);
  EXPECT_EQ(r.text_regions, 0u);
  EXPECT_TRUE(r.readings.empty());
  EXPECT_FALSE(r.accepted_code);
}

TEST(ProcessImage, LowConfidenceNotReported) {
  Stubs s;
  s.body(0, "SJSB123456", 0.98);
  const auto r = process_image(frame_at(0), s.view(), {});
  EXPECT_EQ(r.text_regions, 1u);
  EXPECT_TRUE(r.readings.empty());
}

TEST(ProcessImage, StageFailuresAreIsolated) {
  Stubs s;
  s.det.script(0, {{{0, 0, 300, 100}, kSwapBodyLabel, 0.9}, {{320, 300, 620, 400}, kSwapBodyLabel, 0.8}});
  s.text.script_regions(0, {{{470, 375, 200, 30, 0}, 0.9}});
  s.ocr.fail_on(0);
  const auto r = process_image(frame_at(0), s.view(), {});
  EXPECT_EQ(r.detections.size(), 2u);
  ASSERT_EQ(r.errors.size(), 1u);
  EXPECT_EQ(r.errors[0].stage, "ocr");

  Stubs t;
  t.det.fail_on(0);
  try {
    process_image(frame_at(0), t.view(), {});
    FAIL();
  } catch (const StageError& e) {
    EXPECT_EQ(e.stage(), "detect");
  }

  Stubs u;
  u.det.script(0, {{{0, 0, 300, 100}, kSwapBodyLabel, 0.9}});
  u.text.fail_on(0);
  const auto r2 = process_image(frame_at(0), u.view(), {});
  ASSERT_EQ(r2.errors.size(), 1u);
  EXPECT_EQ(r2.errors[0].stage, "text");
}

TEST(ProcessImage, ReadingsSortedByConfidence) {
  Stubs s;
  s.det.script(0, {{{0, 0, 300, 100}, kSwapBodyLabel, 0.9}, {{320, 300, 620, 400}, kSwapBodyLabel, 0.8}});
  s.text.script_regions(0, {{{150, 75, 200, 30, 0}, 0.9}, {{470, 375, 200, 30, 0}, 0.9}});
  s.ocr.script(0, {"SJSB111111", 0.991}, AxisAlignedBox{50, 60, 250, 90});
  s.ocr.script(0, {"SCSB222222", 0.999}, AxisAlignedBox{370, 360, 570, 390});
  const auto r = process_image(frame_at(0), s.view(), {});
  ASSERT_EQ(r.readings.size(), 2u);
  EXPECT_EQ(r.readings[0].code(), "SCSB222222");
  for (const auto& x : r.readings) EXPECT_GE(x.confidence, 0.99);
}

TEST(Aggregator, Degenerate) {
  TemporalAggregator a(5, 1);
  EXPECT_TRUE(aggregator_update(a, reading("SJSB1234")));
  TemporalAggregator b(4, 4);
  for (int i = 0; i < 3; ++i) EXPECT_FALSE(b.update(reading("SJSB1234")));
  EXPECT_TRUE(b.update(reading("SJSB1234")));
  EXPECT_EQ(b.window_size(), 0u);
  EXPECT_THROW(TemporalAggregator(3, 4), InvalidArgument);
}

TEST(Aggregator, TwoOfTenLosesToThree) {
  // Hand-simulated: 111111 at frames 1 and 6, 222222 at 2, 5 and 8. Only the window
  // ending at frame 8 holds three of one code.
  std::vector<std::optional<std::string>> stream(10);
  stream[1] = stream[6] = "SJSB111111";
  stream[2] = stream[5] = stream[8] = "SJSB222222";
  const auto sim = oracle::window_simulation(stream, 10, 3);
  ASSERT_EQ(sim.size(), 1u);
  EXPECT_EQ(sim[0], (std::pair<std::size_t, std::string>{8, "SJSB222222"}));

  Stubs s;
  std::vector<Frame> frames;
  for (std::size_t i = 0; i < 10; ++i) {
    frames.push_back(frame_at(i));
    if (stream[i]) s.body(i, *stream[i]);
  }
  const auto v = process_video(frames, s.view(), {});
  ASSERT_EQ(v.summary.codes.size(), 1u);
  EXPECT_EQ(v.summary.codes[0].reading.code(), "SJSB222222");
  EXPECT_EQ(v.summary.codes[0].first_frame, 8u);
  EXPECT_TRUE(v.reports[8].accepted_code);
}

TEST(Aggregator, RandomStreamsMatchWindowSimulation) {
  std::mt19937_64 rng(51);
  std::uniform_int_distribution<int> code(0, 3), nn(1, 10), len(1, 60);
  for (int t = 0; t < 300; ++t) {
    const int n = nn(rng);
    const int k = std::uniform_int_distribution<int>(1, n)(rng);
    std::vector<std::optional<std::string>> stream(len(rng));
    for (auto& x : stream)
      if (int c = code(rng); c > 0) x = "SJSB" + std::string(6, char('0' + c));
    TemporalAggregator agg(n, k);
    std::vector<std::pair<std::size_t, std::string>> got;
    for (std::size_t i = 0; i < stream.size(); ++i) {
      std::optional<IluCodeReading> r;
      if (stream[i]) r = reading(*stream[i]);
      if (auto fin = agg.update(r)) got.push_back({i, fin->code()});
      EXPECT_LE(agg.window_size(), static_cast<std::size_t>(n));
    }
    EXPECT_EQ(got, oracle::window_simulation(stream, n, k));
  }
}

TEST(ProcessVideo, ConsecutiveReadingsAcceptedAtThird) {
  Stubs s;
  std::vector<Frame> frames;
  for (std::size_t i = 0; i < 10; ++i) frames.push_back(frame_at(i));
  for (std::size_t i = 3; i <= 5; ++i) s.body(i, "SCSB204511");
  const auto v = process_video(frames, s.view(), {});
  EXPECT_EQ(v.reports.size(), 10u);
  ASSERT_EQ(v.summary.codes.size(), 1u);
  EXPECT_EQ(v.summary.codes[0].first_frame, 5u);
  EXPECT_EQ(v.summary.frames, 10u);
}

TEST(ProcessVideo, EmptyFramesNoCode) {
  Stubs s;
  std::vector<Frame> frames;
  for (std::size_t i = 0; i < 5; ++i) frames.push_back(frame_at(i));
  EXPECT_TRUE(process_video(frames, s.view(), {}).summary.codes.empty());
}

TEST(ProcessVideo, ErrorsRecordedAndStreamContinues) {
  Stubs s;
  s.det.fail_on(1);
  s.body(2, "SJSB123456");
  std::vector<Frame> frames;
  for (std::size_t i = 0; i < 4; ++i) frames.push_back(frame_at(i));
  std::size_t sunk = 0;
  const auto v = process_video(frames, s.view(), {}, [&](const FrameReport&) { ++sunk; });
  EXPECT_EQ(v.reports.size(), 4u);
  EXPECT_EQ(sunk, 4u);
  ASSERT_EQ(v.reports[1].errors.size(), 1u);
  EXPECT_EQ(v.reports[1].errors[0].stage, "detect");
  EXPECT_EQ(v.reports[2].readings.size(), 1u);
}

TEST(ReportJson, Shape) {
  Stubs s;
  s.body(0, "SJSB123456");
  auto r = process_image(frame_at(0), s.view(), {});
  r.source = "img.png";
  const auto j = report_to_json(r);
  EXPECT_EQ(j.at("frame_index"), 0);
  EXPECT_EQ(j.at("source"), "img.png");
  EXPECT_EQ(j.at("detections").at(0).at("box").size(), 4u);
  EXPECT_EQ(j.at("readings").at(0).at("prefix"), "SJSB");
  EXPECT_EQ(j.at("readings").at(0).at("digits"), "123456");
  EXPECT_TRUE(j.at("accepted_code").is_null());
  std::ostringstream line;
  write_ndjson_line(line, j);
  const std::string text = line.str();
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 1);
  EXPECT_EQ(box_from_json(box_to_json({1, 2, 3, 4})), (AxisAlignedBox{1, 2, 3, 4}));
}
