#include "swapread/adapters.hpp"

#include "swapread/errors.hpp"
#include "swapread/io.hpp"

#include <opencv2/dnn.hpp>
#include <opencv2/imgproc.hpp>

#include <array>
#include <cstdio>
#include <filesystem>
#include <random>
#include <sstream>

namespace swapread::io {

namespace fs = std::filesystem;

namespace {

cv::Mat to_bgr(const Frame& frame) {
  const int type = frame.channels() == 1 ? CV_8UC1 : CV_8UC3;
  cv::Mat view(frame.height(), frame.width(), type, const_cast<std::uint8_t*>(frame.pixels().data()));
  cv::Mat bgr;
  cv::cvtColor(view, bgr, frame.channels() == 1 ? cv::COLOR_GRAY2BGR : cv::COLOR_RGB2BGR);
  return bgr;
}

}  // namespace

// ---------------------------------------------------------------------------

struct OpenCvSsdDetector::Impl {
  cv::dnn::Net net;
  cv::Size input;
};

OpenCvSsdDetector::OpenCvSsdDetector(const fs::path& model, const fs::path& config, LabelMap labels,
                                     int input_width, int input_height)
    : impl_(std::make_unique<Impl>()), labels_(std::move(labels)) {
  if (!fs::is_regular_file(model)) throw BackendFailure("detector model not found: " + model.string());
  try {
    impl_->net = cv::dnn::readNet(model.string(), config.empty() ? std::string{} : config.string());
  } catch (const cv::Exception& e) {
    throw BackendFailure(std::string("cannot load detector model: ") + e.what());
  }
  impl_->input = {input_width, input_height};
}

OpenCvSsdDetector::~OpenCvSsdDetector() = default;

std::optional<std::pair<int, int>> OpenCvSsdDetector::expected_input() const {
  return std::pair{impl_->input.width, impl_->input.height};
}

std::vector<Detection> OpenCvSsdDetector::run(const Frame& frame) {
  cv::Mat out;
  try {
    const cv::Mat blob = cv::dnn::blobFromImage(to_bgr(frame), 1.0, impl_->input, cv::Scalar(),
                                                /*swapRB=*/true, /*crop=*/false);
    impl_->net.setInput(blob);
    out = impl_->net.forward();
  } catch (const cv::Exception& e) {
    throw BackendFailure(std::string("opencv-ssd: ") + e.what());
  }
  if (out.dims != 4 || out.size[3] != 7) throw BackendFailure("opencv-ssd: unexpected output shape");

  const cv::Mat rows(out.size[2], 7, CV_32F, out.ptr<float>());
  std::vector<Detection> dets;
  for (int i = 0; i < rows.rows; ++i) {
    const float* r = rows.ptr<float>(i);
    const auto label = labels_.name_of(static_cast<int>(r[1]));
    if (!label) continue;
    dets.push_back({{r[3] * double(frame.width()), r[4] * double(frame.height()),
                     r[5] * double(frame.width()), r[6] * double(frame.height())},
                    *label,
                    std::clamp(double(r[2]), 0.0, 1.0)});
  }
  return dets;
}

// ---------------------------------------------------------------------------

struct OpenCvEastDetector::Impl {
  cv::dnn::Net net;
};

OpenCvEastDetector::OpenCvEastDetector(const fs::path& model) : impl_(std::make_unique<Impl>()) {
  if (!fs::is_regular_file(model)) throw BackendFailure("EAST model not found: " + model.string());
  try {
    impl_->net = cv::dnn::readNet(model.string());
  } catch (const cv::Exception& e) {
    throw BackendFailure(std::string("cannot load EAST model: ") + e.what());
  }
}

OpenCvEastDetector::~OpenCvEastDetector() = default;

EastMaps OpenCvEastDetector::run(const RoiCrop& crop) {
  std::vector<cv::Mat> outs;
  try {
    const auto& px = crop.pixels;
    const cv::Mat blob =
        cv::dnn::blobFromImage(to_bgr(px), 1.0, cv::Size(px.width(), px.height()),
                               cv::Scalar(123.68, 116.78, 103.94), /*swapRB=*/true, /*crop=*/false);
    impl_->net.setInput(blob);
    const std::vector<std::string> names = {"feature_fusion/Conv_7/Sigmoid",
                                            "feature_fusion/concat_3"};
    impl_->net.forward(outs, names);
  } catch (const cv::Exception& e) {
    throw BackendFailure(std::string("opencv-east: ") + e.what());
  }
  const cv::Mat& scores = outs.at(0);
  const cv::Mat& geometry = outs.at(1);
  if (scores.dims != 4 || geometry.dims != 4 || geometry.size[1] != 5 ||
      scores.size[2] != geometry.size[2] || scores.size[3] != geometry.size[3])
    throw MapShapeError("opencv-east: unexpected output shapes");

  const int rows = scores.size[2];
  const int cols = scores.size[3];
  EastMaps maps(rows, cols);
  for (int y = 0; y < rows; ++y) {
    const float* s = scores.ptr<float>(0, 0, y);
    for (int x = 0; x < cols; ++x) maps.score(y, x) = std::clamp(s[x], 0.0f, 1.0f);
    for (int ch = 0; ch < 5; ++ch) {
      const float* g = geometry.ptr<float>(0, ch, y);
      for (int x = 0; x < cols; ++x) {
        // The model's angle turns the other way round in pixel coordinates.
        maps.geometry[ch](y, x) = ch == EastMaps::kAngle ? -g[x] : std::max(g[x], 0.0f);
      }
    }
  }
  return maps;
}

// ---------------------------------------------------------------------------

namespace {

std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') out += "'\\''";
    else out += c;
  }
  return out + "'";
}

struct PipeResult {
  int status = -1;
  std::string output;
};

PipeResult run_command(const std::string& cmd) {
  PipeResult result;
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (!pipe) return result;
  std::array<char, 4096> buf{};
  std::size_t n = 0;
  while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) result.output.append(buf.data(), n);
  result.status = ::pclose(pipe);
  return result;
}

class TempFile {
 public:
  explicit TempFile(const std::string& ext) {
    std::random_device rd;
    path_ = fs::temp_directory_path() /
            ("swapread_ocr_" + std::to_string(rd()) + "_" + std::to_string(rd()) + ext);
  }
  ~TempFile() {
    std::error_code ec;
    fs::remove(path_, ec);
  }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

}  // namespace

TesseractCliEngine::TesseractCliEngine(std::string executable) : executable_(std::move(executable)) {
  if (!available(executable_)) throw EngineUnavailable("OCR executable not runnable: " + executable_);
}

bool TesseractCliEngine::available(const std::string& executable) {
  const auto r = run_command(shell_quote(executable) + " --version 2>&1");
  return r.status == 0;
}

OcrResult parse_tesseract_tsv(const std::string& tsv) {
  std::istringstream in(tsv);
  std::string line;
  std::string text;
  double weighted = 0;
  std::size_t chars = 0;
  bool header = true;
  while (std::getline(in, line)) {
    if (header) {
      header = false;
      continue;
    }
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::vector<std::string> cols;
    std::string col;
    std::istringstream ls(line);
    while (std::getline(ls, col, '\t')) cols.push_back(col);
    if (cols.size() < 12 || cols[0] != "5") continue;
    const std::string& word = cols[11];
    double conf = -1;
    try {
      conf = std::stod(cols[10]);
    } catch (const std::exception&) {
      continue;
    }
    if (conf < 0 || word.find_first_not_of(' ') == std::string::npos) continue;
    if (!text.empty()) text += ' ';
    text += word;
    weighted += conf * static_cast<double>(word.size());
    chars += word.size();
  }
  if (chars == 0) return {};
  return {text, std::clamp(weighted / static_cast<double>(chars) / 100.0, 0.0, 1.0)};
}

OcrResult TesseractCliEngine::read_line(const OcrRequest& request, const OcrConfig& cfg) {
  TempFile image(".png");
  write_image(image.path(), request.gray);
  // LSTM-only engine and single-line segmentation are the only modes offered.
  const std::string cmd = shell_quote(executable_) + " " + shell_quote(image.path().string()) +
                          " stdout -l " + shell_quote(cfg.language) + " --oem 1 --psm 7 tsv 2>/dev/null";
  const auto r = run_command(cmd);
  if (r.status != 0) throw EngineFailure("tesseract exited with status " + std::to_string(r.status));
  return parse_tesseract_tsv(r.output);
}

}  // namespace swapread::io
