#include "swapread/io.hpp"

#include "swapread/errors.hpp"

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>
#include <opencv2/videoio.hpp>

#include <algorithm>
#include <cctype>
#include <charconv>

namespace swapread::io {

namespace fs = std::filesystem;

namespace {

Frame from_bgr(const cv::Mat& bgr) {
  cv::Mat rgb;
  if (bgr.channels() == 1) cv::cvtColor(bgr, rgb, cv::COLOR_GRAY2RGB);
  else if (bgr.channels() == 4) cv::cvtColor(bgr, rgb, cv::COLOR_BGRA2RGB);
  else cv::cvtColor(bgr, rgb, cv::COLOR_BGR2RGB);
  if (rgb.depth() != CV_8U) rgb.convertTo(rgb, CV_8U);
  if (!rgb.isContinuous()) rgb = rgb.clone();
  return Frame(rgb.cols, rgb.rows, 3,
               std::vector<std::uint8_t>(rgb.data, rgb.data + rgb.total() * rgb.elemSize()));
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

}  // namespace

Frame read_image(const fs::path& path) {
  if (!fs::is_regular_file(path)) throw IoError("cannot read image " + path.string());
  const cv::Mat img = cv::imread(path.string(), cv::IMREAD_COLOR);
  if (img.empty()) throw IoError("cannot decode image " + path.string());
  return from_bgr(img);
}

void write_image(const fs::path& path, const Frame& frame) {
  const int type = frame.channels() == 1 ? CV_8UC1 : CV_8UC3;
  cv::Mat view(frame.height(), frame.width(), type, const_cast<std::uint8_t*>(frame.pixels().data()));
  cv::Mat out;
  if (frame.channels() == 3) cv::cvtColor(view, out, cv::COLOR_RGB2BGR);
  else out = view;
  bool ok = false;
  try {
    ok = cv::imwrite(path.string(), out);
  } catch (const cv::Exception& e) {
    throw IoError("cannot write image " + path.string() + ": " + e.what());
  }
  if (!ok) throw IoError("cannot write image " + path.string());
}

bool is_image_file(const fs::path& path) {
  static const std::vector<std::string> exts = {".png", ".jpg", ".jpeg", ".bmp", ".tif", ".tiff", ".ppm", ".pgm"};
  const auto ext = lower(path.extension().string());
  return std::find(exts.begin(), exts.end(), ext) != exts.end();
}

DirectoryFrameSource::DirectoryFrameSource(const fs::path& dir) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw IoError("not a directory: " + dir.string());
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && is_image_file(entry.path())) files_.push_back(entry.path());
  std::sort(files_.begin(), files_.end());
}

std::optional<Frame> DirectoryFrameSource::next() {
  if (pos_ >= files_.size()) return std::nullopt;
  Frame f = read_image(files_[pos_]);
  f.frame_index = pos_++;
  return f;
}

std::string DirectoryFrameSource::current_source() const {
  return pos_ == 0 ? std::string{} : files_[pos_ - 1].filename().string();
}

struct VideoFileFrameSource::Impl {
  cv::VideoCapture cap;
  std::string name;
  std::size_t index = 0;
};

VideoFileFrameSource::VideoFileFrameSource(const fs::path& path) : impl_(std::make_unique<Impl>()) {
  if (!fs::is_regular_file(path)) throw IoError("cannot open video " + path.string());
  impl_->name = path.filename().string();
  if (!impl_->cap.open(path.string()) || !impl_->cap.isOpened())
    throw IoError("cannot decode video " + path.string());
}

VideoFileFrameSource::~VideoFileFrameSource() = default;

std::optional<Frame> VideoFileFrameSource::next() {
  cv::Mat bgr;
  if (!impl_->cap.read(bgr) || bgr.empty()) return std::nullopt;
  Frame f = from_bgr(bgr);
  f.timestamp_ms = impl_->cap.get(cv::CAP_PROP_POS_MSEC);
  f.frame_index = impl_->index++;
  return f;
}

std::string VideoFileFrameSource::current_source() const {
  return impl_->name + "#" + std::to_string(impl_->index == 0 ? 0 : impl_->index - 1);
}

BlankFrameSource::BlankFrameSource(std::size_t count, int width, int height, std::uint8_t value)
    : count_(count), width_(width), height_(height), value_(value) {
  if (width < 1 || height < 1) throw InvalidArgument("blank frame size must be >= 1");
}

std::optional<Frame> BlankFrameSource::next() {
  if (pos_ >= count_) return std::nullopt;
  Frame f(width_, height_, 3, value_);
  f.frame_index = pos_++;
  return f;
}

namespace {

class SingleImageSource final : public FrameSource {
 public:
  explicit SingleImageSource(const fs::path& path) : path_(path), frame_(read_image(path)) {}
  std::optional<Frame> next() override {
    if (done_) return std::nullopt;
    done_ = true;
    return frame_;
  }
  std::string current_source() const override { return path_.filename().string(); }

 private:
  fs::path path_;
  Frame frame_;
  bool done_ = false;
};

int parse_positive(std::string_view s, const std::string& spec) {
  int v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || v < 1)
    throw IoError("malformed frame source '" + spec + "'");
  return v;
}

}  // namespace

std::unique_ptr<FrameSource> open_frame_source(const std::string& spec) {
  constexpr std::string_view kBlank = "blank:";
  if (spec.rfind(kBlank, 0) == 0) {
    std::string_view rest(spec);
    rest.remove_prefix(kBlank.size());
    int w = 640, h = 480;
    const auto colon = rest.find(':');
    const int n = parse_positive(rest.substr(0, colon), spec);
    if (colon != std::string_view::npos) {
      const auto dims = rest.substr(colon + 1);
      const auto x = dims.find('x');
      if (x == std::string_view::npos) throw IoError("malformed frame source '" + spec + "'");
      w = parse_positive(dims.substr(0, x), spec);
      h = parse_positive(dims.substr(x + 1), spec);
    }
    return std::make_unique<BlankFrameSource>(static_cast<std::size_t>(n), w, h);
  }

  const fs::path path(spec);
  std::error_code ec;
  if (fs::is_directory(path, ec)) return std::make_unique<DirectoryFrameSource>(path);
  if (!fs::exists(path, ec)) throw IoError("frame source not found: " + spec);
  if (is_image_file(path)) return std::make_unique<SingleImageSource>(path);
  return std::make_unique<VideoFileFrameSource>(path);
}

}  // namespace swapread::io
