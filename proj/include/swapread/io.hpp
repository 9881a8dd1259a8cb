#pragma once

#include "swapread/core_types.hpp"
#include "swapread/pipeline.hpp"

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

namespace swapread::io {

// Decodes any format OpenCV can read into a 3-channel RGB frame. Throws IoError.
Frame read_image(const std::filesystem::path& path);
// Encodes by extension (PNG recommended for byte-stable output). Throws IoError.
void write_image(const std::filesystem::path& path, const Frame& frame);

bool is_image_file(const std::filesystem::path& path);

/// Sorted image files of a directory, one frame each.
class DirectoryFrameSource final : public FrameSource {
 public:
  explicit DirectoryFrameSource(const std::filesystem::path& dir);
  std::optional<Frame> next() override;
  std::string current_source() const override;
  const std::vector<std::filesystem::path>& files() const { return files_; }

 private:
  std::vector<std::filesystem::path> files_;
  std::size_t pos_ = 0;
};

/// Frames decoded from a video container by OpenCV's videoio.
class VideoFileFrameSource final : public FrameSource {
 public:
  explicit VideoFileFrameSource(const std::filesystem::path& path);
  ~VideoFileFrameSource() override;
  std::optional<Frame> next() override;
  std::string current_source() const override;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// `count` uniform frames; used for scripted stub runs.
class BlankFrameSource final : public FrameSource {
 public:
  BlankFrameSource(std::size_t count, int width, int height, std::uint8_t value = 255);
  std::optional<Frame> next() override;

 private:
  std::size_t count_;
  int width_;
  int height_;
  std::uint8_t value_;
  std::size_t pos_ = 0;
};

// Accepts a directory of images, a single image, a video file, or
// `blank:N[:WxH]`. Throws IoError when the source cannot be opened.
std::unique_ptr<FrameSource> open_frame_source(const std::string& spec);

}  // namespace swapread::io
