#pragma once

#include "swapread/core_types.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

namespace swapread {

using Rgb = std::array<std::uint8_t, 3>;

struct SceneText {
  std::string text;
  Point2 anchor{0, 0};  // top-left of the first glyph, integer pixels
  int text_height = 14;
  Rgb color{0, 0, 0};
};

struct SceneRect {
  AxisAlignedBox box;  // integer pixel bounds
  Rgb color{128, 128, 128};
};

/// Synthetic swap-body scene: a filled, bordered rectangle carrying the code text in
/// its lower half, optional distractors and Gaussian noise.
struct SceneSpec {
  int canvas_width = 800;
  int canvas_height = 600;
  Rgb background{200, 205, 210};
  AxisAlignedBox swap_body{100, 150, 500, 350};
  Rgb body_fill{235, 235, 230};
  Rgb body_border{60, 60, 70};
  int border_thickness = 3;
  std::string code = "SJSB123456";
  int text_height = 28;
  Point2 text_anchor{140, 280};
  Rgb text_color{20, 20, 20};
  std::vector<SceneRect> distractor_boxes;
  std::vector<SceneText> distractor_texts;
  double noise_level = 0;  // Gaussian sigma in 8-bit units
  std::uint64_t seed = 0;
};

struct SceneTruth {
  AxisAlignedBox detection_box;
  AxisAlignedBox text_box;
  std::string code;
};

struct RenderedScene {
  Frame frame;
  SceneTruth truth;
};

// Built-in 5x7 glyphs are scaled by floor(text_height / 7); the drawn text is
// exactly 7 * scale pixels tall and each glyph advances 6 * scale pixels.
int glyph_scale(int text_height);
AxisAlignedBox text_extent(const std::string& text, const Point2& anchor, int text_height);
bool has_glyph(char c);

// Throws SpecInfeasible when the code text does not fit strictly inside the lower
// half of the swap body, or the body does not fit on the canvas.
void validate_scene(const SceneSpec& spec);
RenderedScene render(const SceneSpec& spec);

struct SuiteEntry {
  SceneSpec spec;
  RenderedScene scene;
};

std::vector<SuiteEntry> generate_suite(int n, std::uint64_t seed);

// Writes scene_NNN.png files (via the supplied writer), truth.csv in the annotation
// CSV format and codes.csv with `filename,code,xmin,ymin,xmax,ymax` text boxes.
using ImageWriter = std::function<void(const std::filesystem::path&, const Frame&)>;
void write_suite(const std::vector<SuiteEntry>& suite, const std::filesystem::path& dir,
                 ImageWriter writer);

}  // namespace swapread
