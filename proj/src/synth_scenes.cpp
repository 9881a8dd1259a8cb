#include "swapread/synth_scenes.hpp"

#include "swapread/data_tools.hpp"
#include "swapread/errors.hpp"
#include "swapread/roi_gating.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <string_view>

namespace swapread {

namespace {

using Glyph = std::array<std::string_view, 7>;

// clang-format off
const std::map<char, Glyph>& font() {
  static const std::map<char, Glyph> glyphs = {
    {'0', {".###.", "#...#", "#..##", "#.#.#", "##..#", "#...#", ".###."}},
    {'1', {"..#..", ".##..", "..#..", "..#..", "..#..", "..#..", ".###."}},
    {'2', {".###.", "#...#", "....#", "...#.", "..#..", ".#...", "#####"}},
    {'3', {"#####", "...#.", "..#..", "...#.", "....#", "#...#", ".###."}},
    {'4', {"...#.", "..##.", ".#.#.", "#..#.", "#####", "...#.", "...#."}},
    {'5', {"#####", "#....", "####.", "....#", "....#", "#...#", ".###."}},
    {'6', {"..##.", ".#...", "#....", "####.", "#...#", "#...#", ".###."}},
    {'7', {"#####", "....#", "...#.", "..#..", ".#...", ".#...", ".#..."}},
    {'8', {".###.", "#...#", "#...#", ".###.", "#...#", "#...#", ".###."}},
    {'9', {".###.", "#...#", "#...#", ".####", "....#", "...#.", ".##.."}},
    {'A', {".###.", "#...#", "#...#", "#####", "#...#", "#...#", "#...#"}},
    {'B', {"####.", "#...#", "#...#", "####.", "#...#", "#...#", "####."}},
    {'C', {".###.", "#...#", "#....", "#....", "#....", "#...#", ".###."}},
    {'D', {"###..", "#..#.", "#...#", "#...#", "#...#", "#..#.", "###.."}},
    {'E', {"#####", "#....", "#....", "####.", "#....", "#....", "#####"}},
    {'F', {"#####", "#....", "#....", "####.", "#....", "#....", "#...."}},
    {'G', {".###.", "#...#", "#....", "#.###", "#...#", "#...#", ".####"}},
    {'H', {"#...#", "#...#", "#...#", "#####", "#...#", "#...#", "#...#"}},
    {'I', {".###.", "..#..", "..#..", "..#..", "..#..", "..#..", ".###."}},
    {'J', {"..###", "...#.", "...#.", "...#.", "...#.", "#..#.", ".##.."}},
    {'K', {"#...#", "#..#.", "#.#..", "##...", "#.#..", "#..#.", "#...#"}},
    {'L', {"#....", "#....", "#....", "#....", "#....", "#....", "#####"}},
    {'M', {"#...#", "##.##", "#.#.#", "#.#.#", "#...#", "#...#", "#...#"}},
    {'N', {"#...#", "#...#", "##..#", "#.#.#", "#..##", "#...#", "#...#"}},
    {'O', {".###.", "#...#", "#...#", "#...#", "#...#", "#...#", ".###."}},
    {'P', {"####.", "#...#", "#...#", "####.", "#....", "#....", "#...."}},
    {'Q', {".###.", "#...#", "#...#", "#...#", "#.#.#", "#..#.", ".##.#"}},
    {'R', {"####.", "#...#", "#...#", "####.", "#.#..", "#..#.", "#...#"}},
    {'S', {".####", "#....", "#....", ".###.", "....#", "....#", "####."}},
    {'T', {"#####", "..#..", "..#..", "..#..", "..#..", "..#..", "..#.."}},
    {'U', {"#...#", "#...#", "#...#", "#...#", "#...#", "#...#", ".###."}},
    {'V', {"#...#", "#...#", "#...#", "#...#", "#...#", ".#.#.", "..#.."}},
    {'W', {"#...#", "#...#", "#...#", "#.#.#", "#.#.#", "#.#.#", ".#.#."}},
    {'X', {"#...#", "#...#", ".#.#.", "..#..", ".#.#.", "#...#", "#...#"}},
    {'Y', {"#...#", "#...#", ".#.#.", "..#..", "..#..", "..#..", "..#.."}},
    {'Z', {"#####", "....#", "...#.", "..#..", ".#...", "#....", "#####"}},
    {'-', {".....", ".....", ".....", "#####", ".....", ".....", "....."}},
    {' ', {".....", ".....", ".....", ".....", ".....", ".....", "....."}},
  };
  return glyphs;
}
// clang-format on

void fill_rect(Frame& f, int x0, int y0, int x1, int y1, const Rgb& color) {
  x0 = std::max(x0, 0);
  y0 = std::max(y0, 0);
  x1 = std::min(x1, f.width());
  y1 = std::min(y1, f.height());
  for (int y = y0; y < y1; ++y)
    for (int x = x0; x < x1; ++x)
      for (int c = 0; c < 3; ++c) f.at(x, y, c) = color[c];
}

void fill_rect(Frame& f, const AxisAlignedBox& b, const Rgb& color) {
  fill_rect(f, static_cast<int>(b.x_min), static_cast<int>(b.y_min), static_cast<int>(b.x_max),
            static_cast<int>(b.y_max), color);
}

void draw_text(Frame& f, const std::string& text, const Point2& anchor, int text_height,
               const Rgb& color) {
  const int s = glyph_scale(text_height);
  const int ax = static_cast<int>(anchor.x());
  const int ay = static_cast<int>(anchor.y());
  for (std::size_t i = 0; i < text.size(); ++i) {
    const auto& glyph = font().at(text[i]);
    const int gx0 = ax + static_cast<int>(i) * 6 * s;
    for (int row = 0; row < 7; ++row)
      for (int col = 0; col < 5; ++col)
        if (glyph[row][col] == '#')
          fill_rect(f, gx0 + col * s, ay + row * s, gx0 + (col + 1) * s, ay + (row + 1) * s, color);
  }
}

bool is_integral(const AxisAlignedBox& b) {
  return b.x_min == std::floor(b.x_min) && b.y_min == std::floor(b.y_min) &&
         b.x_max == std::floor(b.x_max) && b.y_max == std::floor(b.y_max);
}

// Box-Muller over mt19937_64 so the noise is identical on every platform.
class GaussianNoise {
 public:
  explicit GaussianNoise(std::uint64_t seed) : rng_(seed) {}
  double next() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = 0;
    do {
      u1 = uniform();
    } while (u1 <= 0);
    const double u2 = uniform();
    const double r = std::sqrt(-2 * std::log(u1));
    spare_ = r * std::sin(2 * std::numbers::pi * u2);
    has_spare_ = true;
    return r * std::cos(2 * std::numbers::pi * u2);
  }

 private:
  double uniform() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }
  std::mt19937_64 rng_;
  double spare_ = 0;
  bool has_spare_ = false;
};

}  // namespace

bool has_glyph(char c) { return font().contains(c); }

int glyph_scale(int text_height) { return std::max(1, text_height / 7); }

AxisAlignedBox text_extent(const std::string& text, const Point2& anchor, int text_height) {
  const int s = glyph_scale(text_height);
  const double w = text.empty() ? 0 : static_cast<double>(text.size()) * 6 * s - s;
  return {anchor.x(), anchor.y(), anchor.x() + w, anchor.y() + 7.0 * s};
}

void validate_scene(const SceneSpec& spec) {
  if (spec.canvas_width < 1 || spec.canvas_height < 1) throw SpecInfeasible("empty canvas");
  const AxisAlignedBox canvas{0, 0, double(spec.canvas_width), double(spec.canvas_height)};
  if (!spec.swap_body.valid() || !is_integral(spec.swap_body) || !canvas.contains(spec.swap_body))
    throw SpecInfeasible("swap body must be an integer box inside the canvas");
  if (spec.code.empty()) throw SpecInfeasible("empty code");
  if (spec.text_height < 7) throw SpecInfeasible("text_height must be >= 7");
  if (spec.text_anchor != spec.text_anchor.array().floor().matrix())
    throw SpecInfeasible("text anchor must be on integer pixels");
  for (char c : spec.code)
    if (!has_glyph(c)) throw SpecInfeasible(std::string("no glyph for '") + c + "'");
  for (const auto& t : spec.distractor_texts)
    for (char c : t.text)
      if (!has_glyph(c)) throw SpecInfeasible(std::string("no glyph for '") + c + "'");

  const auto half = lower_half(spec.swap_body);
  const auto tb = text_extent(spec.code, spec.text_anchor, spec.text_height);
  if (!(tb.x_min > half.x_min && tb.y_min > half.y_min && tb.x_max < half.x_max &&
        tb.y_max < half.y_max))
    throw SpecInfeasible("code text does not fit strictly inside the lower half of the swap body");
  if (spec.noise_level < 0) throw SpecInfeasible("noise_level must be >= 0");
}

RenderedScene render(const SceneSpec& spec) {
  validate_scene(spec);
  Frame frame(spec.canvas_width, spec.canvas_height, 3);
  fill_rect(frame, 0, 0, spec.canvas_width, spec.canvas_height, spec.background);

  for (const auto& d : spec.distractor_boxes) fill_rect(frame, d.box, d.color);

  const auto& body = spec.swap_body;
  fill_rect(frame, body, spec.body_border);
  const double t = spec.border_thickness;
  if (body.width() > 2 * t && body.height() > 2 * t)
    fill_rect(frame, {body.x_min + t, body.y_min + t, body.x_max - t, body.y_max - t}, spec.body_fill);

  for (const auto& d : spec.distractor_texts) draw_text(frame, d.text, d.anchor, d.text_height, d.color);
  draw_text(frame, spec.code, spec.text_anchor, spec.text_height, spec.text_color);

  if (spec.noise_level > 0) {
    GaussianNoise noise(spec.seed);
    for (auto& p : frame.pixels())
      p = static_cast<std::uint8_t>(
          std::clamp(std::lround(p + spec.noise_level * noise.next()), 0L, 255L));
  }

  return {std::move(frame),
          {spec.swap_body, text_extent(spec.code, spec.text_anchor, spec.text_height), spec.code}};
}

namespace {

class SuiteRng {
 public:
  explicit SuiteRng(std::uint64_t seed) : rng_(seed) {}
  int integer(int lo, int hi) {
    if (hi <= lo) return lo;
    return lo + static_cast<int>(rng_() % static_cast<std::uint64_t>(hi - lo + 1));
  }
  double real(double lo, double hi) {
    return lo + (hi - lo) * (static_cast<double>(rng_() >> 11) * 0x1.0p-53);
  }
  std::uint64_t raw() { return rng_(); }

 private:
  std::mt19937_64 rng_;
};

Rgb light(SuiteRng& r) {
  return {static_cast<std::uint8_t>(r.integer(200, 250)), static_cast<std::uint8_t>(r.integer(200, 250)),
          static_cast<std::uint8_t>(r.integer(200, 250))};
}

Rgb mid(SuiteRng& r) {
  return {static_cast<std::uint8_t>(r.integer(90, 170)), static_cast<std::uint8_t>(r.integer(90, 170)),
          static_cast<std::uint8_t>(r.integer(90, 170))};
}

SceneSpec random_spec(SuiteRng& r, std::set<std::string>& used_codes) {
  constexpr int kMargin = 20;
  constexpr int kPad = 8;
  SceneSpec spec;
  spec.canvas_width = 800;
  spec.canvas_height = 600;
  spec.background = mid(r);
  spec.body_fill = light(r);
  spec.body_border = {static_cast<std::uint8_t>(r.integer(20, 80)),
                      static_cast<std::uint8_t>(r.integer(20, 80)),
                      static_cast<std::uint8_t>(r.integer(20, 80))};
  spec.text_color = {static_cast<std::uint8_t>(r.integer(0, 40)),
                     static_cast<std::uint8_t>(r.integer(0, 40)),
                     static_cast<std::uint8_t>(r.integer(0, 40))};

  do {
    const int digits = r.integer(4, 7);
    spec.code = r.integer(0, 1) == 0 ? "SJSB" : "SCSB";
    for (int i = 0; i < digits; ++i) spec.code += static_cast<char>('0' + r.integer(0, 9));
  } while (!used_codes.insert(spec.code).second);

  spec.text_height = r.integer(24, 42);
  const int s = glyph_scale(spec.text_height);
  const int text_w = static_cast<int>(spec.code.size()) * 6 * s - s;
  const int text_h = 7 * s;

  const int max_w = spec.canvas_width - 2 * kMargin;
  int body_w = r.integer(text_w + 2 * kPad + 24, std::min(max_w, text_w + 320));
  int body_h = static_cast<int>(std::lround(body_w / r.real(1.6, 3.0)));
  body_h = std::max(body_h, 2 * (text_h + 2 * kPad));
  if (body_w < 1.6 * body_h) body_w = std::min(max_w, static_cast<int>(std::ceil(1.6 * body_h)));

  const int x0 = r.integer(kMargin, spec.canvas_width - kMargin - body_w);
  const int y0 = r.integer(kMargin, spec.canvas_height - kMargin - body_h);
  spec.swap_body = {double(x0), double(y0), double(x0 + body_w), double(y0 + body_h)};

  const int mid_y = y0 + (body_h + 1) / 2;
  const int tx = r.integer(x0 + kPad, x0 + body_w - kPad - text_w);
  const int ty = r.integer(mid_y + kPad, y0 + body_h - kPad - text_h);
  spec.text_anchor = {double(tx), double(ty)};

  // Fleet marking in the upper half, which the lower-half crop must ignore.
  const std::string marking = r.integer(0, 1) ? "LOGISTIK" : "CARGO";
  const int mark_h = 14;
  const auto mark_ext = text_extent(marking, {0, 0}, mark_h);
  if (mark_ext.width() + 2 * kPad < body_w && mark_ext.height() + 2 * kPad < body_h / 2.0 - 2) {
    spec.distractor_texts.push_back(
        {marking, {double(x0 + kPad), double(y0 + kPad)}, mark_h, spec.body_border});
  }

  const int n_boxes = r.integer(0, 2);
  for (int i = 0; i < n_boxes; ++i) {
    const int w = r.integer(30, 150);
    const int h = r.integer(30, 150);
    const int bx = r.integer(0, spec.canvas_width - w);
    const int by = r.integer(0, spec.canvas_height - h);
    spec.distractor_boxes.push_back({{double(bx), double(by), double(bx + w), double(by + h)}, mid(r)});
  }

  spec.noise_level = r.real(0.0, 3.0);
  spec.seed = r.raw();
  return spec;
}

}  // namespace

std::vector<SuiteEntry> generate_suite(int n, std::uint64_t seed) {
  if (n < 1) throw InvalidArgument("suite size must be >= 1");
  SuiteRng rng(seed);
  std::set<std::string> used;
  std::vector<SuiteEntry> suite;
  suite.reserve(n);
  for (int i = 0; i < n; ++i) {
    auto spec = random_spec(rng, used);
    auto scene = render(spec);
    scene.frame.frame_index = static_cast<std::size_t>(i);
    suite.push_back({std::move(spec), std::move(scene)});
  }
  return suite;
}

void write_suite(const std::vector<SuiteEntry>& suite, const std::filesystem::path& dir,
                 ImageWriter writer) {
  std::filesystem::create_directories(dir);
  std::vector<AnnotationRecord> records;
  std::ofstream codes(dir / "codes.csv");
  if (!codes) throw IoError("cannot write " + (dir / "codes.csv").string());
  codes << "filename,code,xmin,ymin,xmax,ymax\n";

  for (std::size_t i = 0; i < suite.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "scene_%03zu.png", i);
    const auto& scene = suite[i].scene;
    writer(dir / name, scene.frame);
    records.push_back({name, scene.frame.width(), scene.frame.height(),
                       {{kSwapBodyLabel, scene.truth.detection_box}}, {}});
    const auto& tb = scene.truth.text_box;
    codes << name << ',' << scene.truth.code << ',' << tb.x_min << ',' << tb.y_min << ','
          << tb.x_max << ',' << tb.y_max << '\n';
  }
  annotations_to_csv(records, dir / "truth.csv");
}

}  // namespace swapread
