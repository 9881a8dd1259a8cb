#pragma once

#include "swapread/core_types.hpp"
#include "swapread/detection.hpp"

#include <cstdint>
#include <filesystem>
#include <istream>
#include <string>
#include <utility>
#include <vector>

namespace swapread {

struct AnnotatedObject {
  std::string label;
  AxisAlignedBox box;

  friend bool operator==(const AnnotatedObject&, const AnnotatedObject&) = default;
};

struct AnnotationRecord {
  std::string filename;
  int width = 0;
  int height = 0;
  std::vector<AnnotatedObject> objects;
  std::vector<std::string> warnings;  // e.g. boxes clipped to the image

  friend bool operator==(const AnnotationRecord& a, const AnnotationRecord& b) {
    return a.filename == b.filename && a.width == b.width && a.height == b.height &&
           a.objects == b.objects;
  }
};

// PascalVOC-style document (as written by LabelImg). Boxes outside the image are
// clipped with a warning; boxes that vanish entirely are dropped with a warning.
AnnotationRecord parse_annotation(const std::filesystem::path& path);
AnnotationRecord parse_annotation_xml(std::istream& in, const std::string& source = "<stream>");

inline constexpr const char* kCsvHeader = "filename,width,height,class,xmin,ymin,xmax,ymax";

// One row per object, integer coordinates. Returns the number of data rows.
std::size_t annotations_to_csv(const std::vector<AnnotationRecord>& records,
                               const std::filesystem::path& out_path);
std::size_t write_annotation_csv(const std::vector<AnnotationRecord>& records, std::ostream& out);

// Groups rows back into records, keeping first-appearance order of file names.
std::vector<AnnotationRecord> read_annotation_csv(const std::filesystem::path& path);
std::vector<AnnotationRecord> read_annotation_csv(std::istream& in,
                                                  const std::string& source = "<stream>");

struct DatasetSplit {
  std::vector<AnnotationRecord> train;
  std::vector<AnnotationRecord> test;
};

// Seeded Fisher-Yates shuffle; train gets round(n * train_fraction) records.
DatasetSplit split_dataset(const std::vector<AnnotationRecord>& records,
                           double train_fraction = 0.8, std::uint64_t seed = 0);

// Platform-independent permutation used by split_dataset.
std::vector<std::size_t> seeded_permutation(std::size_t n, std::uint64_t seed);

enum class AugmentationKind { kRandomCrop, kBrightness, kContrast, kHue, kSaturation };

std::string to_string(AugmentationKind kind);
AugmentationKind augmentation_kind_from_string(const std::string& s);

/// Parameter range sampled uniformly; lo == hi gives a fixed value.
///
///   BRIGHTNESS   additive delta in [-255, 255]
///   CONTRAST     factor about 128 in [0, 4]
///   HUE          shift in degrees in [-180, 180]
///   SATURATION   factor in [0, 4]
///   RANDOM_CROP  window scale per dimension in (0, 1]
struct AugmentationSpec {
  AugmentationKind kind = AugmentationKind::kBrightness;
  double lo = 0;
  double hi = 0;
  double min_box_retention = 0.25;  // RANDOM_CROP only
  std::uint64_t seed = 0;

  static AugmentationSpec defaults(AugmentationKind kind, std::uint64_t seed = 0);
  void validate() const;

  friend bool operator==(const AugmentationSpec&, const AugmentationSpec&) = default;
};

struct Augmented {
  Frame frame;
  std::vector<AxisAlignedBox> boxes;
};

Augmented augment(const Frame& frame, const std::vector<AxisAlignedBox>& boxes,
                  const AugmentationSpec& spec);

// Crop window pipeline used by RANDOM_CROP: boxes intersected with `window`, shifted
// to its origin, and dropped when less than `min_retention` of their area survives.
std::vector<AxisAlignedBox> crop_boxes(const std::vector<AxisAlignedBox>& boxes,
                                       const AxisAlignedBox& window, double min_retention);

struct TrainingConfig {
  int num_classes = 1;
  int batch_size = 32;
  double learning_rate = 0.0001;
  // Stored verbatim; the source value does not say whether it is keep or drop.
  double dropout_probability = 0.8;
  int total_steps = 35000;
  int checkpoint_step = 16000;
  std::vector<AugmentationSpec> augmentations = default_augmentations();

  static std::vector<AugmentationSpec> default_augmentations();
  void validate() const;

  friend bool operator==(const TrainingConfig&, const TrainingConfig&) = default;
};

inline constexpr const char* kSwapBodyLabel = "sb_DB";

LabelMap default_label_map();

struct TrainingDocument {
  TrainingConfig config;
  LabelMap label_map = default_label_map();
  std::string train_records;
  std::string test_records;

  friend bool operator==(const TrainingDocument&, const TrainingDocument&) = default;
};

// Validates first, then writes a JSON document. IoError when the file cannot be written.
void emit_training_config(const TrainingDocument& doc, const std::filesystem::path& out_path);
// Single-class document with the default `1 sb_DB` label map.
void emit_training_config(const TrainingConfig& tc, const std::filesystem::path& out_path);
TrainingDocument load_training_config(const std::filesystem::path& path);

}  // namespace swapread
