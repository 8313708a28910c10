#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <utility>
#include <vector>

#include "wuxing/trainer.hpp"

namespace wuxing {

inline constexpr std::uint32_t kIdxImageMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelMagic = 0x00000801;

/// Images normalised linearly from bytes (0 -> 0.0, 255 -> 1.0), row-major.
struct ImageSet {
  std::size_t count = 0;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> pixels;

  std::size_t pixels_per_image() const noexcept { return rows * cols; }
  std::span<const double> image(std::size_t i) const {
    return std::span<const double>(pixels).subspan(i * pixels_per_image(), pixels_per_image());
  }
  friend bool operator==(const ImageSet&, const ImageSet&) = default;
};

struct LabelSet {
  std::size_t count = 0;
  std::vector<std::uint8_t> labels;
  friend bool operator==(const LabelSet&, const LabelSet&) = default;
};

/// Strict big-endian IDX parsers; throw FormatError (with byte offset) on a
/// wrong magic, truncated header or payload length mismatch, and DomainError
/// on a label above 9.
ImageSet parse_idx_images(std::span<const std::uint8_t> bytes);
LabelSet parse_idx_labels(std::span<const std::uint8_t> bytes);

/// Inverse of the parsers. Pixels are re-quantised with round(x * 255).
std::vector<std::uint8_t> serialize_idx_images(const ImageSet& images);
std::vector<std::uint8_t> serialize_idx_labels(const LabelSet& labels);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
ImageSet load_idx_images(const std::filesystem::path& path);
LabelSet load_idx_labels(const std::filesystem::path& path);

/// Non-overlapping factor x factor mean pooling. Throws DomainError when the
/// image dimensions are not divisible by `factor`.
ImageSet downsample(const ImageSet& images, std::size_t factor);

/// Seeded Fisher-Yates shuffle of all indices, then the first n_train go to
/// the training stream and the next n_test to the test stream.
std::pair<std::vector<Sample>, std::vector<Sample>> make_split(const ImageSet& images,
                                                               const LabelSet& labels,
                                                               std::size_t n_train,
                                                               std::size_t n_test,
                                                               std::uint64_t seed);

}  // namespace wuxing
