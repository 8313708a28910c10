#include "wuxing/mnist.hpp"

#include <cmath>
#include <fstream>
#include <iterator>
#include <numeric>

#include "wuxing/errors.hpp"
#include "wuxing/rng.hpp"

namespace wuxing {
namespace {

std::uint32_t read_be32(std::span<const std::uint8_t> bytes, std::size_t offset) {
  if (bytes.size() < offset + 4) throw FormatError("truncated IDX header", bytes.size());
  return (std::uint32_t{bytes[offset]} << 24) | (std::uint32_t{bytes[offset + 1]} << 16) |
         (std::uint32_t{bytes[offset + 2]} << 8) | std::uint32_t{bytes[offset + 3]};
}

void write_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

void expect_magic(std::span<const std::uint8_t> bytes, std::uint32_t magic) {
  const std::uint32_t got = read_be32(bytes, 0);
  if (got != magic) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "bad IDX magic 0x%08x (expected 0x%08x)", got, magic);
    throw FormatError(buf, 0);
  }
}

void expect_payload(std::span<const std::uint8_t> bytes, std::size_t header, std::size_t payload) {
  if (bytes.size() != header + payload)
    throw FormatError("IDX payload is " + std::to_string(bytes.size() - header) +
                          " bytes, header declares " + std::to_string(payload),
                      std::min(bytes.size(), header + payload));
}

std::uint32_t checked_u32(std::size_t v, const char* what) {
  if (v > 0xffffffffu) throw DomainError(std::string(what) + " does not fit in an IDX header");
  return static_cast<std::uint32_t>(v);
}

}  // namespace

ImageSet parse_idx_images(std::span<const std::uint8_t> bytes) {
  expect_magic(bytes, kIdxImageMagic);
  ImageSet set;
  set.count = read_be32(bytes, 4);
  set.rows = read_be32(bytes, 8);
  set.cols = read_be32(bytes, 12);
  constexpr std::size_t header = 16;
  expect_payload(bytes, header, set.count * set.rows * set.cols);
  set.pixels.resize(set.count * set.rows * set.cols);
  for (std::size_t i = 0; i < set.pixels.size(); ++i)
    set.pixels[i] = static_cast<double>(bytes[header + i]) / 255.0;
  return set;
}

LabelSet parse_idx_labels(std::span<const std::uint8_t> bytes) {
  expect_magic(bytes, kIdxLabelMagic);
  LabelSet set;
  set.count = read_be32(bytes, 4);
  constexpr std::size_t header = 8;
  expect_payload(bytes, header, set.count);
  set.labels.assign(bytes.begin() + header, bytes.end());
  for (std::size_t i = 0; i < set.labels.size(); ++i)
    if (set.labels[i] > 9)
      throw DomainError("label " + std::to_string(set.labels[i]) + " at index " +
                        std::to_string(i) + " is outside 0..9");
  return set;
}

std::vector<std::uint8_t> serialize_idx_images(const ImageSet& images) {
  if (images.pixels.size() != images.count * images.rows * images.cols)
    throw DomainError("image payload does not match its dimensions");
  std::vector<std::uint8_t> out;
  out.reserve(16 + images.pixels.size());
  write_be32(out, kIdxImageMagic);
  write_be32(out, checked_u32(images.count, "image count"));
  write_be32(out, checked_u32(images.rows, "row count"));
  write_be32(out, checked_u32(images.cols, "column count"));
  for (double x : images.pixels) {
    if (!(x >= 0.0 && x <= 1.0)) throw DomainError("pixel outside [0, 1]");
    out.push_back(static_cast<std::uint8_t>(std::lround(x * 255.0)));
  }
  return out;
}

std::vector<std::uint8_t> serialize_idx_labels(const LabelSet& labels) {
  if (labels.labels.size() != labels.count) throw DomainError("label count mismatch");
  std::vector<std::uint8_t> out;
  out.reserve(8 + labels.labels.size());
  write_be32(out, kIdxLabelMagic);
  write_be32(out, checked_u32(labels.count, "label count"));
  out.insert(out.end(), labels.labels.begin(), labels.labels.end());
  return out;
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

ImageSet load_idx_images(const std::filesystem::path& path) { return parse_idx_images(read_file(path)); }
LabelSet load_idx_labels(const std::filesystem::path& path) { return parse_idx_labels(read_file(path)); }

ImageSet downsample(const ImageSet& images, std::size_t factor) {
  if (factor == 0 || images.rows % factor != 0 || images.cols % factor != 0)
    throw DomainError("image dimensions " + std::to_string(images.rows) + "x" +
                      std::to_string(images.cols) + " are not divisible by " +
                      std::to_string(factor));
  ImageSet out;
  out.count = images.count;
  out.rows = images.rows / factor;
  out.cols = images.cols / factor;
  out.pixels.resize(out.count * out.rows * out.cols);
  const double norm = 1.0 / static_cast<double>(factor * factor);
  for (std::size_t i = 0; i < images.count; ++i) {
    const auto src = images.image(i);
    double* dst = &out.pixels[i * out.pixels_per_image()];
    for (std::size_t r = 0; r < out.rows; ++r)
      for (std::size_t c = 0; c < out.cols; ++c) {
        double s = 0.0;
        for (std::size_t dr = 0; dr < factor; ++dr)
          for (std::size_t dc = 0; dc < factor; ++dc)
            s += src[(r * factor + dr) * images.cols + c * factor + dc];
        dst[r * out.cols + c] = s * norm;
      }
  }
  return out;
}

std::pair<std::vector<Sample>, std::vector<Sample>> make_split(const ImageSet& images,
                                                               const LabelSet& labels,
                                                               std::size_t n_train,
                                                               std::size_t n_test,
                                                               std::uint64_t seed) {
  if (images.count != labels.count)
    throw DomainError("image and label counts differ (" + std::to_string(images.count) + " vs " +
                      std::to_string(labels.count) + ")");
  if (n_train + n_test > images.count)
    throw DomainError("requested " + std::to_string(n_train + n_test) + " samples but only " +
                      std::to_string(images.count) + " available");
  std::vector<std::size_t> order(images.count);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  shuffle(std::span<std::size_t>(order), rng);

  auto take = [&](std::size_t from, std::size_t n) {
    std::vector<Sample> out;
    out.reserve(n);
    for (std::size_t k = from; k < from + n; ++k) {
      const auto img = images.image(order[k]);
      out.push_back({std::vector<double>(img.begin(), img.end()), labels.labels[order[k]]});
    }
    return out;
  };
  return {take(0, n_train), take(n_train, n_test)};
}

}  // namespace wuxing
