#pragma once

// IDX container (MNIST family): big-endian 32-bit magic, big-endian 32-bit
// dimensions, then raw unsigned bytes.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <limits>
#include <string>
#include <vector>

#include "nilnet/dataset.hpp"
#include "nilnet/errors.hpp"

namespace nilnet {

inline constexpr std::uint32_t kIdxImagesMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelsMagic = 0x00000801;

class IdxError : public std::runtime_error {
 public:
  enum class Kind { io, bad_magic, truncated, count_mismatch };

  IdxError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

using Bytes = std::vector<std::uint8_t>;

namespace detail {

inline std::uint32_t read_be32(const Bytes& b, std::size_t off) {
  if (off + 4 > b.size()) {
    throw IdxError(IdxError::Kind::truncated, "idx: truncated header");
  }
  return (std::uint32_t{b[off]} << 24) | (std::uint32_t{b[off + 1]} << 16) |
         (std::uint32_t{b[off + 2]} << 8) | std::uint32_t{b[off + 3]};
}

inline void write_be32(Bytes& b, std::uint32_t v) {
  b.push_back(static_cast<std::uint8_t>(v >> 24));
  b.push_back(static_cast<std::uint8_t>(v >> 16));
  b.push_back(static_cast<std::uint8_t>(v >> 8));
  b.push_back(static_cast<std::uint8_t>(v));
}

}  // namespace detail

inline Bytes read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IdxError(IdxError::Kind::io, "idx: cannot open " + path.string());
  }
  return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

struct IdxImages {
  std::uint32_t count = 0;
  std::uint32_t rows = 0;
  std::uint32_t cols = 0;
  Bytes pixels;  // count * rows * cols
};

inline IdxImages parse_idx_images(const Bytes& b) {
  const auto magic = detail::read_be32(b, 0);
  if (magic != kIdxImagesMagic) {
    throw IdxError(IdxError::Kind::bad_magic, "idx: bad image magic");
  }
  IdxImages img;
  img.count = detail::read_be32(b, 4);
  img.rows = detail::read_be32(b, 8);
  img.cols = detail::read_be32(b, 12);
  const std::uint64_t need = std::uint64_t{img.count} * img.rows * img.cols;
  if (b.size() - 16 < need) {
    throw IdxError(IdxError::Kind::truncated, "idx: image payload truncated");
  }
  img.pixels.assign(b.begin() + 16, b.begin() + 16 + static_cast<std::ptrdiff_t>(need));
  return img;
}

inline Bytes parse_idx_labels(const Bytes& b) {
  const auto magic = detail::read_be32(b, 0);
  if (magic != kIdxLabelsMagic) {
    throw IdxError(IdxError::Kind::bad_magic, "idx: bad label magic");
  }
  const auto count = detail::read_be32(b, 4);
  if (b.size() - 8 < count) {
    throw IdxError(IdxError::Kind::truncated, "idx: label payload truncated");
  }
  return Bytes(b.begin() + 8, b.begin() + 8 + count);
}

/// Builds a dataset from parsed image and label payloads, keeping the first
/// min(limit, count) items. Pixels are scaled to [0,1].
inline LabeledDataset idx_to_dataset(const IdxImages& img, const Bytes& labels, std::size_t limit) {
  if (img.count != labels.size()) {
    throw IdxError(IdxError::Kind::count_mismatch,
                   "idx: " + std::to_string(img.count) + " images but " + std::to_string(labels.size()) + " labels");
  }
  const std::size_t n = std::min<std::size_t>(limit, img.count);
  const std::size_t d = std::size_t{img.rows} * img.cols;
  LabeledDataset ds;
  ds.features.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  ds.labels.resize(n);
  int max_label = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      ds.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = img.pixels[i * d + j] / 255.0;
    }
    ds.labels[i] = labels[i];
    max_label = std::max<int>(max_label, labels[i]);
  }
  ds.n_classes = max_label + 1;
  ds.provenance = {"idx", 0, {{"rows", static_cast<double>(img.rows)}, {"cols", static_cast<double>(img.cols)}}};
  return ds;
}

/// Loads an image/label IDX pair from disk.
inline LabeledDataset load_idx(const std::filesystem::path& images_path,
                               const std::filesystem::path& labels_path,
                               std::size_t limit = std::numeric_limits<std::size_t>::max()) {
  const IdxImages img = parse_idx_images(read_file_bytes(images_path));
  const Bytes labels = parse_idx_labels(read_file_bytes(labels_path));
  return idx_to_dataset(img, labels, limit);
}

/// Serializes features in [0,1] (rounded to the nearest 1/255) as an IDX image file.
inline Bytes encode_idx_images(const LabeledDataset& ds, std::uint32_t rows, std::uint32_t cols) {
  if (std::size_t{rows} * cols != ds.dims()) {
    throw ShapeError("encode_idx_images: rows*cols does not match feature dimension");
  }
  Bytes b;
  detail::write_be32(b, kIdxImagesMagic);
  detail::write_be32(b, static_cast<std::uint32_t>(ds.size()));
  detail::write_be32(b, rows);
  detail::write_be32(b, cols);
  for (Eigen::Index i = 0; i < ds.features.size(); ++i) {
    const double v = std::clamp(ds.features.data()[i], 0.0, 1.0);
    b.push_back(static_cast<std::uint8_t>(std::lround(v * 255.0)));
  }
  return b;
}

inline Bytes encode_idx_labels(const LabeledDataset& ds) {
  Bytes b;
  detail::write_be32(b, kIdxLabelsMagic);
  detail::write_be32(b, static_cast<std::uint32_t>(ds.size()));
  for (int y : ds.labels) {
    if (y < 0 || y > 255) throw ShapeError("encode_idx_labels: label does not fit in a byte");
    b.push_back(static_cast<std::uint8_t>(y));
  }
  return b;
}

inline void write_file_bytes(const std::filesystem::path& path, const Bytes& b) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(b.data()), static_cast<std::streamsize>(b.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace nilnet
