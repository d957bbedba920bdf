#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "geoprog/primitives/input.hpp"
#include "geoprog/primitives/value.hpp"

namespace geoprog {

/// Multi-channel concept raster. Binary channels hold 0/1 bytes; continuous
/// channels hold f32 values.
struct Raster {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::string> channel_names;
  std::vector<std::vector<std::uint8_t>> channels;
  std::vector<std::string> float_names;
  std::vector<std::vector<float>> float_channels;

  /// Index of the binary channel `name`, or -1.
  int channel_index(std::string_view name) const;
  Mask channel_mask(std::size_t index) const;

  bool operator==(const Raster&) const = default;
};

// DGRD container, little-endian:
//   "DGRD" u16 version=1 u32 width u32 height u32 channels
//   channels x (u16 len, utf-8 name)
//   channels x (width*height u8, row-major)
//   [optional] u32 float_channels, float_channels x (u16 len, name),
//              float_channels x (width*height f32, row-major)
inline constexpr std::uint16_t kDgrdVersion = 1;

std::vector<std::uint8_t> encode_dgrd(const Raster& raster);
/// Throws RasterFormatError on malformed input.
Raster decode_dgrd(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
void write_file_atomic(const std::filesystem::path& path, std::string_view text);

/// Source of concept masks for observations. Implementations must be safe for
/// concurrent calls.
class MaskProvider {
 public:
  virtual ~MaskProvider() = default;

  /// Throws UnknownConcept when `concept_name` is not in the vocabulary.
  virtual Mask mask(const InputDescriptor& input, std::string_view concept_name) const = 0;
  virtual const Raster& raster(const InputDescriptor& input) const = 0;
  virtual const std::vector<std::string>& vocabulary() const = 0;
};

/// Serves masks from rasters held in memory (synthetic worlds).
class InMemoryMaskProvider final : public MaskProvider {
 public:
  explicit InMemoryMaskProvider(std::vector<std::string> vocabulary) : vocabulary_(std::move(vocabulary)) {}

  void insert(std::string raster_ref, std::shared_ptr<const Raster> raster);

  Mask mask(const InputDescriptor& input, std::string_view concept_name) const override;
  const Raster& raster(const InputDescriptor& input) const override;
  const std::vector<std::string>& vocabulary() const override { return vocabulary_; }

 private:
  std::vector<std::string> vocabulary_;
  std::unordered_map<std::string, std::shared_ptr<const Raster>> rasters_;
};

/// Serves masks from DGRD files under a root directory; files are decoded on
/// first use and kept.
class FileMaskProvider final : public MaskProvider {
 public:
  FileMaskProvider(std::filesystem::path root, std::vector<std::string> vocabulary)
      : root_(std::move(root)), vocabulary_(std::move(vocabulary)) {}

  Mask mask(const InputDescriptor& input, std::string_view concept_name) const override;
  const Raster& raster(const InputDescriptor& input) const override;
  const std::vector<std::string>& vocabulary() const override { return vocabulary_; }

 private:
  std::filesystem::path root_;
  std::vector<std::string> vocabulary_;
  mutable std::mutex mutex_;
  mutable std::unordered_map<std::string, std::shared_ptr<const Raster>> loaded_;
};

}  // namespace geoprog
