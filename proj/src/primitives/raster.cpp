#include "geoprog/primitives/raster.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>

#include "geoprog/error.hpp"

namespace geoprog {

static_assert(std::endian::native == std::endian::little, "DGRD I/O assumes a little-endian host");

int Raster::channel_index(std::string_view name) const {
  auto it = std::find(channel_names.begin(), channel_names.end(), name);
  return it == channel_names.end() ? -1 : static_cast<int>(it - channel_names.begin());
}

Mask Raster::channel_mask(std::size_t index) const {
  Mask m(width, height);
  const auto& src = channels.at(index);
  for (std::size_t i = 0; i < src.size(); ++i) m.cells[i] = src[i] != 0 ? 1 : 0;
  return m;
}

namespace {

class Writer {
 public:
  template <typename T>
  void put(T v) {
    const auto* p = reinterpret_cast<const std::uint8_t*>(&v);
    out_.insert(out_.end(), p, p + sizeof(T));
  }
  void put_name(const std::string& s) {
    if (s.size() > 0xFFFF) throw RasterFormatError("channel name too long: " + s.substr(0, 32));
    put(static_cast<std::uint16_t>(s.size()));
    out_.insert(out_.end(), s.begin(), s.end());
  }
  void put_bytes(const void* data, std::size_t n) {
    const auto* p = static_cast<const std::uint8_t*>(data);
    out_.insert(out_.end(), p, p + n);
  }
  std::vector<std::uint8_t> take() { return std::move(out_); }

 private:
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  template <typename T>
  T get() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  std::string get_name() {
    auto n = get<std::uint16_t>();
    need(n);
    std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  void get_bytes(void* dst, std::size_t n) {
    need(n);
    std::memcpy(dst, bytes_.data() + pos_, n);
    pos_ += n;
  }
  bool at_end() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw RasterFormatError("truncated DGRD data");
  }
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> encode_dgrd(const Raster& raster) {
  const std::size_t cells = raster.width * raster.height;
  if (raster.channels.size() != raster.channel_names.size() ||
      raster.float_channels.size() != raster.float_names.size())
    throw RasterFormatError("channel name/data count mismatch");

  Writer w;
  w.put_bytes("DGRD", 4);
  w.put(kDgrdVersion);
  w.put(static_cast<std::uint32_t>(raster.width));
  w.put(static_cast<std::uint32_t>(raster.height));
  w.put(static_cast<std::uint32_t>(raster.channels.size()));
  for (const auto& name : raster.channel_names) w.put_name(name);
  for (const auto& ch : raster.channels) {
    if (ch.size() != cells) throw RasterFormatError("channel size does not match raster dimensions");
    w.put_bytes(ch.data(), ch.size());
  }
  if (!raster.float_channels.empty()) {
    w.put(static_cast<std::uint32_t>(raster.float_channels.size()));
    for (const auto& name : raster.float_names) w.put_name(name);
    for (const auto& ch : raster.float_channels) {
      if (ch.size() != cells) throw RasterFormatError("float channel size does not match raster dimensions");
      w.put_bytes(ch.data(), ch.size() * sizeof(float));
    }
  }
  return w.take();
}

Raster decode_dgrd(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  char magic[4];
  r.get_bytes(magic, 4);
  if (std::memcmp(magic, "DGRD", 4) != 0) throw RasterFormatError("bad DGRD magic");
  if (auto version = r.get<std::uint16_t>(); version != kDgrdVersion)
    throw RasterFormatError("unsupported DGRD version " + std::to_string(version));

  Raster raster;
  raster.width = r.get<std::uint32_t>();
  raster.height = r.get<std::uint32_t>();
  if (raster.width == 0 || raster.height == 0) throw RasterFormatError("DGRD raster has zero extent");
  const std::size_t cells = raster.width * raster.height;
  const auto n_channels = r.get<std::uint32_t>();
  for (std::uint32_t i = 0; i < n_channels; ++i) raster.channel_names.push_back(r.get_name());
  raster.channels.resize(n_channels);
  for (auto& ch : raster.channels) {
    ch.resize(cells);
    r.get_bytes(ch.data(), cells);
    if (std::any_of(ch.begin(), ch.end(), [](std::uint8_t v) { return v > 1; }))
      throw RasterFormatError("DGRD mask channel holds a value other than 0 or 1");
  }
  if (!r.at_end()) {
    const auto n_float = r.get<std::uint32_t>();
    for (std::uint32_t i = 0; i < n_float; ++i) raster.float_names.push_back(r.get_name());
    raster.float_channels.resize(n_float);
    for (auto& ch : raster.float_channels) {
      ch.resize(cells);
      r.get_bytes(ch.data(), cells * sizeof(float));
    }
  }
  if (!r.at_end()) throw RasterFormatError("trailing bytes after DGRD payload");
  return raster;
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingRaster("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + tmp.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw DataError("short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

void write_file_atomic(const std::filesystem::path& path, std::string_view text) {
  write_file_atomic(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

namespace {

Mask mask_from(const Raster& raster, const std::vector<std::string>& vocabulary, std::string_view concept_name) {
  if (std::find(vocabulary.begin(), vocabulary.end(), concept_name) == vocabulary.end())
    throw UnknownConcept("unknown concept \"" + std::string(concept_name) + "\"");
  const int idx = raster.channel_index(concept_name);
  if (idx < 0) throw UnknownConcept("raster has no channel \"" + std::string(concept_name) + "\"");
  return raster.channel_mask(static_cast<std::size_t>(idx));
}

}  // namespace

void InMemoryMaskProvider::insert(std::string raster_ref, std::shared_ptr<const Raster> raster) {
  rasters_[std::move(raster_ref)] = std::move(raster);
}

const Raster& InMemoryMaskProvider::raster(const InputDescriptor& input) const {
  auto it = rasters_.find(input.raster_ref);
  if (it == rasters_.end()) throw MissingRaster("no raster registered for " + input.raster_ref);
  return *it->second;
}

Mask InMemoryMaskProvider::mask(const InputDescriptor& input, std::string_view concept_name) const {
  return mask_from(raster(input), vocabulary_, concept_name);
}

const Raster& FileMaskProvider::raster(const InputDescriptor& input) const {
  {
    std::lock_guard lock(mutex_);
    if (auto it = loaded_.find(input.raster_ref); it != loaded_.end()) return *it->second;
  }
  auto decoded = std::make_shared<const Raster>(decode_dgrd(read_file_bytes(root_ / input.raster_ref)));
  std::lock_guard lock(mutex_);
  auto [it, inserted] = loaded_.emplace(input.raster_ref, std::move(decoded));
  return *it->second;
}

Mask FileMaskProvider::mask(const InputDescriptor& input, std::string_view concept_name) const {
  return mask_from(raster(input), vocabulary_, concept_name);
}

}  // namespace geoprog
