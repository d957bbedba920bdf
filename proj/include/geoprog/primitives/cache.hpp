#pragma once

#include <atomic>
#include <cstddef>
#include <memory>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <unordered_map>

#include "geoprog/primitives/value.hpp"

namespace geoprog {

/// Per-observation primitive result cache keyed by (observation id,
/// canonical call text). Safe for concurrent readers and writers; since
/// primitive results are deterministic, racing writers store identical values.
class PrimitiveCache {
 public:
  static constexpr std::size_t kDefaultCapBytes = std::size_t{4} << 30;

  explicit PrimitiveCache(std::size_t cap_bytes = kDefaultCapBytes) : cap_bytes_(cap_bytes) {}

  std::shared_ptr<const Value> get(std::string_view observation_id, std::string_view call_key) const;

  /// Scalars and booleans are always stored; rasters only while the cache is
  /// under its memory cap.
  void put(std::string_view observation_id, std::string_view call_key, std::shared_ptr<const Value> value);

  /// Drops raster-valued entries when over the cap. Called between generations.
  void evict_if_over_cap();
  void clear();

  std::size_t hits() const { return hits_.load(); }
  std::size_t misses() const { return misses_.load(); }
  std::size_t bytes() const { return bytes_.load(); }
  std::size_t size() const;
  std::size_t cap_bytes() const { return cap_bytes_; }

 private:
  static std::string make_key(std::string_view observation_id, std::string_view call_key);

  std::size_t cap_bytes_;
  mutable std::shared_mutex mutex_;
  std::unordered_map<std::string, std::shared_ptr<const Value>> entries_;
  mutable std::atomic<std::size_t> hits_{0};
  mutable std::atomic<std::size_t> misses_{0};
  std::atomic<std::size_t> bytes_{0};
};

}  // namespace geoprog
