#include "geoprog/primitives/cache.hpp"

#include <mutex>

namespace geoprog {

std::string PrimitiveCache::make_key(std::string_view observation_id, std::string_view call_key) {
  std::string key;
  key.reserve(observation_id.size() + call_key.size() + 1);
  key.append(observation_id);
  key.push_back('\x1f');
  key.append(call_key);
  return key;
}

std::shared_ptr<const Value> PrimitiveCache::get(std::string_view observation_id, std::string_view call_key) const {
  const auto key = make_key(observation_id, call_key);
  std::shared_lock lock(mutex_);
  auto it = entries_.find(key);
  if (it == entries_.end()) {
    misses_.fetch_add(1, std::memory_order_relaxed);
    return nullptr;
  }
  hits_.fetch_add(1, std::memory_order_relaxed);
  return it->second;
}

void PrimitiveCache::put(std::string_view observation_id, std::string_view call_key,
                         std::shared_ptr<const Value> value) {
  const std::size_t size = value->byte_size();
  const bool small = value->kind() == Kind::Scalar || value->kind() == Kind::Bool;
  if (!small && bytes_.load() + size > cap_bytes_) return;
  auto key = make_key(observation_id, call_key);
  const std::size_t charged = size + key.size();
  std::unique_lock lock(mutex_);
  auto [it, inserted] = entries_.try_emplace(std::move(key), std::move(value));
  if (inserted) bytes_.fetch_add(charged);
}

void PrimitiveCache::evict_if_over_cap() {
  std::unique_lock lock(mutex_);
  if (bytes_.load() <= cap_bytes_) return;
  std::size_t bytes = 0;
  for (auto it = entries_.begin(); it != entries_.end();) {
    const Kind k = it->second->kind();
    if (k == Kind::Grid || k == Kind::Mask) {
      it = entries_.erase(it);
    } else {
      bytes += it->second->byte_size() + it->first.size();
      ++it;
    }
  }
  bytes_.store(bytes);
}

void PrimitiveCache::clear() {
  std::unique_lock lock(mutex_);
  entries_.clear();
  bytes_.store(0);
}

std::size_t PrimitiveCache::size() const {
  std::shared_lock lock(mutex_);
  return entries_.size();
}

}  // namespace geoprog
