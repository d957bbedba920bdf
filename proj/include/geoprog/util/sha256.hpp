#pragma once

#include <cstdint>
#include <span>
#include <string>

namespace geoprog {

/// Lower-case hex SHA-256 digest.
std::string sha256_hex(std::span<const std::uint8_t> bytes);

}  // namespace geoprog
