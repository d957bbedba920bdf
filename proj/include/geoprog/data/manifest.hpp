#pragma once

#include <filesystem>

#include "geoprog/data/observations.hpp"

namespace geoprog {

inline constexpr int kManifestVersion = 1;

/// Writes `path` (manifest JSON) and one DGRD file per observation at
/// `raster_ref` relative to the manifest's directory. Rasters come from
/// `obs.masks`. All writes are atomic.
void save_manifest(const ObservationSet& obs, const std::filesystem::path& path);

/// Reads a manifest, verifying that every raster exists, matches its SHA-256
/// and carries every vocabulary channel. Rasters are held in memory.
/// Throws MissingRaster, ChecksumMismatch, SchemaError.
ObservationSet load_manifest(const std::filesystem::path& path);

/// Accepts either a manifest file or a directory holding manifest.json.
std::filesystem::path resolve_manifest_path(const std::filesystem::path& path);

}  // namespace geoprog
