#include "geoprog/data/manifest.hpp"

#include <json.hpp>

#include "geoprog/error.hpp"
#include "geoprog/util/sha256.hpp"

namespace geoprog {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

template <class T>
T field(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw SchemaError(where + ": missing field '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw SchemaError(where + ": field '" + key + "' has the wrong type");
  }
}

}  // namespace

fs::path resolve_manifest_path(const fs::path& path) {
  if (fs::is_directory(path)) return path / "manifest.json";
  return path;
}

void save_manifest(const ObservationSet& obs, const fs::path& path) {
  if (!obs.masks) throw SchemaError("observation set has no raster provider");
  const fs::path root = path.has_parent_path() ? path.parent_path() : fs::path(".");
  json observations = json::array();
  for (std::size_t i = 0; i < obs.size(); ++i) {
    const auto& in = obs.inputs[i];
    const auto bytes = encode_dgrd(obs.masks->raster(in));
    const fs::path file = root / in.raster_ref;
    fs::create_directories(file.parent_path());
    write_file_atomic(file, bytes);
    json fields = json::object();
    for (const auto& [k, v] : in.scalar_fields) fields[k] = v;
    observations.push_back({{"id", in.id},
                            {"lon", in.longitude},
                            {"lat", in.latitude},
                            {"raster_file", in.raster_ref},
                            {"sha256", sha256_hex(bytes)},
                            {"scalar_fields", fields},
                            {"target", obs.targets[i]}});
  }
  json doc{{"version", kManifestVersion},
           {"target_name", obs.target_name},
           {"metric_id", std::string(metric_name(obs.metric))},
           {"vocabulary", obs.vocabulary},
           {"width", obs.width},
           {"height", obs.height},
           {"observations", observations}};
  write_file_atomic(path, doc.dump(1) + "\n");
}

ObservationSet load_manifest(const fs::path& requested) {
  const fs::path path = resolve_manifest_path(requested);
  if (!fs::is_regular_file(path)) throw SchemaError("no manifest at " + path.string());
  const auto raw = read_file_bytes(path);
  json doc;
  try {
    doc = json::parse(raw.begin(), raw.end());
  } catch (const json::parse_error& e) {
    throw SchemaError(path.string() + ": " + e.what());
  }
  const std::string where = path.string();
  if (!doc.is_object()) throw SchemaError(where + ": manifest must be a JSON object");
  if (doc.contains("version") && doc["version"] != kManifestVersion)
    throw SchemaError(where + ": unsupported manifest version");

  ObservationSet obs;
  obs.manifest_path = path;
  obs.target_name = field<std::string>(doc, "target_name", where);
  try {
    obs.metric = parse_metric(field<std::string>(doc, "metric_id", where));
  } catch (const ConfigError& e) {
    throw SchemaError(where + ": " + e.what());
  }
  obs.vocabulary = field<std::vector<std::string>>(doc, "vocabulary", where);
  const auto items = doc.value("observations", json());
  if (!items.is_array()) throw SchemaError(where + ": 'observations' must be an array");

  const fs::path root = path.has_parent_path() ? path.parent_path() : fs::path(".");
  auto provider = std::make_shared<InMemoryMaskProvider>(obs.vocabulary);
  for (const auto& item : items) {
    InputDescriptor in;
    in.id = field<std::string>(item, "id", where);
    const std::string at = where + " [" + in.id + "]";
    in.longitude = field<double>(item, "lon", at);
    in.latitude = field<double>(item, "lat", at);
    in.raster_ref = field<std::string>(item, "raster_file", at);
    if (item.contains("scalar_fields")) in.scalar_fields = field<std::map<std::string, double>>(item, "scalar_fields", at);
    const double target = field<double>(item, "target", at);

    const fs::path file = root / in.raster_ref;
    if (!fs::exists(file)) throw MissingRaster(at + ": raster " + file.string() + " does not exist");
    const auto bytes = read_file_bytes(file);
    if (item.contains("sha256")) {
      const auto expected = field<std::string>(item, "sha256", at);
      if (sha256_hex(bytes) != expected) throw ChecksumMismatch(at + ": checksum mismatch for " + file.string());
    }
    auto raster = std::make_shared<const Raster>(decode_dgrd(bytes));
    for (const auto& name : obs.vocabulary)
      if (raster->channel_index(name) < 0) throw SchemaError(at + ": raster lacks channel '" + name + "'");
    if (obs.inputs.empty()) {
      obs.width = raster->width;
      obs.height = raster->height;
    } else if (raster->width != obs.width || raster->height != obs.height) {
      throw SchemaError(at + ": raster size differs from the rest of the set");
    }
    provider->insert(in.raster_ref, std::move(raster));
    obs.inputs.push_back(std::move(in));
    obs.targets.push_back(target);
  }
  obs.masks = provider;
  obs.validate();
  return obs;
}

}  // namespace geoprog
