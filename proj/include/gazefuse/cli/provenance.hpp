#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace gazefuse::cli {

std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);

/// Inputs and settings an artifact was computed from. Written next to the
/// artifact as <artifact>.manifest.json. It carries no timestamps, so
/// reruns with unchanged inputs reproduce it byte for byte.
struct Provenance {
  std::string command;
  std::vector<std::filesystem::path> inputs;
  nlohmann::ordered_json settings = nlohmann::ordered_json::object();
};

std::filesystem::path manifest_path(const std::filesystem::path& artifact);

/// Atomically writes the artifact, then its manifest. Paths inside the
/// manifest are stored relative to `base`.
void write_artifact(const std::filesystem::path& path, std::string_view bytes, const Provenance& provenance,
                    const std::filesystem::path& base);

/// Recomputes the hashes recorded in an artifact's manifest. Returns one
/// message per mismatch or missing file; empty means the artifact is current.
std::vector<std::string> verify_artifact(const std::filesystem::path& path, const std::filesystem::path& base);

}  // namespace gazefuse::cli
