#include "gazefuse/cli/provenance.hpp"

#include <openssl/evp.h>

#include <array>
#include <fstream>
#include <memory>

#include "gazefuse/binary_io.hpp"
#include "gazefuse/error.hpp"
#include "gazefuse/version.hpp"

namespace gazefuse::cli {

namespace fs = std::filesystem;

namespace {

class Sha256 {
 public:
  Sha256() : ctx_(EVP_MD_CTX_new(), &EVP_MD_CTX_free) {
    if (!ctx_ || EVP_DigestInit_ex(ctx_.get(), EVP_sha256(), nullptr) != 1) throw Error("SHA-256 init failed");
  }
  void update(const void* data, std::size_t n) {
    if (EVP_DigestUpdate(ctx_.get(), data, n) != 1) throw Error("SHA-256 update failed");
  }
  std::string hex() {
    std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
    unsigned int len = 0;
    if (EVP_DigestFinal_ex(ctx_.get(), digest.data(), &len) != 1) throw Error("SHA-256 final failed");
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
      out.push_back(kHex[digest[i] >> 4]);
      out.push_back(kHex[digest[i] & 15]);
    }
    return out;
  }

 private:
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx_;
};

std::string display_path(const fs::path& p, const fs::path& base) {
  // Relative even across "..", so a moved project keeps identical manifests.
  const auto rel = p.lexically_relative(base);
  return rel.empty() ? p.generic_string() : rel.generic_string();
}

}  // namespace

std::string sha256_hex(std::string_view bytes) {
  Sha256 h;
  h.update(bytes.data(), bytes.size());
  return h.hex();
}

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LookupError("cannot read " + path.string());
  Sha256 h;
  std::array<char, 1 << 16> buf{};
  while (in) {
    in.read(buf.data(), buf.size());
    h.update(buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  return h.hex();
}

fs::path manifest_path(const fs::path& artifact) {
  auto p = artifact;
  p += ".manifest.json";
  return p;
}

void write_artifact(const fs::path& path, std::string_view bytes, const Provenance& provenance, const fs::path& base) {
  fs::create_directories(path.parent_path());
  io::write_file_atomic(path, bytes);
  nlohmann::ordered_json m;
  m["artifact"] = display_path(path, base);
  m["sha256"] = sha256_hex(bytes);
  m["command"] = provenance.command;
  m["tool"] = std::string("gazefuse ") + kVersion;
  auto inputs = nlohmann::ordered_json::array();
  for (const auto& in : provenance.inputs) {
    inputs.push_back({{"path", display_path(in, base)}, {"sha256", sha256_file(in)}});
  }
  m["inputs"] = inputs;
  m["settings"] = provenance.settings;
  io::write_file_atomic(manifest_path(path), m.dump(2) + "\n");
}

std::vector<std::string> verify_artifact(const fs::path& path, const fs::path& base) {
  std::vector<std::string> problems;
  const auto mpath = manifest_path(path);
  if (!fs::exists(mpath)) return {"no manifest for " + path.string()};
  const auto m = nlohmann::json::parse(io::read_file(mpath));
  auto check = [&](const fs::path& p, const std::string& expected) {
    if (!fs::exists(p)) {
      problems.push_back(p.string() + " is missing");
    } else if (sha256_file(p) != expected) {
      problems.push_back(p.string() + " changed since the artifact was written");
    }
  };
  check(path, m.at("sha256").get<std::string>());
  for (const auto& in : m.at("inputs")) {
    fs::path p = in.at("path").get<std::string>();
    if (p.is_relative()) p = base / p;
    check(p, in.at("sha256").get<std::string>());
  }
  return problems;
}

}  // namespace gazefuse::cli
