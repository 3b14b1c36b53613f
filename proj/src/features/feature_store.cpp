#include "gazefuse/features/feature_store.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "gazefuse/binary_io.hpp"
#include "gazefuse/error.hpp"

namespace gazefuse {

namespace fs = std::filesystem;

namespace {

constexpr std::string_view kMagic = "GZFS";
constexpr std::string_view kExtension = ".gzfs";

std::optional<std::int64_t> parse_ms(const std::string& stem) {
  if (stem.empty() || stem.size() > 18) return std::nullopt;
  std::int64_t v = 0;
  for (char c : stem) {
    if (c < '0' || c > '9') return std::nullopt;
    v = v * 10 + (c - '0');
  }
  return v;
}

}  // namespace

void validate_session_id(std::string_view session) {
  if (session.empty()) throw InputError("session id is empty");
  if (session == "." || session == "..") throw InputError("session id '" + std::string(session) + "' is reserved");
  for (char c : session) {
    if (c == '/' || c == '\\' || static_cast<unsigned char>(c) < 0x20) {
      throw InputError("session id '" + std::string(session) + "' contains a path separator or control character");
    }
  }
}

std::string encode_features(const TokenSequence& seq) {
  seq.validate();
  io::ByteWriter w;
  w.bytes(kMagic);
  w.u32(kFeatureFormatVersion);
  w.str(seq.session);
  w.u8(static_cast<std::uint8_t>(seq.view));
  w.i64(timestamp_ms(seq.timestamp_s));
  w.u32(static_cast<std::uint32_t>(seq.n_tokens));
  w.u32(static_cast<std::uint32_t>(seq.dim));
  for (float v : seq.values) w.f32(v);
  return w.take();
}

TokenSequence decode_features(std::string_view bytes, const std::string& source) {
  io::ByteReader r(bytes, source);
  if (r.bytes(4) != kMagic) throw FormatError(source + ": not a GZFS feature file (bad magic)");
  const auto version = r.u32();
  if (version != kFeatureFormatVersion) {
    throw FormatError(source + ": unsupported GZFS version " + std::to_string(version));
  }
  TokenSequence seq;
  seq.session = r.str(4096);
  const auto view = r.u8();
  if (view > 1) throw FormatError(source + ": invalid view byte " + std::to_string(view));
  seq.view = static_cast<View>(view);
  seq.timestamp_s = static_cast<double>(r.i64()) / 1000.0;
  seq.n_tokens = r.u32();
  seq.dim = r.u32();
  if (seq.n_tokens == 0 || seq.dim == 0) throw FormatError(source + ": GZFS header has zero N or D");
  const std::uint64_t count = std::uint64_t{seq.n_tokens} * seq.dim;
  if (count * 4 > r.remaining()) throw FormatError(source + ": truncated GZFS payload");
  seq.values.resize(count);
  for (auto& v : seq.values) {
    v = r.f32();
    if (!std::isfinite(v)) throw FormatError(source + ": non-finite value in GZFS payload");
  }
  r.expect_end();
  return seq;
}

fs::path FeatureStore::path_for(const FeatureKey& key) const {
  validate_session_id(key.session);
  if (key.timestamp_ms < 0) throw InputError("negative timestamp " + std::to_string(key.timestamp_ms) + " ms");
  return root_ / key.session / to_string(key.view) / (std::to_string(key.timestamp_ms) + std::string(kExtension));
}

bool FeatureStore::write(const TokenSequence& seq) const {
  const auto path = path_for({seq.session, seq.view, timestamp_ms(seq.timestamp_s)});
  const auto bytes = encode_features(seq);
  const bool existed = fs::exists(path);
  io::write_file_atomic(path, bytes);
  return existed;
}

bool FeatureStore::contains(const FeatureKey& key) const { return fs::exists(path_for(key)); }

TokenSequence FeatureStore::read(std::string_view session, View view, double timestamp_s) const {
  const FeatureKey key{std::string(session), view, timestamp_ms(timestamp_s)};
  const auto path = path_for(key);
  if (!fs::exists(path)) {
    throw LookupError("no features for session '" + key.session + "', view " + to_string(view) + ", t=" +
                      std::to_string(key.timestamp_ms) + " ms (looked for " + path.string() + ")");
  }
  auto seq = decode_features(io::read_file(path), path.string());
  if (seq.session != key.session || seq.view != view || timestamp_ms(seq.timestamp_s) != key.timestamp_ms) {
    throw FormatError(path.string() + ": header key does not match the record location");
  }
  return seq;
}

std::vector<FeatureKey> FeatureStore::keys() const {
  std::vector<FeatureKey> out;
  if (!fs::exists(root_)) return out;
  for (const auto& session_dir : fs::directory_iterator(root_)) {
    if (!session_dir.is_directory()) continue;
    for (const View view : {View::Infant, View::Parent}) {
      const auto dir = session_dir.path() / to_string(view);
      if (!fs::is_directory(dir)) continue;
      for (const auto& file : fs::directory_iterator(dir)) {
        if (file.path().extension() != kExtension) continue;
        if (const auto ms = parse_ms(file.path().stem().string())) {
          out.push_back({session_dir.path().filename().string(), view, *ms});
        }
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<TokenSequence> FeatureStore::read_all() const {
  std::vector<TokenSequence> out;
  for (const auto& key : keys()) out.push_back(read(key.session, key.view, static_cast<double>(key.timestamp_ms) / 1000.0));
  return out;
}

std::vector<FeatureStore::Issue> FeatureStore::verify() const {
  std::vector<Issue> issues;
  if (!fs::exists(root_)) return issues;
  std::optional<std::pair<std::size_t, std::size_t>> shape;
  std::vector<fs::path> files;
  for (const auto& entry : fs::recursive_directory_iterator(root_)) {
    if (entry.is_regular_file()) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& path : files) {
    if (path.filename().string().find(".tmp.") != std::string::npos) {
      issues.push_back({path, "leftover temporary file from an interrupted or concurrent write"});
      continue;
    }
    if (path.extension() != kExtension) continue;
    try {
      const auto seq = decode_features(io::read_file(path), path.string());
      if (path != path_for({seq.session, seq.view, timestamp_ms(seq.timestamp_s)})) {
        issues.push_back({path, "header key does not match the record location"});
      }
      if (!shape) shape = {seq.n_tokens, seq.dim};
      if (shape->first != seq.n_tokens || shape->second != seq.dim) {
        issues.push_back({path, "token shape " + std::to_string(seq.n_tokens) + "x" + std::to_string(seq.dim) +
                                    " differs from " + std::to_string(shape->first) + "x" +
                                    std::to_string(shape->second)});
      }
    } catch (const Error& e) {
      issues.push_back({path, e.what()});
    }
  }
  return issues;
}

}  // namespace gazefuse
