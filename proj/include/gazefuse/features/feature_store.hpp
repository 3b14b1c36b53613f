#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "gazefuse/features/token_sequence.hpp"

namespace gazefuse {

inline constexpr std::uint32_t kFeatureFormatVersion = 1;

/// One GZFS record, all integers little-endian:
///
///     "GZFS" | u32 version | u32 session_len | session | u8 view
///     | i64 timestamp_ms | u32 N | u32 D | N*D f32 payload
std::string encode_features(const TokenSequence& seq);
/// Throws FormatError on bad magic, unknown version, bad view byte,
/// truncation or trailing bytes.
TokenSequence decode_features(std::string_view bytes, const std::string& source = "<memory>");

struct FeatureKey {
  std::string session;
  View view = View::Infant;
  std::int64_t timestamp_ms = 0;

  auto operator<=>(const FeatureKey&) const = default;
};

/// Directory of GZFS files laid out as <root>/<session>/<view>/<timestamp_ms>.gzfs.
class FeatureStore {
 public:
  explicit FeatureStore(std::filesystem::path root) : root_(std::move(root)) {}

  const std::filesystem::path& root() const { return root_; }
  std::filesystem::path path_for(const FeatureKey& key) const;

  /// Atomically writes one record. Returns true when an existing record was
  /// replaced (last writer wins). Throws InputError for unusable session ids
  /// or negative timestamps, and for invalid sequences.
  bool write(const TokenSequence& seq) const;
  /// Throws LookupError when the record is missing, FormatError when the
  /// file is corrupt or its header does not match its location.
  TokenSequence read(std::string_view session, View view, double timestamp_s) const;
  bool contains(const FeatureKey& key) const;

  /// All record keys, sorted.
  std::vector<FeatureKey> keys() const;
  /// Every record, in key order.
  std::vector<TokenSequence> read_all() const;

  struct Issue {
    std::filesystem::path path;
    std::string problem;
  };
  /// Consistency pass: every file decodes, its header matches its path, N
  /// and D are constant across the store, and no interrupted writes
  /// (temp files) remain.
  std::vector<Issue> verify() const;

 private:
  std::filesystem::path root_;
};

/// Rejects empty ids, path separators, "." / "..", and control characters.
void validate_session_id(std::string_view session);

}  // namespace gazefuse
