#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "gazefuse/cli/config.hpp"

namespace gazefuse::cli {

struct FixtureSpec {
  std::size_t sessions = 3;
  double duration_s = 40.0;
  double fps = 5.0;
  std::size_t frame_size = 32;  // square frames
  std::uint32_t audio_rate = 8000;
  std::uint64_t seed = 0;
};

struct FixtureSession {
  std::string name;
  double offset_s = 0.0;  // true parent-minus-infant clock offset
};

/// Writes a small synthetic study under `dir`: per-session infant/parent
/// WAVs sharing a burst pattern shifted by a known offset, PPM frames at
/// `fps` on each camera's own clock, a head manifest, MG/JA annotations and
/// a config.json tuned for a quick run. Head colors encode the labels so the
/// fusion model has a relation between the two views to learn: during MG
/// both heads are red, during JA both carry a green band, and outside an
/// event at most one view shows the cue.
///
/// The output is a pure function of `spec`. Returns the generated sessions.
std::vector<FixtureSession> write_fixture(const std::filesystem::path& dir, const FixtureSpec& spec = {});

/// The config written by write_fixture, with paths relative to `dir`.
ProjectConfig fixture_config(const FixtureSpec& spec, const std::vector<FixtureSession>& sessions);

}  // namespace gazefuse::cli
