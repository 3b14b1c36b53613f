#include "gazefuse/cli/fixture.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "gazefuse/binary_io.hpp"
#include "gazefuse/error.hpp"
#include "gazefuse/features/image.hpp"
#include "gazefuse/pipeline/annotations.hpp"
#include "gazefuse/pipeline/audio.hpp"
#include "gazefuse/pipeline/frames.hpp"
#include "gazefuse/rng.hpp"
#include "gazefuse/text.hpp"

namespace gazefuse::cli {

namespace fs = std::filesystem;

namespace {

struct Script {
  std::set<long> mg, ja;  // confident positive ticks
  std::vector<EventAnnotation> events;
};

// Runs of 2-6 positive ticks separated by 2-8 tick gaps. Event bounds sit
// 0.4 s outside the run so every frame near a tick agrees with its label.
void script_task(Task task, long last_tick, Rng& rng, Script& script) {
  auto& ticks = task == Task::MutualGaze ? script.mg : script.ja;
  long t = 1 + static_cast<long>(rng.below(4));
  while (t < last_tick) {
    const long end = std::min(last_tick - 1, t + 1 + static_cast<long>(rng.below(5)));
    for (long k = t; k <= end; ++k) ticks.insert(k);
    script.events.push_back(make_event(task, static_cast<double>(t) - 0.4, static_cast<double>(end) + 0.4));
    t = end + 3 + static_cast<long>(rng.below(7));
  }
}

// One extra ambiguous event over negative ticks, which the pipeline must drop.
void add_ambiguous(Task task, long last_tick, Rng& rng, Script& script) {
  const auto& ticks = task == Task::MutualGaze ? script.mg : script.ja;
  for (int attempt = 0; attempt < 50; ++attempt) {
    const long k = 1 + static_cast<long>(rng.below(static_cast<std::uint64_t>(last_tick - 2)));
    if (!ticks.count(k) && !ticks.count(k + 1)) {
      script.events.push_back(make_event(task, static_cast<double>(k) - 0.4, static_cast<double>(k + 1) + 0.4,
                                         AnnotationQuality::Ambiguous));
      return;
    }
  }
}

// Which view shows a decoy cue outside an event: 0 none, 1 infant, 2 parent.
int decoy(std::uint64_t seed, const std::string& session, Task task, long tick) {
  const auto h = fnv1a64(session + "/" + to_string(task) + "/" + std::to_string(tick) + "/" + std::to_string(seed));
  return static_cast<int>(h % 3);
}

HeadBox head_box(std::uint64_t seed, const std::string& session, View view, long tick) {
  Rng rng(fnv1a64(session + to_string(view) + std::to_string(tick)) ^ seed, "fixture-head");
  const double x0 = rng.uniform(0.05, 0.45), y0 = rng.uniform(0.05, 0.45);
  const double w = rng.uniform(0.3, 0.45), h = rng.uniform(0.3, 0.45);
  return {x0, y0, x0 + w, y0 + h};
}

RgbImage render_frame(const FixtureSpec& spec, const std::string& session, View view, long tick, bool red,
                      bool green, std::int64_t ms) {
  const std::size_t n = spec.frame_size;
  RgbImage img(n, n);
  Rng noise(fnv1a64(session + to_string(view) + std::to_string(ms)) ^ spec.seed, "fixture-pixels");
  for (auto& p : img.pixels) p = static_cast<float>(noise.uniform(0.0, 0.5));
  const auto box = head_box(spec.seed, session, view, tick);
  const auto x0 = static_cast<std::size_t>(box.x0 * n), x1 = static_cast<std::size_t>(box.x1 * n);
  const auto y0 = static_cast<std::size_t>(box.y0 * n), y1 = static_cast<std::size_t>(box.y1 * n);
  for (std::size_t y = y0; y < y1; ++y) {
    for (std::size_t x = x0; x < x1; ++x) {
      img.at(x, y, 0) = red ? 0.95f : 0.15f;
      img.at(x, y, 1) = green && y < (y0 + y1) / 2 ? 0.95f : 0.15f;
      img.at(x, y, 2) = 0.5f;
    }
  }
  return img;
}

// Shared burst pattern: noise under a random piecewise-constant envelope.
std::vector<float> burst_timeline(std::size_t n, std::uint64_t seed, const std::string& session) {
  Rng rng(fnv1a64(session) ^ seed, "fixture-audio");
  std::vector<float> out(n);
  double level = 0.0;
  std::size_t next = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (i == next) {
      level = rng.uniform() < 0.4 ? 0.02 : rng.uniform(0.2, 0.9);
      next += 400 + static_cast<std::size_t>(rng.below(3000));
    }
    out[i] = static_cast<float>(level * rng.uniform(-1.0, 1.0));
  }
  return out;
}

}  // namespace

ProjectConfig fixture_config(const FixtureSpec& spec, const std::vector<FixtureSession>& sessions) {
  ProjectConfig c;
  c.media_root = "media";
  c.work_dir = "work";
  for (const auto& s : sessions) c.sessions.push_back(s.name);
  c.held_out_sessions = {sessions.back().name};
  c.backbone = {4, 16, spec.seed};
  c.fusion.feature_dim_in = 16;
  c.fusion.embed_dim = 16;
  c.fusion.encoder_layers = 1;
  c.fusion.attention_heads = 2;
  c.fusion.dropout = 0.1;
  c.fusion.head_layer_sizes = {16, 8, 1};
  c.fusion.tokens_per_view = 16;
  c.cnn.block_channels = {4, 6, 8};
  c.cnn.fc_layer_sizes = {8, 1};
  c.training.learning_rate = 1e-3;
  c.training.max_epochs = 15;
  c.seeds = {1, 2};
  return c;
}

std::vector<FixtureSession> write_fixture(const fs::path& dir, const FixtureSpec& spec) {
  if (spec.sessions < 2) throw ConfigError("fixture needs at least 2 sessions (one is held out)");
  if (!(spec.duration_s >= 10.0)) throw ConfigError("fixture duration must be >= 10 s");
  if (!(spec.fps >= 2.0)) throw ConfigError("fixture fps must be >= 2");
  if (spec.frame_size < 8) throw ConfigError("fixture frame_size must be >= 8");
  const auto media = dir / "media";
  fs::create_directories(media);

  Rng offsets(spec.seed, "fixture-offsets");
  std::vector<FixtureSession> sessions;
  std::vector<HeadBoxRecord> manifest;
  const long last_tick = static_cast<long>(std::floor(spec.duration_s));

  for (std::size_t i = 0; i < spec.sessions; ++i) {
    char name[16];
    std::snprintf(name, sizeof name, "s%02zu", i + 1);
    // Whole milliseconds keep the shift an integer number of audio samples.
    const double offset = std::round(offsets.uniform(-1.2, 1.2) * 1000.0) / 1000.0;
    sessions.push_back({name, offset});

    Rng script_rng(fnv1a64(name) ^ spec.seed, "fixture-script");
    Script script;
    script_task(Task::MutualGaze, last_tick, script_rng, script);
    script_task(Task::JointAttention, last_tick, script_rng, script);
    add_ambiguous(Task::MutualGaze, last_tick, script_rng, script);
    {
      std::ostringstream out;
      write_annotations(out, script.events);
      fs::create_directories(media / name);
      io::write_file_atomic(media / name / "annotations.csv", out.str());
    }

    // Audio: infant at tau = n / rate, parent at u = n / rate showing tau = u - offset.
    const double pad = 3.0;
    const auto rate = spec.audio_rate;
    const auto len = static_cast<std::size_t>((spec.duration_s + 1.0) * rate);
    const auto timeline = burst_timeline(len + static_cast<std::size_t>(2 * pad * rate), spec.seed, name);
    const auto infant0 = static_cast<std::ptrdiff_t>(pad * rate);
    const auto parent0 = infant0 - static_cast<std::ptrdiff_t>(std::llround(offset * rate));
    write_wav({{timeline.begin() + infant0, timeline.begin() + infant0 + static_cast<std::ptrdiff_t>(len)}, rate},
              media / name / "infant.wav");
    write_wav({{timeline.begin() + parent0, timeline.begin() + parent0 + static_cast<std::ptrdiff_t>(len)}, rate},
              media / name / "parent.wav");

    // Frames on each camera's own clock; the parent camera runs a little longer.
    for (View view : {View::Infant, View::Parent}) {
      const auto vdir = media / name / to_string(view);
      fs::create_directories(vdir);
      const double span = spec.duration_s + (view == View::Parent ? 1.5 : 0.0);
      for (long f = 0; f / spec.fps <= span + 1e-9; ++f) {
        const std::int64_t ms = std::llround(1000.0 * static_cast<double>(f) / spec.fps);
        const double own = static_cast<double>(ms) / 1000.0;
        const double tau = view == View::Infant ? own : own - offset;
        const long tick = static_cast<long>(std::floor(tau + 0.5));
        const int cue_view = view == View::Infant ? 1 : 2;
        const bool red = script.mg.count(tick) || decoy(spec.seed, name, Task::MutualGaze, tick) == cue_view;
        const bool green = script.ja.count(tick) || decoy(spec.seed, name, Task::JointAttention, tick) == cue_view;
        write_ppm(render_frame(spec, name, view, tick, red, green, ms), vdir / (std::to_string(ms) + ".ppm"));

        // Most frames get a confident box; a few are missing or weak.
        const auto h = fnv1a64(std::string(name) + to_string(view) + std::to_string(ms) + "head") % 100;
        if (h < 3) continue;
        const double conf = h < 6 ? 0.5 : 0.9 + 0.001 * static_cast<double>(h % 50);
        manifest.push_back({name, view, own, head_box(spec.seed, name, view, tick), conf});
      }
    }
  }
  std::ostringstream out;
  write_head_manifest(out, manifest);
  io::write_file_atomic(media / "heads.csv", out.str());
  save_config(fixture_config(spec, sessions), dir / "config.json");
  return sessions;
}

}  // namespace gazefuse::cli
