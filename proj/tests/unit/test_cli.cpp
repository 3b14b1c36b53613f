#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include "fixtures.hpp"
#include "gazefuse/binary_io.hpp"
#include "gazefuse/cli/commands.hpp"
#include "gazefuse/cli/fixture.hpp"
#include "gazefuse/cli/provenance.hpp"
#include "gazefuse/eval/timeline.hpp"
#include "gazefuse/model/checkpoint.hpp"
#include "gazefuse/pipeline/audio.hpp"

using namespace gazefuse;
using namespace gazefuse::cli;
using gazefuse::testing::TempDir;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run invoke(const fs::path& config, std::vector<std::string> args) {
  args.insert(args.begin(), {"--config", config.string()});
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::map<std::string, std::string> hash_tree(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) out[e.path().lexically_relative(root).generic_string()] = sha256_file(e.path());
  }
  return out;
}

const std::vector<std::vector<std::string>> kPipeline{
    {"sync"},
    {"sample"},
    {"featurize", "--backbone", "toy"},
    {"dataset", "build", "--task", "mg"},
    {"dataset", "split", "--task", "mg"},
    {"dataset", "balance", "--task", "mg"},
    {"train", "--task", "mg", "--seeds", "1,2"},
    {"eval", "--task", "mg", "--seeds", "1,2"},
    {"predict", "--task", "mg"},
    {"export-timeline"},
};

void run_pipeline(const fs::path& config, std::vector<std::string> extra = {}) {
  for (auto args : kPipeline) {
    args.insert(args.begin(), extra.begin(), extra.end());
    const auto r = invoke(config, args);
    ASSERT_EQ(r.code, 0) << args[extra.size()] << ": " << r.err;
  }
}

}  // namespace

TEST(Config, JsonRoundTripIsLossless) {
  ProjectConfig c;
  c.sessions = {"a", "b"};
  c.held_out_sessions = {"b"};
  c.manual_offsets["a"] = 0.25;
  c.fusion.head_layer_sizes = {32, 1};
  c.model = ModelChoice::Cnn;
  c.seeds = {7, 9};
  c.training.learning_rate = 1e-4;
  const auto j = to_json(c);
  const auto back = config_from_json(nlohmann::json::parse(j.dump()));
  EXPECT_EQ(back, c);
  EXPECT_EQ(to_json(back).dump(), j.dump());
}

TEST(Config, DefaultsMatchTheReferenceModel) {
  const auto c = config_from_json(nlohmann::json::parse(R"({"sessions": ["a"]})"));
  EXPECT_EQ(c.fusion, FusionModelConfig{});
  EXPECT_EQ(c.training, TrainConfig{});
  EXPECT_EQ(c.sample_rate_hz, 1.0);
  EXPECT_EQ(c.val_fraction, 0.10);
  EXPECT_EQ(c.timeline_window_s, 15.0);
}

TEST(Config, RejectsUnknownKeysAndBadValues) {
  EXPECT_THROW(config_from_json(nlohmann::json::parse(R"({"sesions": ["a"]})")), ConfigError);
  EXPECT_THROW(config_from_json(nlohmann::json::parse(R"({"training": {"lr": 1}})")), ConfigError);
  EXPECT_THROW(config_from_json(nlohmann::json::parse(R"({"training": {"batch_size": "eight"}})")), ConfigError);
  EXPECT_THROW(config_from_json(nlohmann::json::parse(R"({"model": {"kind": "llm"}})")), ConfigError);
  auto c = config_from_json(nlohmann::json::parse(R"({"sessions": ["a"], "training": {"learning_rate": 0}})"));
  EXPECT_THROW(c.validate(), ConfigError);
  c = config_from_json(nlohmann::json::parse(R"({"sessions": ["a", "a"]})"));
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Provenance, Sha256KnownVectors) {
  EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Provenance, ManifestDetectsChangedInputs) {
  TempDir dir("prov");
  io::write_file_atomic(dir.path() / "in.txt", "hello");
  write_artifact(dir.path() / "out" / "a.txt", "result", {"demo", {dir.path() / "in.txt"}, {}}, dir.path());
  EXPECT_TRUE(verify_artifact(dir.path() / "out" / "a.txt", dir.path()).empty());
  const auto manifest = nlohmann::json::parse(io::read_file(manifest_path(dir.path() / "out" / "a.txt")));
  EXPECT_EQ(manifest.at("inputs").at(0).at("path"), "in.txt");
  io::write_file_atomic(dir.path() / "in.txt", "changed");
  EXPECT_EQ(verify_artifact(dir.path() / "out" / "a.txt", dir.path()).size(), 1u);
}

class FixturePipeline : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new TempDir("cli_fixture");
    sessions_ = write_fixture(dir_->path());
  }
  static void TearDownTestSuite() {
    delete dir_;
    dir_ = nullptr;
  }
  static fs::path config() { return dir_->path() / "config.json"; }

  static TempDir* dir_;
  static std::vector<FixtureSession> sessions_;
};

TempDir* FixturePipeline::dir_ = nullptr;
std::vector<FixtureSession> FixturePipeline::sessions_;

TEST_F(FixturePipeline, EndToEndIsByteIdenticalOnRerun) {
  run_pipeline(config());
  const auto work = dir_->path() / "work";
  const auto first = hash_tree(work);
  ASSERT_FALSE(first.empty());
  for (const auto& name : {"offsets.csv", "frame_index.csv", "features/index.csv", "mg/samples.csv",
                           "mg/split_balanced.csv", "mg/runs/seed_1/checkpoint.gfck", "mg/eval/aggregate.csv",
                           "mg/predictions.csv", "timelines/s03.timeline"}) {
    EXPECT_TRUE(first.count(name)) << name;
    EXPECT_TRUE(first.count(std::string(name) + ".manifest.json")) << name;
  }
  run_pipeline(config());
  EXPECT_EQ(hash_tree(work), first);
  // Every manifest still matches its inputs.
  for (const auto& [name, hash] : first) {
    if (name.ends_with(".manifest.json")) {
      const auto artifact = work / name.substr(0, name.size() - std::string(".manifest.json").size());
      EXPECT_TRUE(verify_artifact(artifact, work).empty()) << name;
    }
  }
}

TEST_F(FixturePipeline, SyncRecoversFixtureOffsets) {
  ASSERT_EQ(invoke(config(), {"sync"}).code, 0);
  std::istringstream in(io::read_file(dir_->path() / "work" / "offsets.csv"));
  std::string line;
  std::getline(in, line);
  for (const auto& s : sessions_) {
    ASSERT_TRUE(std::getline(in, line));
    EXPECT_TRUE(line.starts_with(s.name + ","));
    const double est = std::stod(line.substr(s.name.size() + 1));
    EXPECT_NEAR(est, s.offset_s, 0.020) << s.name;
  }
}

TEST_F(FixturePipeline, WorkerCountDoesNotChangeArtifacts) {
  TempDir other("cli_workers");
  write_fixture(other.path());
  run_pipeline(other.path() / "config.json", {"--workers", "3"});
  run_pipeline(config());
  EXPECT_EQ(hash_tree(other.path() / "work"), hash_tree(dir_->path() / "work"));
}

TEST_F(FixturePipeline, AggregateReportIsOrdered) {
  run_pipeline(config());
  const auto report = nlohmann::json::parse(io::read_file(dir_->path() / "work" / "mg" / "eval" / "report.json"));
  ASSERT_EQ(report.at("runs").size(), 2u);
  for (const auto& [metric, spread] : report.at("aggregate").items()) {
    EXPECT_LE(spread.at("min").get<double>(), spread.at("mean").get<double>()) << metric;
    EXPECT_LE(spread.at("mean").get<double>(), spread.at("max").get<double>()) << metric;
  }
  const auto doc = parse_timeline(io::read_file(dir_->path() / "work" / "timelines" / "s03.timeline"));
  EXPECT_EQ(doc.session, "s03");
  EXPECT_EQ(doc.slots, 41u);
}

TEST_F(FixturePipeline, HeldOutSessionAbsentIsConfigError) {
  run_pipeline(config());
  const auto r = invoke(config(), {"dataset", "split", "--task", "mg", "--held-out", "nope"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("nope"), std::string::npos) << r.err;
}

TEST_F(FixturePipeline, ImportedPredictionsAreScored) {
  run_pipeline(config());
  const auto r = invoke(config(), {"import-predictions", "--input", (dir_->path() / "work" / "mg" / "predictions.csv").string(),
                                "--name", "reimport"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto m = nlohmann::json::parse(io::read_file(dir_->path() / "work" / "external" / "reimport.metrics.json"));
  EXPECT_TRUE(m.contains("MG"));
  EXPECT_EQ(io::read_file(dir_->path() / "work" / "external" / "reimport.csv"),
            io::read_file(dir_->path() / "work" / "mg" / "predictions.csv"));
}

TEST_F(FixturePipeline, BenchReportsThroughput) {
  run_pipeline(config());
  const auto r = invoke(config(), {"bench", "--task", "mg", "--min-samples", "50"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto b = nlohmann::json::parse(io::read_file(dir_->path() / "work" / "mg" / "bench.json"));
  EXPECT_GT(b.at("samples_per_s").get<double>(), 0.0);
}

TEST(Cli, MissingUpstreamArtifactsNameTheProducer) {
  TempDir dir("cli_missing");
  write_fixture(dir.path(), {2, 12.0, 5.0, 16, 8000, 1});
  const auto config = dir.path() / "config.json";
  const std::vector<std::pair<std::vector<std::string>, std::string>> cases{
      {{"sample"}, "gazefuse sync"},
      {{"featurize"}, "gazefuse sample"},
      {{"dataset", "build", "--task", "ja"}, "gazefuse featurize"},
      {{"dataset", "split", "--task", "ja"}, "gazefuse dataset build"},
      {{"dataset", "balance", "--task", "ja"}, "gazefuse dataset split"},
      {{"train", "--task", "ja"}, "gazefuse dataset balance"},
      {{"export-timeline"}, "gazefuse predict"},
  };
  for (const auto& [args, producer] : cases) {
    const auto r = invoke(config, args);
    EXPECT_EQ(r.code, 1) << args[0];
    EXPECT_NE(r.err.find(producer), std::string::npos) << args[0] << ": " << r.err;
  }
}

TEST(Cli, SilentSessionIsReportedWhileOthersComplete) {
  TempDir dir("cli_silent");
  const auto sessions = write_fixture(dir.path(), {2, 12.0, 5.0, 16, 8000, 1});
  const auto wav = dir.path() / "media" / sessions[0].name / "parent.wav";
  auto audio = parse_wav(wav);
  std::fill(audio.samples.begin(), audio.samples.end(), 0.0f);
  write_wav(audio, wav);
  const auto r = invoke(dir.path() / "config.json", {"sync"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find(sessions[0].name + ":"), std::string::npos) << r.err;
  EXPECT_NE(r.out.find("sync " + sessions[1].name), std::string::npos) << r.out;
}

TEST(Cli, ConfigFromEnvironmentAndUsageErrors) {
  TempDir dir("cli_env");
  write_fixture(dir.path(), {2, 12.0, 5.0, 16, 8000, 1});
  std::ostringstream out, err;
  ::setenv(kConfigEnvVar, (dir.path() / "config.json").c_str(), 1);
  EXPECT_EQ(run_cli({"sync"}, out, err), 0) << err.str();
  ::unsetenv(kConfigEnvVar);
  EXPECT_EQ(run_cli({"sync"}, out, err), 2);
  EXPECT_EQ(run_cli({"train", "--task", "xx"}, out, err), 2);
  EXPECT_EQ(run_cli({"bogus"}, out, err), 2);
  EXPECT_EQ(run_cli({"--help"}, out, err), 0);
}

TEST(Cli, LowConfidenceOffsetsNeedManualValidation) {
  TempDir dir("cli_lowconf");
  const auto sessions = write_fixture(dir.path(), {2, 12.0, 5.0, 16, 8000, 1});
  auto config = load_config(dir.path() / "config.json");
  config.sync.min_confidence = 1.0;  // flags every estimate
  save_config(config, dir.path() / "strict.json");
  ASSERT_EQ(invoke(dir.path() / "strict.json", {"sync"}).code, 0);
  auto r = invoke(dir.path() / "strict.json", {"sample"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("sync.manual_offsets." + sessions[0].name), std::string::npos) << r.err;

  for (const auto& s : sessions) config.manual_offsets[s.name] = s.offset_s;
  save_config(config, dir.path() / "strict.json");
  ASSERT_EQ(invoke(dir.path() / "strict.json", {"sync"}).code, 0);
  r = invoke(dir.path() / "strict.json", {"sample"});
  EXPECT_EQ(r.code, 0) << r.err;
}

TEST(Cli, CnnBaselineRunsOnRasters) {
  TempDir dir("cli_cnn");
  write_fixture(dir.path(), {2, 12.0, 5.0, 16, 8000, 1});
  auto config = load_config(dir.path() / "config.json");
  config.model = ModelChoice::Cnn;
  config.training.max_epochs = 3;
  save_config(config, dir.path() / "cnn.json");
  for (const auto& args : std::vector<std::vector<std::string>>{{"sync"},
                                                                {"sample"},
                                                                {"featurize"},
                                                                {"dataset", "build", "--task", "ja"},
                                                                {"dataset", "split", "--task", "ja"},
                                                                {"dataset", "balance", "--task", "ja"},
                                                                {"train", "--task", "ja", "--seeds", "4"},
                                                                {"eval", "--task", "ja", "--seeds", "4"}}) {
    const auto r = invoke(dir.path() / "cnn.json", args);
    ASSERT_EQ(r.code, 0) << args[0] << ": " << r.err;
  }
  const auto ckpt = load_checkpoint(dir.path() / "work" / "ja" / "runs" / "seed_4" / "checkpoint.gfck");
  EXPECT_EQ(ckpt.kind(), ModelKind::CnnBaseline);
}
