#include <CLI11.hpp>

#include <cstdlib>
#include <ostream>

#include "gazefuse/cli/commands.hpp"
#include "gazefuse/cli/fixture.hpp"
#include "gazefuse/text.hpp"
#include "gazefuse/version.hpp"

namespace gazefuse::cli {

namespace fs = std::filesystem;

namespace {

struct Options {
  std::string config;
  std::string work_dir;
  std::size_t workers = 0;
  std::string task;
  std::vector<std::uint64_t> seeds;
  std::uint64_t seed = 0;
  bool all_sessions = false;
  std::string backbone = "toy";
  std::vector<std::string> held_out;
  std::vector<std::string> sessions;
  std::string input;
  std::string name;
  std::string out;
  FixtureSpec fixture;
  BenchOptions bench;
};

Workspace open_workspace(const Options& o) {
  std::string path = o.config;
  if (path.empty()) {
    if (const char* env = std::getenv(kConfigEnvVar)) path = env;
  }
  if (path.empty()) {
    throw ConfigError(std::string("no config file: pass --config or set ") + kConfigEnvVar);
  }
  auto config = load_config(path);
  if (!o.work_dir.empty()) config.work_dir = fs::absolute(o.work_dir);
  if (o.workers > 0) config.workers = o.workers;
  if (!o.held_out.empty()) config.held_out_sessions = o.held_out;
  config.validate();
  return Workspace(std::move(config));
}

Task task_of(const Options& o) { return parse_task(o.task); }

std::vector<std::uint64_t> seeds_of(const Options& o, const Workspace& ws) {
  return o.seeds.empty() ? ws.config.seeds : o.seeds;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Dual-view gaze-behaviour classification pipeline", "gazefuse"};
  app.set_version_flag("--version", std::string("gazefuse ") + kVersion);
  app.require_subcommand(1);
  Options o;
  app.add_option("-c,--config", o.config, std::string("Project config (JSON); default $") + kConfigEnvVar);
  app.add_option("--work-dir", o.work_dir, "Override paths.work_dir");
  app.add_option("-j,--workers", o.workers, "Per-session worker threads (default from config)");

  std::function<void()> action;
  auto on = [&](CLI::App* sub, std::function<void()> fn) { sub->callback([&action, fn] { action = fn; }); };
  auto add_task = [&](CLI::App* sub) {
    sub->add_option("-t,--task", o.task, "mg or ja")->required()->check(CLI::IsMember({"mg", "ja", "MG", "JA"}));
  };

  auto* fixture = app.add_subcommand("fixture", "Generate the synthetic fixture study");
  fixture->add_option("-o,--out", o.out, "Output directory")->required();
  fixture->add_option("--sessions", o.fixture.sessions, "Number of sessions");
  fixture->add_option("--duration", o.fixture.duration_s, "Seconds per session");
  fixture->add_option("--seed", o.fixture.seed, "Fixture seed");
  on(fixture, [&] {
    const auto sessions = write_fixture(o.out, o.fixture);
    for (const auto& s : sessions) {
      out << "fixture " << s.name << ": true offset " << text::format_double(s.offset_s) << " s\n";
    }
    out << "wrote " << (fs::path(o.out) / "config.json").string() << '\n';
  });

  on(app.add_subcommand("sync", "Estimate per-session camera offsets from audio"),
     [&] { run_sync(open_workspace(o), out); });
  on(app.add_subcommand("sample", "Pair synchronized frames at the sampling rate"),
     [&] { run_sample(open_workspace(o), out); });
  auto* featurize = app.add_subcommand("featurize", "Extract per-frame token features into the feature store");
  featurize->add_option("--backbone", o.backbone, "Feature extractor")->check(CLI::IsMember({"toy"}));
  on(featurize, [&] { run_featurize(open_workspace(o), out); });

  auto* dataset = app.add_subcommand("dataset", "Labeled samples, temporal split and test balancing");
  dataset->require_subcommand(1);
  auto* build = dataset->add_subcommand("build", "Label synchronized pairs from annotations");
  add_task(build);
  on(build, [&] { run_dataset_build(open_workspace(o), task_of(o), out); });
  auto* split = dataset->add_subcommand("split", "Temporal train/validation split plus held-out test sessions");
  add_task(split);
  split->add_option("--held-out", o.held_out, "Held-out test sessions (overrides config)");
  on(split, [&] { run_dataset_split(open_workspace(o), task_of(o), out); });
  auto* balance = dataset->add_subcommand("balance", "Downsample the test majority class");
  add_task(balance);
  on(balance, [&] { run_dataset_balance(open_workspace(o), task_of(o), out); });

  auto* train_cmd = app.add_subcommand("train", "Train one model per seed");
  add_task(train_cmd);
  train_cmd->add_option("--seeds", o.seeds, "Comma-separated seeds (default from config)")->delimiter(',');
  on(train_cmd, [&] {
    const auto ws = open_workspace(o);
    run_train(ws, task_of(o), seeds_of(o, ws), out);
  });

  auto* eval_cmd = app.add_subcommand("eval", "Score trained seeds on the balanced test set");
  add_task(eval_cmd);
  eval_cmd->add_option("--seeds", o.seeds, "Comma-separated seeds (default from config)")->delimiter(',');
  on(eval_cmd, [&] {
    const auto ws = open_workspace(o);
    run_eval(ws, task_of(o), seeds_of(o, ws), out);
  });

  auto* predict = app.add_subcommand("predict", "Write per-second probabilities for held-out sessions");
  add_task(predict);
  auto* seed_opt = predict->add_option("--seed", o.seed, "Checkpoint seed (default: first config seed)");
  predict->add_flag("--all-sessions", o.all_sessions, "Predict every session, not just held-out ones");
  on(predict, [&] {
    const auto ws = open_workspace(o);
    run_predict(ws, task_of(o), seed_opt->count() ? o.seed : ws.config.seeds.front(), o.all_sessions, out);
  });

  auto* import = app.add_subcommand("import-predictions", "Import and score an external prediction CSV");
  import->add_option("-i,--input", o.input, "Prediction CSV")->required();
  import->add_option("--name", o.name, "Name for the imported set (default: file stem)");
  on(import, [&] {
    run_import_predictions(open_workspace(o), o.input, o.name.empty() ? fs::path(o.input).stem().string() : o.name,
                           out);
  });

  auto* timeline = app.add_subcommand("export-timeline", "Write timeline documents for review");
  timeline->add_option("-s,--session", o.sessions, "Sessions (default: held-out sessions)");
  on(timeline, [&] { run_export_timeline(open_workspace(o), o.sessions, out); });

  auto* bench = app.add_subcommand("bench", "Measure eval-mode inference throughput");
  add_task(bench);
  auto* bench_seed = bench->add_option("--seed", o.seed, "Checkpoint seed (default: first config seed)");
  bench->add_option("--batch-size", o.bench.batch_size, "Batch size");
  bench->add_option("--min-samples", o.bench.min_samples, "Minimum timed samples");
  on(bench, [&] {
    const auto ws = open_workspace(o);
    run_bench(ws, task_of(o), bench_seed->count() ? o.seed : ws.config.seeds.front(), o.bench, out);
  });

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << std::string("gazefuse ") + kVersion << '\n';
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n';
    return 2;
  }

  try {
    action();
    return 0;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return 2;
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace gazefuse::cli
