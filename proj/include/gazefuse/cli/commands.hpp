#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "gazefuse/cli/config.hpp"
#include "gazefuse/error.hpp"
#include "gazefuse/eval/bench.hpp"
#include "gazefuse/eval/metrics.hpp"

namespace gazefuse::cli {

/// An upstream artifact is missing; the message names the subcommand that produces it.
class MissingArtifactError : public LookupError {
 public:
  MissingArtifactError(const std::filesystem::path& path, const std::string& producer);
};

/// Some sessions (or seeds) failed while the rest completed. Every failure
/// is listed in the message.
class PartialFailure : public Error {
 public:
  PartialFailure(const std::string& stage, const std::vector<std::string>& failures);
  const std::vector<std::string>& failures() const { return failures_; }

 private:
  std::vector<std::string> failures_;
};

/// Artifact locations under the work directory.
struct Workspace {
  explicit Workspace(ProjectConfig config);

  ProjectConfig config;

  std::filesystem::path offsets() const;
  std::filesystem::path frame_index() const;
  std::filesystem::path feature_root() const;
  std::filesystem::path feature_index() const;
  std::filesystem::path task_dir(Task task) const;
  std::filesystem::path samples(Task task) const;
  std::filesystem::path split(Task task) const;
  std::filesystem::path balanced_split(Task task) const;
  std::filesystem::path checkpoint(Task task, std::uint64_t seed) const;
  std::filesystem::path history(Task task, std::uint64_t seed) const;
  std::filesystem::path eval_dir(Task task) const;
  std::filesystem::path predictions(Task task) const;
  std::filesystem::path timeline(const std::string& session) const;
  std::filesystem::path external_dir() const;
  std::filesystem::path bench(Task task) const;
};

// Pipeline stages, in workflow order. Each writes its artifacts plus
// provenance manifests and logs one line per unit of work to `log`.
void run_sync(const Workspace& ws, std::ostream& log);
void run_sample(const Workspace& ws, std::ostream& log);
void run_featurize(const Workspace& ws, std::ostream& log);
void run_dataset_build(const Workspace& ws, Task task, std::ostream& log);
void run_dataset_split(const Workspace& ws, Task task, std::ostream& log);
void run_dataset_balance(const Workspace& ws, Task task, std::ostream& log);
void run_train(const Workspace& ws, Task task, const std::vector<std::uint64_t>& seeds, std::ostream& log);
AggregateReport run_eval(const Workspace& ws, Task task, const std::vector<std::uint64_t>& seeds, std::ostream& log);
void run_predict(const Workspace& ws, Task task, std::uint64_t seed, bool all_sessions, std::ostream& log);
std::vector<MetricReport> run_import_predictions(const Workspace& ws, const std::filesystem::path& input,
                                                 const std::string& name, std::ostream& log);
void run_export_timeline(const Workspace& ws, const std::vector<std::string>& sessions, std::ostream& log);
ThroughputReport run_bench(const Workspace& ws, Task task, std::uint64_t seed, const BenchOptions& options,
                           std::ostream& log);

/// Full command-line entry point. Returns 0 on success, 1 when a stage
/// fails and 2 for usage or configuration errors.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace gazefuse::cli
