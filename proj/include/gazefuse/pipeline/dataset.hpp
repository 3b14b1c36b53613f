#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "gazefuse/features/feature_store.hpp"
#include "gazefuse/optim/train.hpp"
#include "gazefuse/pipeline/annotations.hpp"
#include "gazefuse/pipeline/frames.hpp"

namespace gazefuse {

/// A synchronized frame pair with its label. Features are looked up in the
/// feature store by (session, view, frame timestamp).
struct DualFrameSample {
  std::string session;
  FramePair frames;
  HeadBox box_a;
  HeadBox box_b;
  int label = 0;
  bool train_eligible = true;  // false inside an ambiguous event
  bool test_eligible = true;   // false inside an ambiguous event without a confident label

  bool operator==(const DualFrameSample&) const = default;
};

struct LabelingResult {
  std::vector<DualFrameSample> samples;
  std::vector<std::string> warnings;
};

/// label(t) = 1 iff the tick lies in [start, end] of a confident event of
/// `task`. Ticks inside an ambiguous event of `task` are not train/val
/// eligible, and are test eligible only when a confident event also covers
/// them. Overlapping confident events are merged with a warning.
/// Events of the other task are ignored.
LabelingResult label_frames(const std::string& session, std::span<const HeadPair> pairs,
                            std::span<const EventAnnotation> annotations, Task task);

struct DatasetSplit {
  Task task = Task::MutualGaze;
  std::vector<DualFrameSample> train;
  std::vector<DualFrameSample> validation;
  std::vector<DualFrameSample> test;
};

/// Held-out sessions go to test in full (test-eligible samples). Every
/// other session's train-eligible samples are ordered by tick time; the
/// first ceil(val_fraction * n) form validation, the rest train.
/// Throws ConfigError for an empty sample set, an empty held-out list, a
/// held-out session absent from the data, or val_fraction outside [0, 1).
DatasetSplit temporal_split(std::span<const DualFrameSample> samples, std::span<const std::string> held_out_sessions,
                            Task task, double val_fraction = 0.10);

/// Downsamples the majority class without replacement to the minority
/// count, drawing from the "balance" stream of `seed`. Kept samples stay in
/// their input order. Throws BalancingError if a class is absent.
std::vector<DualFrameSample> balance_test(std::span<const DualFrameSample> test, std::uint64_t seed);

/// Sample table. Header:
/// session,tick_s,time_a_s,time_b_s,label,train_eligible,test_eligible,a_x0,a_y0,a_x1,a_y1,b_x0,b_y0,b_x1,b_y1
void write_samples_csv(std::ostream& out, std::span<const DualFrameSample> samples);
std::vector<DualFrameSample> read_samples_csv(std::istream& in, const std::string& source = "<samples>");

/// Split table: the sample columns prefixed by a `split` column
/// (train, validation or test) and the task in the first line as "# task=MG".
void write_split_csv(std::ostream& out, const DatasetSplit& split);
DatasetSplit read_split_csv(std::istream& in, const std::string& source = "<split>");

/// Loads both views' token sequences for each sample.
std::vector<TrainingExample> load_examples(const FeatureStore& store, std::span<const DualFrameSample> samples,
                                           View reference = View::Infant);

}  // namespace gazefuse
