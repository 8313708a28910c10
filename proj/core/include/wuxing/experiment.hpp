#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "wuxing/engine.hpp"
#include "wuxing/trainer.hpp"

namespace wuxing {

/// Named training protocols. The case selector fixes the strategy set.
enum class Case {
  case1_K3_only,         // proportional K3 only
  case2_K1K3_same_rule,  // K1 and K3 both driven by the per-element correlation
  pid_I,
  pid_D,
  pid_P,
  pid_IP,
  pid_ID,
  pid_PD,
  pid_IPD,
};

std::string_view to_string(Case c) noexcept;
Case parse_case(std::string_view s);
Strategies strategies_for(Case c) noexcept;

struct DataSpec {
  std::string images = "data/mnist5k-images-idx3-ubyte";
  std::string labels = "data/mnist5k-labels-idx1-ubyte";
  std::size_t downsample = 2;  // 1 keeps full resolution
  double input_scale = 1.0;    // pixel drive = scale * intensity in [0, 1]
  std::size_t n_train = 1000;
  std::size_t n_test = 500;
  std::optional<std::uint64_t> split_seed;  // defaults to the experiment seed
};

/// Everything one run depends on. Serialised as a single JSON document.
struct ExperimentSpec {
  std::vector<std::size_t> layer_sizes{196, 64, 32, 10};
  Wiring wiring = Wiring::outer_full;
  bool assign_all_ports = false;
  std::uint64_t seed = 1;
  NeuronParams initial = NeuronParams::uniform(1.0, 0.5, 0.5);
  SimConfig sim{};
  TrainingConfig training{};
  DataSpec data{};
  Case case_id = Case::case1_K3_only;
  bool shuffle_each_epoch = true;
  /// Write measured seconds into metrics.csv; off keeps the file byte-stable.
  bool record_wall_time = false;

  /// Spec with `case_id` applied to training.strategies.
  static ExperimentSpec for_case(Case c);
  void validate() const;
};

std::string to_json(const ExperimentSpec& spec);
/// Missing keys keep their defaults; unknown keys are rejected.
ExperimentSpec parse_experiment(std::string_view text);
ExperimentSpec load_experiment(const std::filesystem::path& path);

struct MetricsRow {
  std::size_t epoch = 0;
  double train_acc = 0.0;
  double test_acc = 0.0;
  double mean_abs_error = 0.0;
  std::size_t updated_neurons = 0;
  std::size_t clamp_events = 0;
  double wall_time = 0.0;
};

inline constexpr std::string_view kMetricsHeader =
    "epoch,train_acc,test_acc,mean_abs_error,updated_neurons,clamp_events,wall_time";
std::string format_metrics_row(const MetricsRow& row);

struct Dataset {
  std::vector<Sample> train;
  std::vector<Sample> test;
  std::size_t features = 0;
};

/// Loads, downsamples and splits the IDX files named in `spec.data`.
Dataset load_dataset(const ExperimentSpec& spec);

struct TrainReport {
  std::vector<MetricsRow> rows;
  std::optional<std::string> divergence;
  std::optional<std::size_t> diverged_neuron;
  NetworkGraph graph;
  std::string rng_state;
};

/// Builds the network and trains it, evaluating before the first epoch and
/// after every epoch. Each row is also appended to `csv` as it is produced,
/// so a diverging run still leaves the rows before the failure.
TrainReport train_experiment(const ExperimentSpec& spec, const Dataset& data, std::ostream* csv);

/// Files written under `out_dir`: metrics.csv, config.json and, on success,
/// checkpoint.json.
TrainReport run_train(const ExperimentSpec& spec, const std::filesystem::path& out_dir);

}  // namespace wuxing
