#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>

#include "wuxing/experiment.hpp"
#include "wuxing/topology.hpp"

namespace wuxing {

/// A trained network together with the experiment that produced it.
///
/// Format (JSON, version 1):
///   {
///     "format": "wuxing-checkpoint", "version": 1,
///     "epochs_completed": n,
///     "experiment": { ...ExperimentSpec... },
///     "graph": { ...wuxing-graph snapshot... },
///     "neurons": [{"k1": [5], "k2": [5], "k3": [5],
///                  "fixed_point": [5], "inverse_fixed_point": [5]}, ...],
///     "rng_state": "<std::mt19937_64 state words>"
///   }
struct Checkpoint {
  ExperimentSpec experiment;
  NetworkGraph graph;
  std::string rng_state;
  std::size_t epochs_completed = 0;
};

std::string serialize_checkpoint(const Checkpoint& c);
/// Throws ConfigError on malformed input or when the neuron list does not
/// match the graph.
Checkpoint parse_checkpoint(std::string_view text);

void save_checkpoint(const Checkpoint& c, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Read-only accuracy report of a checkpoint on a sample split. Throws
/// DomainError on an empty split and ConfigError when the samples do not fit
/// the checkpoint's graph.
Evaluation run_eval(const Checkpoint& c, std::span<const Sample> split);

std::string format_evaluation(const Evaluation& ev);

struct FixedPointRow {
  std::size_t neuron = 0;
  ElementVector analytic;
  ElementVector numeric;
  double residual = 0.0;
  double spectral_abscissa = 0.0;
  std::string error;  // nonempty when relaxation failed
};

/// Analytic estimate, settled rest state and residual for every neuron.
std::vector<FixedPointRow> inspect_fixed_points(std::span<const Neuron> neurons,
                                                const FixedPointOptions& opts = {});
std::string format_fixed_point_report(std::span<const FixedPointRow> rows);

}  // namespace wuxing
