#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wuxing/engine.hpp"
#include "wuxing/topology.hpp"

namespace wuxing {

/// Which parameter sets learn, and by which local rule.
struct Strategies {
  bool integral_k1 = false;      // K1 *= exp(+atan-squash(sum fwd * sum bwd))
  bool differential_k2 = false;  // K2 *= exp(-squash(fwd * bwd * inputnode)), per element
  bool proportional_k3 = true;   // K3 *= exp(-squash(fwd * bwd)), per element
  /// Redundant-adjustment mode: K1 *= exp(+squash(fwd * bwd)) per element,
  /// i.e. the proportional correlation reused for K1.
  bool proportional_k1 = false;

  bool any() const noexcept {
    return integral_k1 || differential_k2 || proportional_k3 || proportional_k1;
  }
  friend bool operator==(const Strategies&, const Strategies&) = default;
};

/// Which neurons count as forward input nodes for the K2 rule.
enum class InputNodeRule {
  driven,      // any neuron that saw nonzero forward drive
  first_layer  // only first-layer neurons that saw nonzero drive
};

struct TrainingConfig {
  double target1 = 1.0;
  double target2 = 0.0;
  double kt = 1.0;
  double signal_gate_eps = 1e-9;
  Strategies strategies{};
  std::size_t epochs = 10;
  ClampBounds clamp{};
  InputNodeRule inputnode = InputNodeRule::driven;
  FixedPointOptions fixed_point{};

  /// Throws ConfigError unless target1 > target2, kt > 0, eps >= 0 and the
  /// clamp interval is positive and non-empty.
  void validate() const;
};

/// Feedback signal per class: the label class is pushed up toward target1,
/// every other class is pulled down toward target2. Zero where met.
std::vector<double> output_error(std::span<const double> leb, std::size_t label,
                                 const TrainingConfig& cfg);

ElementVector correlation_proportional(const ElementVector& fwd, const ElementVector& bwd);
double correlation_integral(const ElementVector& fwd, const ElementVector& bwd);
ElementVector correlation_differential(const ElementVector& fwd, const ElementVector& bwd,
                                       bool is_forward_input_node);

/// atan(g1 * kt) / kt; bounded by pi / (2 kt).
double squash(double g1, double kt);
ElementVector squash(const ElementVector& g1, double kt);

/// Squashed correlations for one neuron. `k1` is the shared integral drive;
/// `k1_per_element` is only used by the redundant-adjustment mode.
struct UpdateDrive {
  double k1 = 0.0;
  ElementVector k1_per_element{};
  ElementVector k2{};
  ElementVector k3{};
};

struct UpdateResult {
  NeuronParams params;
  std::size_t clamp_events = 0;
  bool changed = false;
};

/// Multiplicative update of the enabled parameter sets, each entry clamped
/// to `bounds` afterwards. Returns `p` untouched when `gate` is false.
UpdateResult apply_updates(const NeuronParams& p, const UpdateDrive& drive, bool gate,
                           const Strategies& strategies, const ClampBounds& bounds);

struct Sample {
  std::vector<double> features;
  std::uint8_t label = 0;
};

struct LocalUpdateStats {
  std::vector<NeuronId> updated;  // neurons whose parameters changed
  std::size_t gated = 0;          // neurons that passed the two-signal gate
  std::size_t clamp_events = 0;
  std::size_t fixed_point_failures = 0;
};

/// Applies every neuron's local update from one forward/backward pass pair,
/// then refreshes the fixed points of changed neurons. A neuron whose new
/// fixed point cannot be found keeps its previous parameters.
LocalUpdateStats apply_local_updates(NetworkGraph& g, const PassResult& fwd, const PassResult& bwd,
                                     const TrainingConfig& cfg);

struct SampleOutcome {
  std::size_t predicted = 0;
  bool correct = false;
  double mean_abs_error = 0.0;
  LocalUpdateStats updates;
};

struct EpochMetrics {
  std::size_t samples = 0;
  double accuracy = 0.0;        // predictions made before each sample's update
  double mean_abs_error = 0.0;  // mean over samples of mean |error| over classes
  std::size_t updated_neurons = 0;
  std::size_t clamp_events = 0;
  std::size_t fixed_point_failures = 0;
  /// Set when a pass diverged; the metrics cover the samples before it.
  std::optional<std::string> divergence;
  std::optional<std::size_t> diverged_neuron;
};

struct Evaluation {
  std::size_t samples = 0;
  std::size_t correct = 0;
  /// Samples whose forward pass diverged; scored as incorrect and left out
  /// of the confusion matrix and the error mean.
  std::size_t diverged = 0;
  double accuracy = 0.0;
  double mean_abs_error = 0.0;
  /// confusion[label][predicted]
  std::vector<std::vector<std::size_t>> confusion;
};

/// Online trainer: the single writer of the graph's parameters. Parameters
/// are frozen during a pass and updated between samples.
class Trainer {
public:
  Trainer(NetworkGraph& graph, TrainingConfig cfg, SimConfig sim);

  SampleOutcome train_sample(const Sample& s);
  EpochMetrics train_epoch(std::span<const Sample> data);
  Evaluation evaluate(std::span<const Sample> data) const;

  const NetworkGraph& graph() const noexcept { return graph_; }
  const TrainingConfig& config() const noexcept { return cfg_; }
  const SimConfig& sim() const noexcept { return sim_; }

private:
  NetworkGraph& graph_;
  TrainingConfig cfg_;
  SimConfig sim_;
  Engine engine_;
};

/// Read-only evaluation of a graph on a data set.
Evaluation evaluate(const NetworkGraph& g, std::span<const Sample> data, const SimConfig& sim,
                    const TrainingConfig& cfg);

}  // namespace wuxing
