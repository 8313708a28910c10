#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "wuxing/topology.hpp"

namespace wuxing {

/// How an input element combines the signals wired into it.
enum class FanIn {
  sum,  // drive = sum of upstream deviations
  mean  // drive = average of upstream deviations
};

struct SimConfig {
  double horizon = 10.0;  // T
  double step = 0.01;     // h
  FanIn fan_in = FanIn::sum;

  /// Number of integrator steps; throws ConfigError unless
  /// 0 < step <= horizon and horizon / step is an integer.
  std::size_t steps() const;
};

/// Per neuron, per element time integral of the deviation signal over [0, T].
struct TraceIntegrals {
  std::vector<ElementVector> per_neuron;

  const ElementVector& operator[](std::size_t n) const { return per_neuron[n]; }
  double at(const Port& p) const { return per_neuron[p.neuron][p.element]; }
};

struct PassResult {
  TraceIntegrals integrals;
  /// Largest |drive| seen on any input element of each neuron during the pass.
  std::vector<double> max_drive;
  std::vector<ElementVector> final_state;
};

/// Observer called after every accepted step with the full state and the
/// deviation from rest, both laid out neuron-major (5 entries per neuron).
using TraceSink = std::function<void(double t, std::span<const double> state,
                                     std::span<const double> deviation)>;

/// Writes "t,neuron,element,E,D" rows for every element at every step.
TraceSink csv_trace_writer(std::ostream& os);

/// The coupled ODE of one graph orientation, compiled for repeated runs.
/// Every input element's drive is its external signal plus the sum of the
/// deviations of all output elements wired into it, re-evaluated at every
/// RK4 stage. Deviation integrals use the trapezoid rule on the step grid.
class Simulator {
public:
  explicit Simulator(const NetworkGraph& g);

  /// `neurons` supplies parameters and rest states; `external` holds one
  /// constant drive per external input of the compiled graph.
  PassResult run(std::span<const Neuron> neurons, std::span<const double> external,
                 const SimConfig& cfg, const TraceSink& sink = {}) const;

  std::size_t neuron_count() const noexcept { return neuron_count_; }
  std::size_t external_count() const noexcept { return external_ports_.size(); }

private:
  struct InputPort {
    std::uint32_t flat;
    std::int32_t group;     // index into group_offsets_, or -1
    std::int32_t external;  // first external index feeding it, or -1
  };

  std::size_t neuron_count_ = 0;
  Dynamics dynamics_ = Dynamics::forward;
  std::vector<std::uint32_t> external_ports_;
  std::vector<InputPort> inputs_;
  std::vector<std::uint32_t> group_offsets_;
  std::vector<std::uint32_t> group_sources_;
};

/// Forward and backward simulators for one forward-oriented graph topology.
class Engine {
public:
  explicit Engine(const NetworkGraph& g);

  PassResult forward(const NetworkGraph& g, std::span<const double> x, const SimConfig& cfg,
                     const TraceSink& sink = {}) const;
  /// Runs the inverse dynamics on the reversed graph with each class error
  /// held constant at that class's port.
  PassResult backward(const NetworkGraph& g, std::span<const double> error,
                      const SimConfig& cfg, const TraceSink& sink = {}) const;

private:
  Simulator forward_;
  Simulator backward_;
};

PassResult forward_pass(const NetworkGraph& g, std::span<const double> x, const SimConfig& cfg);
PassResult backward_pass(const NetworkGraph& g, std::span<const double> error, const SimConfig& cfg);

/// Leb_c = (1/T) * integral of D at class c's output port.
std::vector<double> compute_leb(const TraceIntegrals& forward, const NetworkGraph& g,
                                const SimConfig& cfg);

/// Index of the largest entry, lowest index on ties.
std::size_t classify(std::span<const double> leb);

}  // namespace wuxing
