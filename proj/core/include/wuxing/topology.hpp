#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wuxing/neuron.hpp"

namespace wuxing {

using NeuronId = std::uint32_t;

enum class PortRole : std::uint8_t { unused, input, output };

/// How adjacent layers are wired.
///  - outer_full: boundaries touching the first or last layer are fully
///                connected, interior boundaries use uniform random port matching.
///  - random:     every boundary uses random port matching.
///  - full:       every boundary is fully connected.
enum class Wiring { outer_full, random, full };

/// Which way signals travel through the graph. A backward graph is the
/// reversal of a forward one and is simulated with the inverse dynamics.
enum class Orientation { forward, backward };

struct Port {
  NeuronId neuron = 0;
  std::uint8_t element = 0;

  std::size_t flat() const noexcept { return neuron * kElements + element; }
  friend auto operator<=>(const Port&, const Port&) = default;
};

struct Edge {
  Port src;
  Port dst;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

struct Neuron {
  NeuronParams params;
  ElementVector fixed_point;          // rest state of the forward dynamics
  ElementVector inverse_fixed_point;  // rest state of the inverse dynamics
  std::array<PortRole, kElements> roles{};

  friend bool operator==(const Neuron&, const Neuron&) = default;
};

/// A layered network of 5-element neurons joined through element ports.
/// Edges carry no weights; fan-out copies a signal, fan-in sums signals.
struct NetworkGraph {
  std::vector<std::vector<NeuronId>> layers;
  std::vector<Neuron> neurons;
  std::vector<Edge> edges;             // sorted, unique
  std::vector<Port> external_inputs;   // index = input feature (or error class when backward)
  std::vector<Port> external_outputs;  // index = class (or feature when backward)
  Orientation orientation = Orientation::forward;
  std::uint64_t seed = 0;

  std::size_t neuron_count() const noexcept { return neurons.size(); }
  std::vector<std::size_t> layer_sizes() const;
  /// Layer index of every neuron, in this graph's orientation.
  std::vector<std::size_t> layer_index() const;
  Dynamics dynamics() const noexcept {
    return orientation == Orientation::forward ? Dynamics::forward : Dynamics::inverse;
  }

  friend bool operator==(const NetworkGraph&, const NetworkGraph&) = default;
};

struct BuildOptions {
  /// Give every otherwise-unused element a role wherever the layer
  /// constraints allow it (the "all interfaces carry a signal" reading).
  bool assign_all_ports = false;
  NeuronParams initial = NeuronParams::uniform(1.0, 0.5, 0.5);
  FixedPointOptions fixed_point{};
};

/// Builds a forward-oriented graph; a pure function of its arguments.
/// Feature j drives the single input port of first-layer neuron j and class c
/// is read from the single output port of last-layer neuron c.
NetworkGraph build_network(std::span<const std::size_t> layer_sizes, Wiring wiring,
                           std::uint64_t seed, const BuildOptions& opts = {});

/// Flips every edge, swaps input and output roles and the external port maps,
/// reverses the layer order and toggles the orientation. An involution.
NetworkGraph reverse(const NetworkGraph& g);

/// Recomputes both fixed points of neuron n from its current parameters.
void refresh_fixed_points(Neuron& n, const FixedPointOptions& opts = {});

struct Violation {
  std::string message;
  std::optional<Port> port;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const noexcept { return violations.empty(); }
  std::string summary() const;
};

ValidationReport validate(const NetworkGraph& g);

/// Versioned plain-text (JSON) snapshot of the topology: layer sizes, roles,
/// edges, external ports, orientation and seed. Parameters are not included;
/// parse_graph re-initialises neurons from `initial`.
std::string serialize_graph(const NetworkGraph& g);
NetworkGraph parse_graph(std::string_view text, const BuildOptions& opts = {});

std::string_view to_string(Wiring w) noexcept;
Wiring parse_wiring(std::string_view s);

}  // namespace wuxing
