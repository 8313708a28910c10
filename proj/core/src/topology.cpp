#include "wuxing/topology.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "wuxing/errors.hpp"
#include "wuxing/rng.hpp"

namespace wuxing {
namespace {

struct LayerConstraints {
  bool single_input = false;
  bool single_output = false;
};

bool boundary_is_full(Wiring w, std::size_t boundary, std::size_t boundaries) {
  switch (w) {
    case Wiring::full: return true;
    case Wiring::random: return false;
    case Wiring::outer_full: return boundary == 0 || boundary + 1 == boundaries;
  }
  return false;
}

std::array<PortRole, kElements> draw_roles(Rng& rng, const LayerConstraints& c, bool all_ports) {
  std::array<std::uint8_t, kElements> order{0, 1, 2, 3, 4};
  shuffle(std::span<std::uint8_t>(order), rng);

  std::array<PortRole, kElements> roles{};
  roles[order[0]] = PortRole::input;
  roles[order[1]] = PortRole::output;

  std::vector<PortRole> choices;
  if (!all_ports || (c.single_input && c.single_output)) choices.push_back(PortRole::unused);
  if (!c.single_input) choices.push_back(PortRole::input);
  if (!c.single_output) choices.push_back(PortRole::output);
  for (std::size_t k = 2; k < kElements; ++k)
    roles[order[k]] = choices[uniform_index(rng, choices.size())];
  return roles;
}

std::vector<Port> ports_with_role(const NetworkGraph& g, std::span<const NeuronId> layer,
                                  PortRole role) {
  std::vector<Port> out;
  for (NeuronId n : layer)
    for (std::uint8_t e = 0; e < kElements; ++e)
      if (g.neurons[n].roles[e] == role) out.push_back({n, e});
  return out;
}

Port single_port(const NetworkGraph& g, NeuronId n, PortRole role) {
  for (std::uint8_t e = 0; e < kElements; ++e)
    if (g.neurons[n].roles[e] == role) return {n, e};
  throw TopologyError("neuron " + std::to_string(n) + " has no port with the requested role");
}

PortRole flip(PortRole r) {
  switch (r) {
    case PortRole::input: return PortRole::output;
    case PortRole::output: return PortRole::input;
    case PortRole::unused: return PortRole::unused;
  }
  return r;
}

std::string port_name(const Port& p) {
  return "neuron " + std::to_string(p.neuron) + " element " + std::to_string(p.element);
}

}  // namespace

std::vector<std::size_t> NetworkGraph::layer_sizes() const {
  std::vector<std::size_t> sizes;
  sizes.reserve(layers.size());
  for (const auto& l : layers) sizes.push_back(l.size());
  return sizes;
}

std::vector<std::size_t> NetworkGraph::layer_index() const {
  std::vector<std::size_t> idx(neurons.size(), static_cast<std::size_t>(-1));
  for (std::size_t l = 0; l < layers.size(); ++l)
    for (NeuronId n : layers[l])
      if (n < idx.size()) idx[n] = l;
  return idx;
}

void refresh_fixed_points(Neuron& n, const FixedPointOptions& opts) {
  n.fixed_point = numeric_fixed_point(n.params, Dynamics::forward, opts).b0;
  n.inverse_fixed_point = numeric_fixed_point(n.params, Dynamics::inverse, opts).b0;
}

NetworkGraph build_network(std::span<const std::size_t> layer_sizes, Wiring wiring,
                           std::uint64_t seed, const BuildOptions& opts) {
  if (layer_sizes.size() < 2) throw TopologyError("a network needs at least two layers");
  for (std::size_t l = 0; l < layer_sizes.size(); ++l)
    if (layer_sizes[l] == 0) throw TopologyError("layer " + std::to_string(l) + " is empty");
  validate(opts.initial);

  const std::size_t n_layers = layer_sizes.size();
  const std::size_t boundaries = n_layers - 1;
  Rng rng(seed);

  NetworkGraph g;
  g.seed = seed;
  g.orientation = Orientation::forward;

  Neuron proto;
  proto.params = opts.initial;
  refresh_fixed_points(proto, opts.fixed_point);

  NeuronId next = 0;
  for (std::size_t l = 0; l < n_layers; ++l) {
    LayerConstraints c;
    c.single_input = l == 0 || boundary_is_full(wiring, l - 1, boundaries);
    c.single_output = l + 1 == n_layers;
    auto& layer = g.layers.emplace_back();
    for (std::size_t k = 0; k < layer_sizes[l]; ++k) {
      Neuron n = proto;
      n.roles = draw_roles(rng, c, opts.assign_all_ports);
      g.neurons.push_back(n);
      layer.push_back(next++);
    }
  }

  std::set<Edge> edges;
  for (std::size_t b = 0; b < boundaries; ++b) {
    const auto& up = g.layers[b];
    const auto& down = g.layers[b + 1];
    if (boundary_is_full(wiring, b, boundaries)) {
      const auto senders = ports_with_role(g, up, PortRole::output);
      for (NeuronId r : down) {
        const Port dst = single_port(g, r, PortRole::input);
        for (const Port& src : senders) edges.insert({src, dst});
      }
      continue;
    }
    auto outs = ports_with_role(g, up, PortRole::output);
    auto ins = ports_with_role(g, down, PortRole::input);
    if (outs.empty() || ins.empty())
      throw TopologyError("boundary " + std::to_string(b) + " between layers " +
                          std::to_string(b) + " and " + std::to_string(b + 1) +
                          " has no ports to wire");
    shuffle(std::span<Port>(outs), rng);
    shuffle(std::span<Port>(ins), rng);
    const std::size_t paired = std::min(outs.size(), ins.size());
    for (std::size_t i = 0; i < paired; ++i) edges.insert({outs[i], ins[i]});
    for (std::size_t i = paired; i < outs.size(); ++i)
      edges.insert({outs[i], ins[uniform_index(rng, ins.size())]});
    for (std::size_t i = paired; i < ins.size(); ++i)
      edges.insert({outs[uniform_index(rng, outs.size())], ins[i]});
  }
  g.edges.assign(edges.begin(), edges.end());

  for (NeuronId n : g.layers.front()) g.external_inputs.push_back(single_port(g, n, PortRole::input));
  for (NeuronId n : g.layers.back()) g.external_outputs.push_back(single_port(g, n, PortRole::output));

  if (auto report = validate(g); !report.ok())
    throw TopologyError("constructed graph is invalid: " + report.summary());
  return g;
}

NetworkGraph reverse(const NetworkGraph& g) {
  NetworkGraph r;
  r.layers.assign(g.layers.rbegin(), g.layers.rend());
  r.neurons = g.neurons;
  for (auto& n : r.neurons)
    for (auto& role : n.roles) role = flip(role);
  r.edges.reserve(g.edges.size());
  for (const Edge& e : g.edges) r.edges.push_back({e.dst, e.src});
  std::sort(r.edges.begin(), r.edges.end());
  r.external_inputs = g.external_outputs;
  r.external_outputs = g.external_inputs;
  r.orientation = g.orientation == Orientation::forward ? Orientation::backward : Orientation::forward;
  r.seed = g.seed;
  return r;
}

std::string ValidationReport::summary() const {
  std::ostringstream os;
  for (std::size_t i = 0; i < violations.size(); ++i) {
    if (i) os << "; ";
    os << violations[i].message;
  }
  return os.str();
}

ValidationReport validate(const NetworkGraph& g) {
  ValidationReport report;
  auto fail = [&](std::string msg, std::optional<Port> p = std::nullopt) {
    if (p) msg += " [" + port_name(*p) + "]";
    report.violations.push_back({std::move(msg), p});
  };

  if (g.layers.size() < 2) fail("fewer than two layers");

  std::vector<int> seen(g.neurons.size(), 0);
  for (const auto& layer : g.layers) {
    if (layer.empty()) fail("empty layer");
    for (NeuronId n : layer) {
      if (n >= g.neurons.size()) {
        fail("layer lists unknown neuron " + std::to_string(n));
        continue;
      }
      ++seen[n];
    }
  }
  for (std::size_t n = 0; n < seen.size(); ++n)
    if (seen[n] != 1) fail("neuron " + std::to_string(n) + " appears in " +
                           std::to_string(seen[n]) + " layers");
  if (!report.ok()) return report;

  const auto layer_of = g.layer_index();
  const std::size_t last = g.layers.size() - 1;
  auto in_range = [&](const Port& p) {
    return p.neuron < g.neurons.size() && p.element < kElements;
  };
  auto role_of = [&](const Port& p) { return g.neurons[p.neuron].roles[p.element]; };

  std::set<Port> used_as_input, used_as_output;
  std::vector<int> incoming(g.neurons.size() * kElements, 0);

  for (std::size_t i = 0; i < g.external_inputs.size(); ++i) {
    const Port& p = g.external_inputs[i];
    if (!in_range(p)) { fail("external input " + std::to_string(i) + " out of range"); continue; }
    if (layer_of[p.neuron] != 0) fail("external input not in the first layer", p);
    if (role_of(p) != PortRole::input) fail("external input on a non-input element", p);
    used_as_input.insert(p);
    ++incoming[p.flat()];
  }
  for (std::size_t i = 0; i < g.external_outputs.size(); ++i) {
    const Port& p = g.external_outputs[i];
    if (!in_range(p)) { fail("external output " + std::to_string(i) + " out of range"); continue; }
    if (layer_of[p.neuron] != last) fail("external output not in the last layer", p);
    if (role_of(p) != PortRole::output) fail("external output on a non-output element", p);
    used_as_output.insert(p);
  }
  for (const Edge& e : g.edges) {
    if (!in_range(e.src) || !in_range(e.dst)) { fail("edge references an unknown port"); continue; }
    if (role_of(e.src) != PortRole::output) fail("edge source is not an output element", e.src);
    if (role_of(e.dst) != PortRole::input) fail("edge target is not an input element", e.dst);
    if (layer_of[e.dst.neuron] != layer_of[e.src.neuron] + 1)
      fail("edge does not join adjacent layers (" + std::to_string(layer_of[e.src.neuron]) +
               " -> " + std::to_string(layer_of[e.dst.neuron]) + ")",
           e.dst);
    used_as_output.insert(e.src);
    used_as_input.insert(e.dst);
    ++incoming[e.dst.flat()];
  }
  for (const Port& p : used_as_input)
    if (used_as_output.count(p)) fail("element used as both input and output", p);
  if (!std::is_sorted(g.edges.begin(), g.edges.end()) ||
      std::adjacent_find(g.edges.begin(), g.edges.end()) != g.edges.end())
    fail("edge list is not sorted and unique");

  for (NeuronId n = 0; n < g.neurons.size(); ++n) {
    int inputs = 0, outputs = 0;
    for (std::uint8_t e = 0; e < kElements; ++e) {
      const Port p{n, e};
      const PortRole r = g.neurons[n].roles[e];
      inputs += r == PortRole::input;
      outputs += r == PortRole::output;
      if (r == PortRole::input && incoming[p.flat()] == 0) fail("input element has no source", p);
    }
    if (inputs == 0) fail("neuron " + std::to_string(n) + " has no input element");
    if (outputs == 0) fail("neuron " + std::to_string(n) + " has no output element");
  }
  return report;
}

std::string_view to_string(Wiring w) noexcept {
  switch (w) {
    case Wiring::outer_full: return "outer_full";
    case Wiring::random: return "random";
    case Wiring::full: return "full";
  }
  return "outer_full";
}

Wiring parse_wiring(std::string_view s) {
  if (s == "outer_full") return Wiring::outer_full;
  if (s == "random") return Wiring::random;
  if (s == "full") return Wiring::full;
  throw ConfigError("unknown wiring mode '" + std::string(s) + "'");
}

}  // namespace wuxing
