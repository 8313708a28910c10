#include <json.hpp>

#include "wuxing/errors.hpp"
#include "wuxing/topology.hpp"

// Graph snapshot format, version 1:
//
//   {
//     "format": "wuxing-graph", "version": 1,
//     "orientation": "forward" | "backward",
//     "seed": <uint64>,
//     "layers": [[neuron ids...], ...],
//     "roles": ["IO--O", ...],          // per neuron, per element: I input, O output, - unused
//     "edges": [[src_neuron, src_element, dst_neuron, dst_element], ...],
//     "external_inputs":  [[neuron, element], ...],
//     "external_outputs": [[neuron, element], ...]
//   }

namespace wuxing {
namespace {

using nlohmann::json;

constexpr std::string_view kFormat = "wuxing-graph";
constexpr int kVersion = 1;

char role_char(PortRole r) {
  switch (r) {
    case PortRole::input: return 'I';
    case PortRole::output: return 'O';
    case PortRole::unused: return '-';
  }
  return '-';
}

PortRole role_from(char c) {
  switch (c) {
    case 'I': return PortRole::input;
    case 'O': return PortRole::output;
    case '-': return PortRole::unused;
  }
  throw ConfigError(std::string("unknown port role '") + c + "'");
}

json port_json(const Port& p) { return json::array({p.neuron, p.element}); }

Port port_from(const json& j) {
  if (!j.is_array() || j.size() != 2) throw ConfigError("port must be [neuron, element]");
  return {j.at(0).get<NeuronId>(), j.at(1).get<std::uint8_t>()};
}

}  // namespace

std::string serialize_graph(const NetworkGraph& g) {
  json j;
  j["format"] = kFormat;
  j["version"] = kVersion;
  j["orientation"] = g.orientation == Orientation::forward ? "forward" : "backward";
  j["seed"] = g.seed;
  j["layers"] = g.layers;
  json roles = json::array();
  for (const auto& n : g.neurons) {
    std::string s;
    for (PortRole r : n.roles) s += role_char(r);
    roles.push_back(s);
  }
  j["roles"] = std::move(roles);
  json edges = json::array();
  for (const Edge& e : g.edges)
    edges.push_back(json::array({e.src.neuron, e.src.element, e.dst.neuron, e.dst.element}));
  j["edges"] = std::move(edges);
  json ins = json::array(), outs = json::array();
  for (const Port& p : g.external_inputs) ins.push_back(port_json(p));
  for (const Port& p : g.external_outputs) outs.push_back(port_json(p));
  j["external_inputs"] = std::move(ins);
  j["external_outputs"] = std::move(outs);
  return j.dump();
}

NetworkGraph parse_graph(std::string_view text, const BuildOptions& opts) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("graph snapshot is not valid JSON: ") + e.what());
  }
  try {
    if (j.at("format").get<std::string>() != kFormat) throw ConfigError("not a wuxing-graph snapshot");
    if (j.at("version").get<int>() != kVersion)
      throw ConfigError("unsupported graph snapshot version " + j.at("version").dump());

    NetworkGraph g;
    const auto orient = j.at("orientation").get<std::string>();
    if (orient != "forward" && orient != "backward") throw ConfigError("bad orientation " + orient);
    g.orientation = orient == "forward" ? Orientation::forward : Orientation::backward;
    g.seed = j.at("seed").get<std::uint64_t>();
    g.layers = j.at("layers").get<std::vector<std::vector<NeuronId>>>();

    Neuron proto;
    proto.params = opts.initial;
    refresh_fixed_points(proto, opts.fixed_point);
    for (const auto& r : j.at("roles")) {
      const auto s = r.get<std::string>();
      if (s.size() != kElements) throw ConfigError("role string must have 5 characters");
      Neuron n = proto;
      for (std::size_t e = 0; e < kElements; ++e) n.roles[e] = role_from(s[e]);
      g.neurons.push_back(n);
    }
    for (const auto& e : j.at("edges")) {
      if (!e.is_array() || e.size() != 4) throw ConfigError("edge must have 4 entries");
      g.edges.push_back({{e[0].get<NeuronId>(), e[1].get<std::uint8_t>()},
                         {e[2].get<NeuronId>(), e[3].get<std::uint8_t>()}});
    }
    for (const auto& p : j.at("external_inputs")) g.external_inputs.push_back(port_from(p));
    for (const auto& p : j.at("external_outputs")) g.external_outputs.push_back(port_from(p));
    return g;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed graph snapshot: ") + e.what());
  }
}

}  // namespace wuxing
