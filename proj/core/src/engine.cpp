#include "wuxing/engine.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>

#include "wuxing/errors.hpp"
#include "wuxing/integrator.hpp"

namespace wuxing {
namespace {

constexpr std::array<std::size_t, kElements> kPrev{4, 0, 1, 2, 3};
constexpr std::array<std::size_t, kElements> kPrev2{3, 4, 0, 1, 2};
constexpr std::array<std::size_t, kElements> kNext{1, 2, 3, 4, 0};
constexpr std::array<std::size_t, kElements> kNext2{2, 3, 4, 0, 1};

}  // namespace

std::size_t SimConfig::steps() const {
  if (!(step > 0.0) || !(horizon > 0.0) || step > horizon)
    throw ConfigError("simulation needs 0 < step <= horizon");
  const double ratio = horizon / step;
  const double rounded = std::round(ratio);
  if (std::abs(ratio - rounded) > 1e-9 * std::max(1.0, ratio))
    throw ConfigError("horizon must be an integer multiple of the step");
  return static_cast<std::size_t>(rounded);
}

TraceSink csv_trace_writer(std::ostream& os) {
  os << "t,neuron,element,E,D\n";
  return [&os](double t, std::span<const double> state, std::span<const double> dev) {
    for (std::size_t i = 0; i < state.size(); ++i)
      os << t << ',' << i / kElements << ',' << i % kElements << ',' << state[i] << ','
         << dev[i] << '\n';
  };
}

Simulator::Simulator(const NetworkGraph& g)
    : neuron_count_(g.neuron_count()), dynamics_(g.dynamics()) {
  const std::size_t n_ports = neuron_count_ * kElements;
  std::vector<std::vector<std::uint32_t>> sources(n_ports);
  for (const Edge& e : g.edges)
    sources[e.dst.flat()].push_back(static_cast<std::uint32_t>(e.src.flat()));

  std::vector<std::int32_t> external_of(n_ports, -1);
  for (std::size_t i = 0; i < g.external_inputs.size(); ++i) {
    const auto flat = static_cast<std::uint32_t>(g.external_inputs[i].flat());
    external_ports_.push_back(flat);
    if (external_of[flat] < 0) external_of[flat] = static_cast<std::int32_t>(i);
  }

  // Identical fan-in source lists (every receiver of a fully connected
  // boundary) share one summation per stage.
  std::map<std::vector<std::uint32_t>, std::int32_t> group_ids;
  group_offsets_.push_back(0);
  for (std::size_t n = 0; n < neuron_count_; ++n) {
    for (std::size_t e = 0; e < kElements; ++e) {
      if (g.neurons[n].roles[e] != PortRole::input) continue;
      const auto flat = static_cast<std::uint32_t>(n * kElements + e);
      InputPort port{flat, -1, external_of[flat]};
      auto& src = sources[flat];
      if (!src.empty()) {
        std::sort(src.begin(), src.end());
        auto [it, inserted] = group_ids.try_emplace(src, static_cast<std::int32_t>(group_ids.size()));
        if (inserted) {
          group_sources_.insert(group_sources_.end(), src.begin(), src.end());
          group_offsets_.push_back(static_cast<std::uint32_t>(group_sources_.size()));
        }
        port.group = it->second;
      }
      inputs_.push_back(port);
    }
  }
}

PassResult Simulator::run(std::span<const Neuron> neurons, std::span<const double> external,
                          const SimConfig& cfg, const TraceSink& sink) const {
  if (neurons.size() != neuron_count_)
    throw TopologyError("neuron count does not match the compiled graph");
  if (external.size() != external_ports_.size())
    throw DomainError("expected " + std::to_string(external_ports_.size()) +
                      " external signals, got " + std::to_string(external.size()));
  for (double x : external)
    if (!std::isfinite(x)) throw NumericDomainError("non-finite external signal");

  const std::size_t steps = cfg.steps();
  const double h = cfg.step;
  const std::size_t n_ports = neuron_count_ * kElements;
  const bool forward = dynamics_ == Dynamics::forward;

  std::vector<double> rest(n_ports), k1(n_ports), k2(n_ports), k3(n_ports), state(n_ports);
  for (std::size_t n = 0; n < neuron_count_; ++n) {
    const Neuron& nr = neurons[n];
    const ElementVector& b0 = forward ? nr.fixed_point : nr.inverse_fixed_point;
    for (std::size_t e = 0; e < kElements; ++e) {
      const std::size_t i = n * kElements + e;
      rest[i] = b0[e];
      k1[i] = nr.params.k1[e];
      k2[i] = nr.params.k2[e];
      k3[i] = nr.params.k3[e];
    }
  }
  state = rest;

  std::vector<double> dev(n_ports), drive(n_ports, 0.0);
  std::vector<double> group_sum(group_offsets_.size() - 1);
  const bool mean = cfg.fan_in == FanIn::mean;
  std::vector<double> group_scale(group_sum.size());
  for (std::size_t gi = 0; gi < group_scale.size(); ++gi)
    group_scale[gi] = 1.0 / static_cast<double>(group_offsets_[gi + 1] - group_offsets_[gi]);
  PassResult result;
  result.max_drive.assign(neuron_count_, 0.0);

  auto deriv = [&](std::span<const double> y, std::span<double> dy) {
    for (std::size_t i = 0; i < n_ports; ++i) dev[i] = y[i] - rest[i];
    for (std::size_t gi = 0; gi + 1 < group_offsets_.size(); ++gi) {
      double s = 0.0;
      for (std::uint32_t k = group_offsets_[gi]; k < group_offsets_[gi + 1]; ++k)
        s += dev[group_sources_[k]];
      group_sum[gi] = mean ? s * group_scale[gi] : s;
    }
    for (const InputPort& p : inputs_) {
      double d = 0.0;
      if (p.external >= 0) d += external[static_cast<std::size_t>(p.external)];
      if (p.group >= 0) d += group_sum[static_cast<std::size_t>(p.group)];
      drive[p.flat] = d;
      double& m = result.max_drive[p.flat / kElements];
      m = std::max(m, std::abs(d));
    }
    for (std::size_t n = 0; n < neuron_count_; ++n) {
      const std::size_t b = n * kElements;
      const double* e = &y[b];
      for (std::size_t i = 0; i < kElements; ++i) {
        const std::size_t j = b + i;
        if (forward) {
          dy[j] = k1[j] * e[kPrev[i]] - k2[j] * e[i] - k3[j] * e[i] * e[kPrev2[i]] + drive[j];
        } else {
          dy[j] = k1[b + kNext[i]] * e[kNext[i]] - k2[j] * e[i] -
                  k3[b + kNext2[i]] * e[i] * e[kNext2[i]] + drive[j];
        }
      }
    }
  };

  std::vector<double> integral(n_ports, 0.0);
  std::vector<double> prev_dev(n_ports, 0.0);
  Rk4Workspace ws(n_ports);
  if (sink) sink(0.0, state, prev_dev);

  for (std::size_t s = 0; s < steps; ++s) {
    ws.step(deriv, state, h);
    for (std::size_t i = 0; i < n_ports; ++i) {
      if (!std::isfinite(state[i]))
        throw DivergenceError(i / kElements, static_cast<double>(s + 1) * h);
      const double d = state[i] - rest[i];
      integral[i] += 0.5 * h * (prev_dev[i] + d);
      prev_dev[i] = d;
    }
    if (sink) sink(static_cast<double>(s + 1) * h, state, prev_dev);
  }

  result.integrals.per_neuron.resize(neuron_count_);
  result.final_state.resize(neuron_count_);
  for (std::size_t n = 0; n < neuron_count_; ++n)
    for (std::size_t e = 0; e < kElements; ++e) {
      result.integrals.per_neuron[n][e] = integral[n * kElements + e];
      result.final_state[n][e] = state[n * kElements + e];
    }
  return result;
}

Engine::Engine(const NetworkGraph& g) : forward_(g), backward_(reverse(g)) {
  if (g.orientation != Orientation::forward)
    throw TopologyError("Engine expects a forward-oriented graph");
}

PassResult Engine::forward(const NetworkGraph& g, std::span<const double> x, const SimConfig& cfg,
                           const TraceSink& sink) const {
  return forward_.run(g.neurons, x, cfg, sink);
}

PassResult Engine::backward(const NetworkGraph& g, std::span<const double> error,
                            const SimConfig& cfg, const TraceSink& sink) const {
  return backward_.run(g.neurons, error, cfg, sink);
}

PassResult forward_pass(const NetworkGraph& g, std::span<const double> x, const SimConfig& cfg) {
  return Simulator(g).run(g.neurons, x, cfg);
}

PassResult backward_pass(const NetworkGraph& g, std::span<const double> error, const SimConfig& cfg) {
  const NetworkGraph r = reverse(g);
  return Simulator(r).run(r.neurons, error, cfg);
}

std::vector<double> compute_leb(const TraceIntegrals& forward, const NetworkGraph& g,
                                const SimConfig& cfg) {
  std::vector<double> leb;
  leb.reserve(g.external_outputs.size());
  for (const Port& p : g.external_outputs) leb.push_back(forward.at(p) / cfg.horizon);
  return leb;
}

std::size_t classify(std::span<const double> leb) {
  if (leb.empty()) throw DomainError("cannot classify an empty Leb vector");
  std::size_t best = 0;
  for (std::size_t i = 1; i < leb.size(); ++i)
    if (leb[i] > leb[best]) best = i;
  return best;
}

}  // namespace wuxing
