#include "wuxing/trainer.hpp"

#include <algorithm>
#include <cmath>

#include "wuxing/errors.hpp"

namespace wuxing {
namespace {

double clamp_entry(double k, const ClampBounds& b, std::size_t& events) {
  if (k < b.k_min) {
    ++events;
    return b.k_min;
  }
  if (k > b.k_max) {
    ++events;
    return b.k_max;
  }
  return k;
}

double mean_abs(std::span<const double> v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += std::abs(x);
  return s / static_cast<double>(v.size());
}

}  // namespace

void TrainingConfig::validate() const {
  if (!(target1 > target2)) throw ConfigError("target1 must exceed target2");
  if (!(kt > 0.0)) throw ConfigError("kt must be positive");
  if (!(signal_gate_eps >= 0.0)) throw ConfigError("signal_gate_eps must be non-negative");
  if (!(clamp.k_min > 0.0) || !(clamp.k_max > clamp.k_min))
    throw ConfigError("clamp bounds must satisfy 0 < k_min < k_max");
  if (!(fixed_point.tol > 0.0)) throw ConfigError("fixed-point tolerance must be positive");
}

std::vector<double> output_error(std::span<const double> leb, std::size_t label,
                                 const TrainingConfig& cfg) {
  if (label >= leb.size())
    throw DomainError("label " + std::to_string(label) + " outside " + std::to_string(leb.size()) +
                      " classes");
  std::vector<double> err(leb.size(), 0.0);
  for (std::size_t c = 0; c < leb.size(); ++c) {
    if (c == label)
      err[c] = leb[c] < cfg.target1 ? cfg.target1 - leb[c] : 0.0;
    else
      err[c] = leb[c] > cfg.target2 ? cfg.target2 - leb[c] : 0.0;
  }
  return err;
}

ElementVector correlation_proportional(const ElementVector& fwd, const ElementVector& bwd) {
  ElementVector g;
  for (std::size_t i = 0; i < kElements; ++i) g[i] = fwd[i] * bwd[i];
  return g;
}

double correlation_integral(const ElementVector& fwd, const ElementVector& bwd) {
  return fwd.sum() * bwd.sum();
}

ElementVector correlation_differential(const ElementVector& fwd, const ElementVector& bwd,
                                       bool is_forward_input_node) {
  if (!is_forward_input_node) return {};
  return correlation_proportional(fwd, bwd);
}

double squash(double g1, double kt) { return std::atan(g1 * kt) / kt; }

ElementVector squash(const ElementVector& g1, double kt) {
  ElementVector g2;
  for (std::size_t i = 0; i < kElements; ++i) g2[i] = squash(g1[i], kt);
  return g2;
}

UpdateResult apply_updates(const NeuronParams& p, const UpdateDrive& drive, bool gate,
                           const Strategies& strategies, const ClampBounds& bounds) {
  UpdateResult r{p, 0, false};
  if (!gate) return r;
  for (std::size_t i = 0; i < kElements; ++i) {
    if (strategies.integral_k1) r.params.k1[i] *= std::exp(drive.k1);
    if (strategies.proportional_k1) r.params.k1[i] *= std::exp(drive.k1_per_element[i]);
    if (strategies.differential_k2) r.params.k2[i] *= std::exp(-drive.k2[i]);
    if (strategies.proportional_k3) r.params.k3[i] *= std::exp(-drive.k3[i]);
    r.params.k1[i] = clamp_entry(r.params.k1[i], bounds, r.clamp_events);
    r.params.k2[i] = clamp_entry(r.params.k2[i], bounds, r.clamp_events);
    r.params.k3[i] = clamp_entry(r.params.k3[i], bounds, r.clamp_events);
  }
  r.changed = !(r.params == p);
  return r;
}

LocalUpdateStats apply_local_updates(NetworkGraph& g, const PassResult& fwd, const PassResult& bwd,
                                     const TrainingConfig& cfg) {
  LocalUpdateStats stats;
  const auto& first_layer = g.layers.front();
  std::vector<bool> in_first(g.neuron_count(), false);
  for (NeuronId n : first_layer) in_first[n] = true;

  for (NeuronId n = 0; n < g.neuron_count(); ++n) {
    const ElementVector& f = fwd.integrals[n];
    const ElementVector& b = bwd.integrals[n];
    const bool gate = f.max_abs() > cfg.signal_gate_eps && b.max_abs() > cfg.signal_gate_eps;
    if (!gate) continue;
    ++stats.gated;

    bool input_node = fwd.max_drive[n] > cfg.signal_gate_eps;
    if (cfg.inputnode == InputNodeRule::first_layer) input_node = input_node && in_first[n];

    const ElementVector prop = correlation_proportional(f, b);
    UpdateDrive drive;
    drive.k1 = squash(correlation_integral(f, b), cfg.kt);
    drive.k1_per_element = squash(prop, cfg.kt);
    drive.k2 = squash(correlation_differential(f, b, input_node), cfg.kt);
    drive.k3 = squash(prop, cfg.kt);

    Neuron& neuron = g.neurons[n];
    const UpdateResult r = apply_updates(neuron.params, drive, gate, cfg.strategies, cfg.clamp);
    stats.clamp_events += r.clamp_events;
    if (!r.changed) continue;

    Neuron candidate = neuron;
    candidate.params = r.params;
    try {
      refresh_fixed_points(candidate, cfg.fixed_point);
    } catch (const FixedPointDivergenceError&) {
      ++stats.fixed_point_failures;
      continue;
    }
    neuron = candidate;
    stats.updated.push_back(n);
  }
  return stats;
}

Trainer::Trainer(NetworkGraph& graph, TrainingConfig cfg, SimConfig sim)
    : graph_(graph), cfg_(cfg), sim_(sim), engine_(graph) {
  cfg_.validate();
  sim_.steps();
}

SampleOutcome Trainer::train_sample(const Sample& s) {
  const PassResult fwd = engine_.forward(graph_, s.features, sim_);
  const auto leb = compute_leb(fwd.integrals, graph_, sim_);
  SampleOutcome out;
  out.predicted = classify(leb);
  out.correct = out.predicted == s.label;
  const auto err = output_error(leb, s.label, cfg_);
  out.mean_abs_error = mean_abs(err);
  if (!cfg_.strategies.any() || out.mean_abs_error == 0.0) return out;

  const PassResult bwd = engine_.backward(graph_, err, sim_);
  out.updates = apply_local_updates(graph_, fwd, bwd, cfg_);
  return out;
}

EpochMetrics Trainer::train_epoch(std::span<const Sample> data) {
  EpochMetrics m;
  std::size_t correct = 0;
  double err_sum = 0.0;
  for (const Sample& s : data) {
    SampleOutcome o;
    try {
      o = train_sample(s);
    } catch (const DivergenceError& e) {
      m.divergence = e.what();
      m.diverged_neuron = e.neuron();
      break;
    }
    ++m.samples;
    correct += o.correct;
    err_sum += o.mean_abs_error;
    m.updated_neurons += o.updates.updated.size();
    m.clamp_events += o.updates.clamp_events;
    m.fixed_point_failures += o.updates.fixed_point_failures;
  }
  if (m.samples) {
    m.accuracy = static_cast<double>(correct) / static_cast<double>(m.samples);
    m.mean_abs_error = err_sum / static_cast<double>(m.samples);
  }
  return m;
}

Evaluation Trainer::evaluate(std::span<const Sample> data) const {
  return wuxing::evaluate(graph_, data, sim_, cfg_);
}

Evaluation evaluate(const NetworkGraph& g, std::span<const Sample> data, const SimConfig& sim,
                    const TrainingConfig& cfg) {
  if (data.empty()) throw DomainError("cannot evaluate on an empty split");
  const Simulator forward(g);
  const std::size_t classes = g.external_outputs.size();
  Evaluation ev;
  ev.confusion.assign(classes, std::vector<std::size_t>(classes, 0));
  double err_sum = 0.0;
  for (const Sample& s : data) {
    if (s.label >= classes) throw DomainError("label outside the network's classes");
    ++ev.samples;
    PassResult fwd;
    try {
      fwd = forward.run(g.neurons, s.features, sim);
    } catch (const DivergenceError&) {
      ++ev.diverged;
      continue;
    }
    const auto leb = compute_leb(fwd.integrals, g, sim);
    const std::size_t pred = classify(leb);
    ++ev.confusion[s.label][pred];
    ev.correct += pred == s.label;
    err_sum += mean_abs(output_error(leb, s.label, cfg));
  }
  ev.accuracy = static_cast<double>(ev.correct) / static_cast<double>(ev.samples);
  if (ev.samples > ev.diverged)
    ev.mean_abs_error = err_sum / static_cast<double>(ev.samples - ev.diverged);
  return ev;
}

}  // namespace wuxing
