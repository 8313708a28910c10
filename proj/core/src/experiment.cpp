#include "wuxing/experiment.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <ostream>
#include <sstream>
#include <utility>

#include "wuxing/checkpoint.hpp"
#include "wuxing/errors.hpp"
#include "wuxing/mnist.hpp"
#include "wuxing/rng.hpp"

namespace wuxing {
namespace {

using nlohmann::json;

constexpr std::array<std::pair<Case, std::string_view>, 9> kCaseNames{{
    {Case::case1_K3_only, "case1_K3_only"},
    {Case::case2_K1K3_same_rule, "case2_K1K3_same_rule"},
    {Case::pid_I, "pid_I"},
    {Case::pid_D, "pid_D"},
    {Case::pid_P, "pid_P"},
    {Case::pid_IP, "pid_IP"},
    {Case::pid_ID, "pid_ID"},
    {Case::pid_PD, "pid_PD"},
    {Case::pid_IPD, "pid_IPD"},
}};

// Distinct stream for epoch ordering so it never aliases the wiring draws.
constexpr std::uint64_t kOrderStream = 0x9e3779b97f4a7c15ULL;

void reject_unknown(const json& obj, std::string_view where,
                    std::initializer_list<std::string_view> allowed) {
  if (!obj.is_object()) throw ConfigError(std::string(where) + " must be an object");
  for (const auto& [key, _] : obj.items())
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      throw ConfigError("unknown key '" + key + "' in " + std::string(where));
}

template <typename T>
void read(const json& obj, const char* key, T& out) {
  if (auto it = obj.find(key); it != obj.end()) out = it->get<T>();
}

json strategies_json(const Strategies& s) {
  return {{"integral_k1", s.integral_k1},
          {"differential_k2", s.differential_k2},
          {"proportional_k3", s.proportional_k3},
          {"proportional_k1", s.proportional_k1}};
}

std::string_view fan_in_name(FanIn f) { return f == FanIn::sum ? "sum" : "mean"; }

FanIn parse_fan_in(const std::string& s) {
  if (s == "sum") return FanIn::sum;
  if (s == "mean") return FanIn::mean;
  throw ConfigError("unknown fan_in '" + s + "' (expected sum or mean)");
}

std::string_view inputnode_name(InputNodeRule r) {
  return r == InputNodeRule::driven ? "driven" : "first_layer";
}

InputNodeRule parse_inputnode(const std::string& s) {
  if (s == "driven") return InputNodeRule::driven;
  if (s == "first_layer") return InputNodeRule::first_layer;
  throw ConfigError("unknown inputnode rule '" + s + "' (expected driven or first_layer)");
}

void write_text(const std::filesystem::path& path, std::string_view text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("cannot write " + path.string());
  os << text;
}

}  // namespace

std::string_view to_string(Case c) noexcept {
  for (const auto& [id, name] : kCaseNames)
    if (id == c) return name;
  return "?";
}

Case parse_case(std::string_view s) {
  for (const auto& [id, name] : kCaseNames)
    if (name == s) return id;
  std::string known;
  for (const auto& [id, name] : kCaseNames) known += (known.empty() ? "" : ", ") + std::string(name);
  throw ConfigError("unknown case '" + std::string(s) + "' (expected one of " + known + ")");
}

Strategies strategies_for(Case c) noexcept {
  Strategies s;
  s.proportional_k3 = false;
  switch (c) {
    case Case::case1_K3_only:
    case Case::pid_P: s.proportional_k3 = true; break;
    case Case::case2_K1K3_same_rule:
      s.proportional_k3 = true;
      s.proportional_k1 = true;
      break;
    case Case::pid_I: s.integral_k1 = true; break;
    case Case::pid_D: s.differential_k2 = true; break;
    case Case::pid_IP:
      s.integral_k1 = true;
      s.proportional_k3 = true;
      break;
    case Case::pid_ID:
      s.integral_k1 = true;
      s.differential_k2 = true;
      break;
    case Case::pid_PD:
      s.differential_k2 = true;
      s.proportional_k3 = true;
      break;
    case Case::pid_IPD:
      s.integral_k1 = true;
      s.differential_k2 = true;
      s.proportional_k3 = true;
      break;
  }
  return s;
}

ExperimentSpec ExperimentSpec::for_case(Case c) {
  ExperimentSpec spec;
  spec.case_id = c;
  spec.training.strategies = strategies_for(c);
  return spec;
}

void ExperimentSpec::validate() const {
  if (layer_sizes.size() < 2) throw ConfigError("layer_sizes needs at least two layers");
  for (std::size_t n : layer_sizes)
    if (n == 0) throw ConfigError("layer_sizes entries must be positive");
  if (!(training.strategies == strategies_for(case_id)))
    throw ConfigError("strategies do not match case " + std::string(to_string(case_id)));
  try {
    wuxing::validate(initial, training.clamp);
  } catch (const NumericDomainError& e) {
    throw ConfigError(std::string("initial parameters: ") + e.what());
  }
  for (std::size_t i = 0; i < kElements; ++i)
    if (!(initial.k1[i] > initial.k2[i]))
      throw ConfigError("initial parameters need k1 > k2 for a positive rest state");
  sim.steps();
  training.validate();
  if (data.downsample == 0) throw ConfigError("data.downsample must be positive");
  if (!(data.input_scale > 0.0)) throw ConfigError("data.input_scale must be positive");
}

std::string to_json(const ExperimentSpec& spec) {
  json j;
  j["layer_sizes"] = spec.layer_sizes;
  j["wiring"] = std::string(to_string(spec.wiring));
  j["assign_all_ports"] = spec.assign_all_ports;
  j["seed"] = spec.seed;
  j["case"] = std::string(to_string(spec.case_id));
  j["shuffle_each_epoch"] = spec.shuffle_each_epoch;
  j["record_wall_time"] = spec.record_wall_time;
  j["initial_params"] = {
      {"k1", spec.initial.k1[0]}, {"k2", spec.initial.k2[0]}, {"k3", spec.initial.k3[0]}};
  j["sim"] = {{"horizon", spec.sim.horizon},
              {"step", spec.sim.step},
              {"fan_in", std::string(fan_in_name(spec.sim.fan_in))}};
  const TrainingConfig& t = spec.training;
  j["training"] = {{"target1", t.target1},
                   {"target2", t.target2},
                   {"kt", t.kt},
                   {"signal_gate_eps", t.signal_gate_eps},
                   {"epochs", t.epochs},
                   {"k_min", t.clamp.k_min},
                   {"k_max", t.clamp.k_max},
                   {"inputnode", std::string(inputnode_name(t.inputnode))},
                   {"fixed_point_tol", t.fixed_point.tol},
                   {"fixed_point_max_iter", t.fixed_point.max_iter},
                   {"strategies", strategies_json(t.strategies)}};
  json data = {{"images", spec.data.images},
               {"labels", spec.data.labels},
               {"downsample", spec.data.downsample},
               {"input_scale", spec.data.input_scale},
               {"n_train", spec.data.n_train},
               {"n_test", spec.data.n_test}};
  data["split_seed"] = spec.data.split_seed ? json(*spec.data.split_seed) : json(nullptr);
  j["data"] = std::move(data);
  return j.dump(2) + "\n";
}

ExperimentSpec parse_experiment(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  ExperimentSpec spec;
  try {
    reject_unknown(j, "config",
                   {"layer_sizes", "wiring", "assign_all_ports", "seed", "case",
                    "shuffle_each_epoch", "record_wall_time", "initial_params", "sim", "training",
                    "data"});
    read(j, "layer_sizes", spec.layer_sizes);
    if (auto it = j.find("wiring"); it != j.end()) spec.wiring = parse_wiring(it->get<std::string>());
    read(j, "assign_all_ports", spec.assign_all_ports);
    read(j, "seed", spec.seed);
    if (auto it = j.find("case"); it != j.end()) spec.case_id = parse_case(it->get<std::string>());
    spec.training.strategies = strategies_for(spec.case_id);
    read(j, "shuffle_each_epoch", spec.shuffle_each_epoch);
    read(j, "record_wall_time", spec.record_wall_time);

    if (auto it = j.find("initial_params"); it != j.end()) {
      reject_unknown(*it, "initial_params", {"k1", "k2", "k3"});
      double k1 = spec.initial.k1[0], k2 = spec.initial.k2[0], k3 = spec.initial.k3[0];
      read(*it, "k1", k1);
      read(*it, "k2", k2);
      read(*it, "k3", k3);
      spec.initial = NeuronParams::uniform(k1, k2, k3);
    }
    if (auto it = j.find("sim"); it != j.end()) {
      reject_unknown(*it, "sim", {"horizon", "step", "fan_in"});
      read(*it, "horizon", spec.sim.horizon);
      read(*it, "step", spec.sim.step);
      if (auto f = it->find("fan_in"); f != it->end()) spec.sim.fan_in = parse_fan_in(f->get<std::string>());
    }
    if (auto it = j.find("training"); it != j.end()) {
      reject_unknown(*it, "training",
                     {"target1", "target2", "kt", "signal_gate_eps", "epochs", "k_min", "k_max",
                      "inputnode", "fixed_point_tol", "fixed_point_max_iter", "strategies"});
      TrainingConfig& t = spec.training;
      read(*it, "target1", t.target1);
      read(*it, "target2", t.target2);
      read(*it, "kt", t.kt);
      read(*it, "signal_gate_eps", t.signal_gate_eps);
      read(*it, "epochs", t.epochs);
      read(*it, "k_min", t.clamp.k_min);
      read(*it, "k_max", t.clamp.k_max);
      if (auto r = it->find("inputnode"); r != it->end()) t.inputnode = parse_inputnode(r->get<std::string>());
      read(*it, "fixed_point_tol", t.fixed_point.tol);
      read(*it, "fixed_point_max_iter", t.fixed_point.max_iter);
      // The echo carries the derived strategy set; it must agree with the case.
      if (auto s = it->find("strategies"); s != it->end() && *s != strategies_json(t.strategies))
        throw ConfigError("training.strategies is derived from 'case' and must not be edited");
    }
    if (auto it = j.find("data"); it != j.end()) {
      reject_unknown(*it, "data",
                     {"images", "labels", "downsample", "input_scale", "n_train", "n_test",
                      "split_seed"});
      read(*it, "images", spec.data.images);
      read(*it, "labels", spec.data.labels);
      read(*it, "downsample", spec.data.downsample);
      read(*it, "input_scale", spec.data.input_scale);
      read(*it, "n_train", spec.data.n_train);
      read(*it, "n_test", spec.data.n_test);
      if (auto s = it->find("split_seed"); s != it->end() && !s->is_null())
        spec.data.split_seed = s->get<std::uint64_t>();
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config has a field of the wrong type: ") + e.what());
  }
  spec.validate();
  return spec;
}

ExperimentSpec load_experiment(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot read config " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return parse_experiment(ss.str());
}

std::string format_metrics_row(const MetricsRow& r) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%zu,%.6f,%.6f,%.9g,%zu,%zu,%.3f", r.epoch, r.train_acc, r.test_acc,
                r.mean_abs_error, r.updated_neurons, r.clamp_events, r.wall_time);
  return buf;
}

Dataset load_dataset(const ExperimentSpec& spec) {
  if (spec.data.images.empty() || spec.data.labels.empty())
    throw ConfigError("data.images and data.labels must name IDX files");
  ImageSet images = load_idx_images(spec.data.images);
  const LabelSet labels = load_idx_labels(spec.data.labels);
  if (spec.data.downsample > 1) images = downsample(images, spec.data.downsample);
  if (spec.data.n_train + spec.data.n_test > images.count)
    throw ConfigError("split of " + std::to_string(spec.data.n_train + spec.data.n_test) +
                      " samples exceeds the " + std::to_string(images.count) + " available");
  auto [train, test] = make_split(images, labels, spec.data.n_train, spec.data.n_test,
                                  spec.data.split_seed.value_or(spec.seed));
  if (spec.data.input_scale != 1.0)
    for (auto* set : {&train, &test})
      for (Sample& s : *set)
        for (double& v : s.features) v *= spec.data.input_scale;
  Dataset d;
  d.features = images.rows * images.cols;
  d.train = std::move(train);
  d.test = std::move(test);
  return d;
}

TrainReport train_experiment(const ExperimentSpec& spec, const Dataset& data, std::ostream* csv) {
  spec.validate();
  if (spec.layer_sizes.front() != data.features)
    throw ConfigError("first layer has " + std::to_string(spec.layer_sizes.front()) +
                      " neurons but samples carry " + std::to_string(data.features) + " features");
  for (const auto* set : {&data.train, &data.test})
    for (const Sample& s : *set)
      if (s.label >= spec.layer_sizes.back())
        throw ConfigError("label " + std::to_string(s.label) + " has no output neuron");

  BuildOptions bo;
  bo.assign_all_ports = spec.assign_all_ports;
  bo.initial = spec.initial;
  bo.fixed_point = spec.training.fixed_point;
  TrainReport report;
  report.graph = build_network(spec.layer_sizes, spec.wiring, spec.seed, bo);
  Trainer trainer(report.graph, spec.training, spec.sim);
  Rng order_rng(spec.seed ^ kOrderStream);

  const auto t0 = std::chrono::steady_clock::now();
  const auto elapsed = [&] {
    if (!spec.record_wall_time) return 0.0;
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  };
  const auto emit = [&](const MetricsRow& row) {
    report.rows.push_back(row);
    if (csv) *csv << format_metrics_row(row) << '\n' << std::flush;
  };
  if (csv) *csv << kMetricsHeader << '\n';

  MetricsRow row0;
  if (!data.train.empty()) {
    const Evaluation tr = trainer.evaluate(data.train);
    row0.train_acc = tr.accuracy;
    row0.mean_abs_error = tr.mean_abs_error;
  }
  if (!data.test.empty()) row0.test_acc = trainer.evaluate(data.test).accuracy;
  row0.wall_time = elapsed();
  emit(row0);

  std::vector<Sample> order = data.train;
  for (std::size_t epoch = 1; epoch <= spec.training.epochs; ++epoch) {
    if (spec.shuffle_each_epoch) shuffle(std::span<Sample>(order), order_rng);
    const EpochMetrics m = trainer.train_epoch(order);
    if (m.divergence) {
      report.divergence = "epoch " + std::to_string(epoch) + ": " + *m.divergence;
      report.diverged_neuron = m.diverged_neuron;
      break;
    }
    MetricsRow row;
    row.epoch = epoch;
    row.train_acc = m.accuracy;
    row.mean_abs_error = m.mean_abs_error;
    row.updated_neurons = m.updated_neurons;
    row.clamp_events = m.clamp_events;
    if (!data.test.empty()) row.test_acc = trainer.evaluate(data.test).accuracy;
    row.wall_time = elapsed();
    emit(row);
  }
  report.rng_state = save_state(order_rng);
  return report;
}

TrainReport run_train(const ExperimentSpec& spec, const std::filesystem::path& out_dir) {
  spec.validate();
  std::filesystem::create_directories(out_dir);
  write_text(out_dir / "config.json", to_json(spec));
  const Dataset data = load_dataset(spec);

  std::ofstream csv(out_dir / "metrics.csv", std::ios::binary);
  if (!csv) throw ConfigError("cannot write " + (out_dir / "metrics.csv").string());
  TrainReport report = train_experiment(spec, data, &csv);
  if (!report.divergence) {
    Checkpoint c;
    c.experiment = spec;
    c.graph = report.graph;
    c.rng_state = report.rng_state;
    c.epochs_completed = report.rows.size() - 1;
    save_checkpoint(c, out_dir / "checkpoint.json");
  }
  return report;
}

}  // namespace wuxing
