// Command-line front end: train, eval, inspect-fixed-point, gen-config.
#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "wuxing/checkpoint.hpp"
#include "wuxing/errors.hpp"
#include "wuxing/experiment.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitDivergence = 3;

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string case_name;
};

wuxing::ExperimentSpec resolve_spec(const Common& c) {
  wuxing::ExperimentSpec spec =
      c.config.empty() ? wuxing::ExperimentSpec{} : wuxing::load_experiment(c.config);
  if (!c.case_name.empty()) spec.case_id = wuxing::parse_case(c.case_name);
  spec.training.strategies = wuxing::strategies_for(spec.case_id);
  if (c.seed) spec.seed = *c.seed;
  spec.validate();
  return spec;
}

int cmd_train(const Common& c) {
  const wuxing::ExperimentSpec spec = resolve_spec(c);
  const std::filesystem::path out = c.out.empty() ? "out" : c.out;
  const wuxing::TrainReport report = wuxing::run_train(spec, out);
  for (const auto& row : report.rows) std::cout << wuxing::format_metrics_row(row) << '\n';
  if (report.divergence) {
    std::cerr << "diverged: " << *report.divergence << '\n';
    return kExitDivergence;
  }
  std::cout << "wrote " << (out / "metrics.csv").string() << ", " << (out / "config.json").string()
            << ", " << (out / "checkpoint.json").string() << '\n';
  return kExitOk;
}

int cmd_eval(const Common& c, const std::string& checkpoint, const std::string& split) {
  wuxing::Checkpoint ckpt = wuxing::load_checkpoint(checkpoint);
  // Dataset location and split may be redirected; the trained network may not.
  if (!c.config.empty()) ckpt.experiment.data = wuxing::load_experiment(c.config).data;
  if (c.seed) ckpt.experiment.data.split_seed = *c.seed;
  const wuxing::Dataset data = wuxing::load_dataset(ckpt.experiment);
  const auto& samples = split == "train" ? data.train : data.test;
  const std::string report = wuxing::format_evaluation(wuxing::run_eval(ckpt, samples));
  std::cout << report;
  if (!c.out.empty()) {
    std::filesystem::create_directories(c.out);
    std::ofstream(std::filesystem::path(c.out) / ("eval_" + split + ".txt")) << report;
  }
  return kExitOk;
}

int cmd_inspect(const Common& c, const std::string& checkpoint, double k1, double k2, double k3) {
  std::vector<wuxing::Neuron> neurons;
  wuxing::FixedPointOptions opts;
  if (!checkpoint.empty()) {
    const wuxing::Checkpoint ckpt = wuxing::load_checkpoint(checkpoint);
    neurons = ckpt.graph.neurons;
    opts = ckpt.experiment.training.fixed_point;
  } else {
    wuxing::Neuron n;
    n.params = wuxing::NeuronParams::uniform(k1, k2, k3);
    neurons.push_back(n);
  }
  const auto rows = wuxing::inspect_fixed_points(neurons, opts);
  const std::string report = wuxing::format_fixed_point_report(rows);
  std::cout << report;
  if (!c.out.empty()) std::ofstream(c.out) << report;
  for (const auto& r : rows)
    if (!r.error.empty()) return kExitDivergence;
  return kExitOk;
}

int cmd_gen_config(const Common& c) {
  Common defaults = c;
  defaults.config.clear();
  const std::string text = wuxing::to_json(resolve_spec(defaults));
  if (c.out.empty()) {
    std::cout << text;
  } else {
    std::ofstream os(c.out, std::ios::binary);
    if (!os) throw wuxing::ConfigError("cannot write " + c.out);
    os << text;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Five-element ODE network: training and inspection harness"};
  app.require_subcommand(1);
  Common common;

  const auto add_common = [&](CLI::App* sub, bool with_config, bool with_case) {
    if (with_config) sub->add_option("--config", common.config, "Experiment config (JSON)");
    sub->add_option("--seed", common.seed, "Override the experiment seed");
    sub->add_option("--out", common.out, "Output location");
    if (with_case) sub->add_option("--case", common.case_name, "Experiment case");
  };

  CLI::App* train = app.add_subcommand("train", "Train and write metrics.csv, config.json, checkpoint.json");
  add_common(train, true, true);

  std::string checkpoint, split = "test";
  CLI::App* eval = app.add_subcommand("eval", "Accuracy and confusion counts of a checkpoint");
  add_common(eval, true, false);
  eval->add_option("--checkpoint", checkpoint, "Checkpoint file")->required();
  eval->add_option("--split", split, "Which split to score")->check(CLI::IsMember({"train", "test"}));

  double k1 = 1.0, k2 = 0.5, k3 = 0.5;
  CLI::App* inspect =
      app.add_subcommand("inspect-fixed-point", "Analytic and numeric rest states");
  add_common(inspect, false, false);
  inspect->add_option("--checkpoint", checkpoint, "Inspect every neuron of a checkpoint");
  inspect->add_option("--k1", k1, "Uniform k1")->capture_default_str();
  inspect->add_option("--k2", k2, "Uniform k2")->capture_default_str();
  inspect->add_option("--k3", k3, "Uniform k3")->capture_default_str();

  CLI::App* gen = app.add_subcommand("gen-config", "Print or write a default config");
  add_common(gen, false, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (train->parsed()) return cmd_train(common);
    if (eval->parsed()) return cmd_eval(common, checkpoint, split);
    if (inspect->parsed()) return cmd_inspect(common, checkpoint, k1, k2, k3);
    if (gen->parsed()) return cmd_gen_config(common);
  } catch (const wuxing::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const wuxing::FormatError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const wuxing::DomainError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const wuxing::TopologyError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const wuxing::DivergenceError& e) {
    std::cerr << "diverged: " << e.what() << '\n';
    return kExitDivergence;
  } catch (const wuxing::FixedPointDivergenceError& e) {
    std::cerr << "diverged: " << e.what() << '\n';
    return kExitDivergence;
  } catch (const wuxing::NumericDomainError& e) {
    std::cerr << "diverged: " << e.what() << '\n';
    return kExitDivergence;
  }
  return kExitConfig;
}
