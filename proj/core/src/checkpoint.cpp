#include "wuxing/checkpoint.hpp"

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "wuxing/errors.hpp"

namespace wuxing {
namespace {

using nlohmann::json;

constexpr const char* kFormat = "wuxing-checkpoint";
constexpr int kVersion = 1;

json vec_json(const ElementVector& v) { return json(v.v); }

ElementVector vec_from(const json& j) {
  if (!j.is_array() || j.size() != kElements) throw ConfigError("expected 5 element values");
  ElementVector v;
  for (std::size_t i = 0; i < kElements; ++i) v[i] = j[i].get<double>();
  return v;
}

std::string fmt_vec(const ElementVector& v) {
  std::string s;
  char buf[32];
  for (std::size_t i = 0; i < kElements; ++i) {
    std::snprintf(buf, sizeof buf, "%s%.10g", i ? " " : "", v[i]);
    s += buf;
  }
  return s;
}

}  // namespace

std::string serialize_checkpoint(const Checkpoint& c) {
  json j;
  j["format"] = kFormat;
  j["version"] = kVersion;
  j["epochs_completed"] = c.epochs_completed;
  j["experiment"] = json::parse(to_json(c.experiment));
  j["graph"] = json::parse(serialize_graph(c.graph));
  json neurons = json::array();
  for (const Neuron& n : c.graph.neurons)
    neurons.push_back({{"k1", vec_json(n.params.k1)},
                       {"k2", vec_json(n.params.k2)},
                       {"k3", vec_json(n.params.k3)},
                       {"fixed_point", vec_json(n.fixed_point)},
                       {"inverse_fixed_point", vec_json(n.inverse_fixed_point)}});
  j["neurons"] = std::move(neurons);
  j["rng_state"] = c.rng_state;
  return j.dump() + "\n";
}

Checkpoint parse_checkpoint(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("checkpoint is not valid JSON: ") + e.what());
  }
  Checkpoint c;
  try {
    if (j.at("format").get<std::string>() != kFormat) throw ConfigError("not a wuxing checkpoint");
    if (j.at("version").get<int>() != kVersion)
      throw ConfigError("unsupported checkpoint version " + j.at("version").dump());
    c.epochs_completed = j.at("epochs_completed").get<std::size_t>();
    c.experiment = parse_experiment(j.at("experiment").dump());
    BuildOptions bo;
    bo.initial = c.experiment.initial;
    bo.fixed_point = c.experiment.training.fixed_point;
    c.graph = parse_graph(j.at("graph").dump(), bo);
    const json& neurons = j.at("neurons");
    if (!neurons.is_array() || neurons.size() != c.graph.neuron_count())
      throw ConfigError("checkpoint lists " + std::to_string(neurons.size()) +
                        " neurons but its graph has " + std::to_string(c.graph.neuron_count()));
    for (std::size_t i = 0; i < neurons.size(); ++i) {
      const json& n = neurons[i];
      Neuron& dst = c.graph.neurons[i];
      dst.params = {vec_from(n.at("k1")), vec_from(n.at("k2")), vec_from(n.at("k3"))};
      dst.fixed_point = vec_from(n.at("fixed_point"));
      dst.inverse_fixed_point = vec_from(n.at("inverse_fixed_point"));
      try {
        validate(dst.params, c.experiment.training.clamp);
      } catch (const NumericDomainError& e) {
        throw ConfigError("neuron " + std::to_string(i) + ": " + e.what());
      }
    }
    c.rng_state = j.at("rng_state").get<std::string>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed checkpoint: ") + e.what());
  }
  if (const ValidationReport r = validate(c.graph); !r.ok())
    throw ConfigError("checkpoint graph is invalid: " + r.summary());
  if (c.graph.layer_sizes() != c.experiment.layer_sizes)
    throw ConfigError("checkpoint graph does not match its experiment's layer sizes");
  return c;
}

void save_checkpoint(const Checkpoint& c, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("cannot write " + path.string());
  os << serialize_checkpoint(c);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot read checkpoint " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return parse_checkpoint(ss.str());
}

Evaluation run_eval(const Checkpoint& c, std::span<const Sample> split) {
  if (split.empty()) throw DomainError("cannot evaluate on an empty split");
  for (const Sample& s : split)
    if (s.features.size() != c.graph.external_inputs.size())
      throw ConfigError("sample has " + std::to_string(s.features.size()) +
                        " features but the checkpoint expects " +
                        std::to_string(c.graph.external_inputs.size()));
  return evaluate(c.graph, split, c.experiment.sim, c.experiment.training);
}

std::string format_evaluation(const Evaluation& ev) {
  std::ostringstream os;
  char buf[128];
  std::snprintf(buf, sizeof buf, "accuracy %.6f (%zu/%zu), diverged %zu, mean_abs_error %.9g\n",
                ev.accuracy, ev.correct, ev.samples, ev.diverged, ev.mean_abs_error);
  os << buf << "confusion (rows = label, columns = predicted)\n";
  for (std::size_t l = 0; l < ev.confusion.size(); ++l) {
    os << l << ':';
    for (std::size_t n : ev.confusion[l]) os << ' ' << n;
    os << '\n';
  }
  return os.str();
}

std::vector<FixedPointRow> inspect_fixed_points(std::span<const Neuron> neurons,
                                                const FixedPointOptions& opts) {
  std::vector<FixedPointRow> rows;
  rows.reserve(neurons.size());
  for (std::size_t i = 0; i < neurons.size(); ++i) {
    FixedPointRow r;
    r.neuron = i;
    const NeuronParams& p = neurons[i].params;
    try {
      r.analytic = analytic_fixed_point_guess(p);
      const FixedPoint fp = numeric_fixed_point(p, Dynamics::forward, opts);
      r.numeric = fp.b0;
      r.residual = fp.residual;
      r.spectral_abscissa = fp.spectral_abscissa;
    } catch (const Error& e) {
      r.error = e.what();
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

std::string format_fixed_point_report(std::span<const FixedPointRow> rows) {
  std::ostringstream os;
  os << "neuron\tanalytic\tnumeric\tresidual\tspectral_abscissa\n";
  for (const FixedPointRow& r : rows) {
    os << r.neuron << '\t' << fmt_vec(r.analytic) << '\t';
    if (!r.error.empty()) {
      os << "error: " << r.error << '\n';
      continue;
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "\t%.3e\t%.6g\n", r.residual, r.spectral_abscissa);
    os << fmt_vec(r.numeric) << buf;
  }
  return os.str();
}

}  // namespace wuxing
