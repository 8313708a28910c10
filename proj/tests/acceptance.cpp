// Acceptance suite: one PASS/FAIL line per criterion.
//
//   wuxing_acceptance            run all nine
//   wuxing_acceptance 1 4 9      run a subset
//
// MNIST files are looked up in $WUXING_MNIST_DIR, falling back to the
// directory configured at build time.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <numbers>
#include <optional>
#include <queue>
#include <set>
#include <string>
#include <vector>

#include "oracles/frozen.hpp"
#include "wuxing/errors.hpp"
#include "wuxing/experiment.hpp"
#include "wuxing/integrator.hpp"
#include "wuxing/mnist.hpp"
#include "wuxing/rng.hpp"
#include "wuxing/trainer.hpp"

using namespace wuxing;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double uniform(Rng& rng, double lo, double hi) { return lo + (hi - lo) * uniform_unit(rng); }

fs::path mnist_dir() {
  if (const char* env = std::getenv("WUXING_MNIST_DIR")) return env;
  return WUXING_MNIST_DIR;
}

// Canonical training files when present, else the bundled 5000-sample subset.
std::optional<std::pair<fs::path, fs::path>> mnist_files() {
  const fs::path d = mnist_dir();
  for (const auto& [img, lab] : {std::pair{"train-images-idx3-ubyte", "train-labels-idx1-ubyte"},
                                 std::pair{"mnist5k-images-idx3-ubyte", "mnist5k-labels-idx1-ubyte"}})
    if (fs::exists(d / img) && fs::exists(d / lab)) return std::pair{d / img, d / lab};
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Desk-scale learning protocol shared by criteria 6, 7 and 8.

// The tuned desk configuration ships as configs/desk.json so the CLI can
// reproduce every learning run; only seed, case and data paths change here.
ExperimentSpec desk_spec(std::uint64_t seed, Case c) {
  ExperimentSpec spec = load_experiment(WUXING_DESK_CONFIG);
  spec.seed = seed;
  spec.case_id = c;
  spec.training.strategies = strategies_for(c);
  if (const auto files = mnist_files()) {
    spec.data.images = files->first.string();
    spec.data.labels = files->second.string();
  }
  spec.validate();
  return spec;
}

constexpr std::uint64_t kSeeds[] = {1, 2, 3};

struct LearningRun {
  double untrained_test = 0.0;
  double seconds = 0.0;
  double best_test = 0.0;
  double final_test = 0.0;
  std::string note;
};

std::map<std::pair<std::uint64_t, Case>, LearningRun> g_runs;

const LearningRun& learning_run(std::uint64_t seed, Case c) {
  const auto key = std::pair{seed, c};
  if (auto it = g_runs.find(key); it != g_runs.end()) return it->second;
  const ExperimentSpec spec = desk_spec(seed, c);
  const auto t0 = std::chrono::steady_clock::now();
  const Dataset data = load_dataset(spec);
  const TrainReport r = train_experiment(spec, data, nullptr);
  LearningRun run;
  run.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  run.untrained_test = r.rows.front().test_acc;
  // Accuracy after the last completed epoch; the budget allows stopping at
  // any epoch up to the tenth, so the best epoch is reported alongside.
  run.final_test = r.rows.back().test_acc;
  for (const auto& row : r.rows)
    if (row.epoch > 0) run.best_test = std::max(run.best_test, row.test_acc);
  if (r.divergence) run.note = " diverged: " + *r.divergence;
  std::fprintf(stderr, "  [%s seed %llu] test acc by epoch:", std::string(to_string(c)).c_str(),
               static_cast<unsigned long long>(seed));
  for (const auto& row : r.rows) std::fprintf(stderr, " %.3f", row.test_acc);
  std::fprintf(stderr, "%s\n", run.note.c_str());
  return g_runs.emplace(key, run).first->second;
}

// ---------------------------------------------------------------------------

Outcome criterion1() {
  Rng rng(101);
  double worst_fp = 0.0, worst_drift = 0.0;
  for (int i = 0; i < 100; ++i) {
    const double k2 = uniform(rng, 0.05, 2.0);
    const double k1 = k2 + uniform(rng, 0.1, 2.0);
    const double k3 = uniform(rng, 0.1, 2.0);
    const auto p = NeuronParams::uniform(k1, k2, k3);
    const double expect = (k1 - k2) / k3;
    const FixedPoint fp = numeric_fixed_point(p);
    for (double b : fp.b0.v) worst_fp = std::max(worst_fp, std::abs(b - expect));
    ElementVector e = fp.b0;
    const auto f = [&](const ElementVector& s) { return forward_derivative(s, p, {}); };
    for (int s = 0; s < 1000; ++s) e = integrate_step(f, e, 0.01);
    worst_drift = std::max(worst_drift, (e - fp.b0).max_abs());
  }
  return {worst_fp < 1e-6 && worst_drift < 1e-6,
          fmt("max |B0 - (k1-k2)/k3| = %.2e, max drift over T=10 = %.2e (limit 1e-6)", worst_fp,
              worst_drift)};
}

Outcome criterion2() {
  Rng rng(202);
  double worst_state = 0.0;
  for (int i = 0; i < 100; ++i) {
    // The uniform rest state loses stability once k2 < 0.146 k1 (the first
    // ring mode crosses zero), so "settled" needs k1 below 5 k2.
    const double k2 = uniform(rng, 0.05, 2.0);
    const double k1 = k2 + uniform(rng, 0.05, std::min(2.0, 4.0 * k2));
    const double k3 = uniform(rng, 0.1, 2.0);
    const auto p = NeuronParams::uniform(k1, k2, k3);
    const ElementVector b0 = ElementVector::filled((k1 - k2) / k3);
    const double decay = -spectral_abscissa(b0, p, Dynamics::forward);
    // Settle both systems from the same displaced start.
    ElementVector start;
    for (double& v : start.v) v = (k1 - k2) / k3 * uniform(rng, 0.8, 1.2);
    ElementVector ef = start, ei = start;
    const auto ff = [&](const ElementVector& s) { return forward_derivative(s, p, {}); };
    const auto fi = [&](const ElementVector& s) { return inverse_derivative(s, p, {}); };
    const double h = std::min(0.05, 0.5 / (3.0 * k1));
    const int steps = static_cast<int>(std::ceil(30.0 / (decay * h)));
    for (int s = 0; s < steps; ++s) {
      ef = integrate_step(ff, ef, h);
      ei = integrate_step(fi, ei, h);
    }
    worst_state = std::max(worst_state, (ef - ei).max_abs());
    const FixedPoint a = numeric_fixed_point(p, Dynamics::forward);
    const FixedPoint b = numeric_fixed_point(p, Dynamics::inverse);
    worst_state = std::max(worst_state, (a.b0 - b.b0).max_abs());
  }

  std::size_t mismatches = 0;
  const Wiring wirings[] = {Wiring::outer_full, Wiring::random, Wiring::full};
  for (int i = 0; i < 100; ++i) {
    std::vector<std::size_t> sizes(2 + uniform_index(rng, 4));
    for (auto& s : sizes) s = 1 + uniform_index(rng, 12);
    BuildOptions opts;
    opts.assign_all_ports = uniform_index(rng, 2) == 1;
    const NetworkGraph g = build_network(sizes, wirings[uniform_index(rng, 3)], rng(), opts);
    if (!(reverse(reverse(g)) == g)) ++mismatches;
  }
  return {worst_state < 1e-6 && mismatches == 0,
          fmt("max |forward - inverse settled state| = %.2e (limit 1e-6); reverse(reverse(g)) != g "
              "for %zu of 100 graphs",
              worst_state, mismatches)};
}

Outcome criterion3() {
  Rng rng(303);
  std::size_t failures = 0;
  std::vector<std::pair<double, double>> by_input;
  const double kt_fixed = 2.5;
  for (int i = 0; i < 10000; ++i) {
    const double magnitude = std::pow(10.0, uniform(rng, -8.0, 8.0));
    const double g1 = uniform_index(rng, 2) ? magnitude : -magnitude;
    const double kt = std::pow(10.0, uniform(rng, -1.0, 2.0));
    const double g2 = squash(g1, kt);
    const double bound = std::numbers::pi / (2.0 * kt);
    failures += !(std::abs(g2) <= bound * (1.0 + 1e-15));
    failures += squash(-g1, kt) != -g2;
    by_input.emplace_back(g1, squash(g1, kt_fixed));

    NeuronParams p;
    for (auto* set : {&p.k1, &p.k2, &p.k3})
      for (double& k : set->v) k = std::pow(10.0, uniform(rng, -1.0, 1.0));
    UpdateDrive d;
    d.k1 = g2;
    d.k1_per_element = ElementVector::filled(g2);
    d.k2 = ElementVector::filled(g2);
    d.k3 = ElementVector::filled(g2);
    Strategies all;
    all.integral_k1 = all.differential_k2 = all.proportional_k3 = true;
    Strategies redundant;
    redundant.proportional_k3 = false;
    redundant.proportional_k1 = true;
    const NeuronParams q = apply_updates(p, d, true, all, {}).params;
    const NeuronParams r = apply_updates(p, d, true, redundant, {}).params;
    for (std::size_t e = 0; e < kElements; ++e) {
      const bool up = g2 > 0.0;
      failures += up ? !(q.k1[e] > p.k1[e]) : !(q.k1[e] < p.k1[e]);
      failures += up ? !(r.k1[e] > p.k1[e]) : !(r.k1[e] < p.k1[e]);
      failures += up ? !(q.k2[e] < p.k2[e]) : !(q.k2[e] > p.k2[e]);
      failures += up ? !(q.k3[e] < p.k3[e]) : !(q.k3[e] > p.k3[e]);
    }
    failures += !(apply_updates(p, UpdateDrive{}, true, all, {}).params == p);
    failures += apply_updates(p, UpdateDrive{}, true, all, {}).changed;
  }
  std::sort(by_input.begin(), by_input.end());
  for (std::size_t i = 1; i < by_input.size(); ++i) failures += by_input[i].second < by_input[i - 1].second;
  return {failures == 0, fmt("%zu violations over 10^4 draws (bound, oddness, monotonicity, "
                             "update directions, zero drive no-op)",
                             failures)};
}

// Independent reachability: breadth-first over the edge list.
std::set<NeuronId> reach(const NetworkGraph& g, const std::vector<NeuronId>& seeds, bool downstream) {
  std::map<NeuronId, std::vector<NeuronId>> adj;
  for (const Edge& e : g.edges) {
    if (downstream)
      adj[e.src.neuron].push_back(e.dst.neuron);
    else
      adj[e.dst.neuron].push_back(e.src.neuron);
  }
  std::set<NeuronId> seen(seeds.begin(), seeds.end());
  std::queue<NeuronId> q;
  for (NeuronId s : seeds) q.push(s);
  while (!q.empty()) {
    const NeuronId n = q.front();
    q.pop();
    for (NeuronId m : adj[n])
      if (seen.insert(m).second) q.push(m);
  }
  return seen;
}

Outcome criterion4() {
  Rng rng(404);
  std::size_t mismatched_graphs = 0, trials = 0, nontrivial = 0;
  const Wiring wirings[] = {Wiring::random, Wiring::outer_full, Wiring::full};
  const SimConfig sim{5.0, 0.05};
  TrainingConfig cfg;
  for (int i = 0; i < 30; ++i) {
    const std::vector<std::size_t> sizes{8 + uniform_index(rng, 9), 4 + uniform_index(rng, 7),
                                         3 + uniform_index(rng, 6), 2 + uniform_index(rng, 4)};
    NetworkGraph g = build_network(sizes, wirings[i % 3], rng());

    std::vector<double> x(sizes.front(), 0.0);
    std::vector<NeuronId> driven;
    const std::size_t active = 1 + uniform_index(rng, 2);
    for (std::size_t k = 0; k < active; ++k) {
      const auto j = static_cast<std::size_t>(uniform_index(rng, x.size()));
      x[j] = uniform(rng, 0.2, 1.0);
      driven.push_back(g.external_inputs[j].neuron);
    }
    std::vector<double> err(sizes.back(), 0.0);
    const auto cls = static_cast<std::size_t>(uniform_index(rng, err.size()));
    err[cls] = uniform(rng, 0.2, 1.0);

    const PassResult fwd = forward_pass(g, x, sim);
    const PassResult bwd = backward_pass(g, err, sim);
    const LocalUpdateStats stats = apply_local_updates(g, fwd, bwd, cfg);

    const auto down = reach(g, driven, true);
    const auto up = reach(g, {g.external_outputs[cls].neuron}, false);
    std::set<NeuronId> expect;
    std::set_intersection(down.begin(), down.end(), up.begin(), up.end(),
                          std::inserter(expect, expect.end()));
    const std::set<NeuronId> got(stats.updated.begin(), stats.updated.end());
    ++trials;
    nontrivial += !expect.empty() && expect.size() < g.neuron_count();
    if (got != expect || stats.fixed_point_failures != 0) ++mismatched_graphs;
  }
  return {mismatched_graphs == 0 && nontrivial > 0,
          fmt("updated set != reachability intersection on %zu of %zu graphs (%zu with a proper "
              "nonempty intersection)",
              mismatched_graphs, trials, nontrivial)};
}

Outcome criterion5() {
  const NeuronParams p{ElementVector{oracle::k1}, ElementVector{oracle::k2}, ElementVector{oracle::k3}};
  const ElementVector u{oracle::convergence_input};
  const ElementVector ref{oracle::convergence_state_at_horizon};
  const auto f = [&](const ElementVector& e) { return forward_derivative(e, p, u); };
  std::vector<double> errors;
  for (double h : {0.04, 0.02, 0.01}) {
    ElementVector e{oracle::rest_forward};
    const auto steps = static_cast<int>(std::lround(oracle::convergence_horizon / h));
    for (int s = 0; s < steps; ++s) e = integrate_step(f, e, h);
    errors.push_back((e - ref).max_abs());
  }
  const double r1 = errors[0] / errors[1], r2 = errors[1] / errors[2];
  return {r1 >= 8.0 && r2 >= 8.0,
          fmt("errors at T: %.3e, %.3e, %.3e; ratios %.2f, %.2f (need >= 8)", errors[0], errors[1],
              errors[2], r1, r2)};
}

double median3(double a, double b, double c) { return std::max(std::min(a, b), std::min(std::max(a, b), c)); }

Outcome criterion6() {
  if (!mnist_files()) return {false, "no MNIST IDX files under " + mnist_dir().string()};
  double acc[3], base[3], slowest = 0.0;
  for (int i = 0; i < 3; ++i) {
    const LearningRun& r = learning_run(kSeeds[i], Case::case1_K3_only);
    acc[i] = r.final_test;
    base[i] = r.untrained_test;
    slowest = std::max(slowest, r.seconds);
  }
  const double med = median3(acc[0], acc[1], acc[2]);
  return {med > 0.30, fmt("test accuracy after training, seeds 1-3: %.3f %.3f %.3f; median %.3f "
                          "(need > 0.300); untrained %.3f %.3f %.3f; slowest run %.0f s%s",
                          acc[0], acc[1], acc[2], med, base[0], base[1], base[2], slowest,
                          slowest > 1200 ? " (over the 20 min target)" : " (target 20 min)")};
}

Outcome criterion7() {
  if (!mnist_files()) return {false, "no MNIST IDX files under " + mnist_dir().string()};
  int wins = 0;
  std::string detail;
  for (std::uint64_t seed : kSeeds) {
    const double p = learning_run(seed, Case::case1_K3_only).final_test;
    const double ip = learning_run(seed, Case::pid_IP).final_test;
    wins += ip >= p;
    detail += fmt(" seed %llu: I+P %.3f vs P %.3f;", static_cast<unsigned long long>(seed), ip, p);
  }
  return {wins >= 2, fmt("combined >= proportional-only in %d of 3 seeds (need 2):", wins) + detail};
}

Outcome criterion8() {
  ExperimentSpec spec = desk_spec(8, Case::pid_P);
  spec.data.n_train = 200;
  spec.data.n_test = 0;
  std::vector<Sample> train;
  if (mnist_files()) {
    train = load_dataset(spec).train;
  } else {
    return {false, "no MNIST IDX files under " + mnist_dir().string()};
  }
  std::string detail;
  bool ok = true;
  const std::pair<Case, const char*> cases[] = {
      {Case::pid_I, "integral_K1"}, {Case::pid_D, "differential_K2"}, {Case::pid_P, "proportional_K3"}};
  for (const auto& [c, name] : cases) {
    BuildOptions bo;
    bo.initial = spec.initial;
    NetworkGraph g = build_network(spec.layer_sizes, spec.wiring, spec.seed, bo);
    const NetworkGraph before = g;
    TrainingConfig cfg = spec.training;
    cfg.strategies = strategies_for(c);
    Trainer t(g, cfg, spec.sim);
    const EpochMetrics m = t.train_epoch(train);
    std::size_t changed[3] = {0, 0, 0};
    for (std::size_t n = 0; n < g.neuron_count(); ++n) {
      changed[0] += !(g.neurons[n].params.k1 == before.neurons[n].params.k1);
      changed[1] += !(g.neurons[n].params.k2 == before.neurons[n].params.k2);
      changed[2] += !(g.neurons[n].params.k3 == before.neurons[n].params.k3);
    }
    const int own = c == Case::pid_I ? 0 : c == Case::pid_D ? 1 : 2;
    for (int s = 0; s < 3; ++s) ok &= (s == own) ? changed[s] > 0 : changed[s] == 0;
    ok &= !m.divergence && m.samples == train.size();
    detail += fmt(" %s: K1/K2/K3 changed in %zu/%zu/%zu neurons;", name, changed[0], changed[1], changed[2]);
  }
  return {ok, "over one 200-sample epoch," + detail};
}

Outcome criterion9() {
  Rng rng(909);
  ImageSet img;
  img.count = 7;
  img.rows = 28;
  img.cols = 28;
  for (std::size_t i = 0; i < img.count * 28 * 28; ++i)
    img.pixels.push_back(static_cast<double>(uniform_index(rng, 256)) / 255.0);
  LabelSet lab;
  lab.count = 7;
  for (std::size_t i = 0; i < lab.count; ++i) lab.labels.push_back(static_cast<std::uint8_t>(uniform_index(rng, 10)));
  const auto ib = serialize_idx_images(img);
  const auto lb = serialize_idx_labels(lab);
  bool ok = serialize_idx_images(parse_idx_images(ib)) == ib && serialize_idx_labels(parse_idx_labels(lb)) == lb;
  const bool roundtrip = ok;

  bool rejected = true;
  try {
    parse_idx_images(lb);
    rejected = false;
  } catch (const FormatError&) {
  }
  try {
    parse_idx_labels(ib);
    rejected = false;
  } catch (const FormatError&) {
  }
  ok &= rejected;

  std::string canonical = "canonical files absent in " + mnist_dir().string() + ", dimension check skipped";
  const fs::path d = mnist_dir();
  const std::pair<const char*, std::size_t> sets[] = {{"train", 60000}, {"t10k", 10000}};
  std::vector<std::string> checked;
  for (const auto& [prefix, count] : sets) {
    const fs::path ip = d / (std::string(prefix) + "-images-idx3-ubyte");
    const fs::path lp = d / (std::string(prefix) + "-labels-idx1-ubyte");
    if (!fs::exists(ip) || !fs::exists(lp)) continue;
    const ImageSet ci = load_idx_images(ip);
    const LabelSet cl = load_idx_labels(lp);
    const bool dims = ci.count == count && ci.rows == 28 && ci.cols == 28 && cl.count == count;
    ok &= dims;
    checked.push_back(fmt("%s %zux%zux%zu %s", prefix, ci.count, ci.rows, ci.cols, dims ? "ok" : "WRONG"));
  }
  if (!checked.empty()) {
    canonical = "canonical:";
    for (const auto& c : checked) canonical += " " + c;
  }
  return {ok, fmt("synthetic round trip %s, wrong magic %s; ", roundtrip ? "byte-exact" : "MISMATCH",
                  rejected ? "rejected" : "ACCEPTED") +
                  canonical};
}

struct Criterion {
  int id;
  const char* name;
  double limit_s;  // 0 = no hard limit
  bool advisory;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all{
      {1, "fixed-point law", 10, false, criterion1},
      {2, "reversibility", 10, false, criterion2},
      {3, "squash and update algebra", 5, false, criterion3},
      {4, "gating soundness", 30, false, criterion4},
      {5, "integrator convergence", 10, false, criterion5},
      {6, "learning happens", 0, false, criterion6},
      {7, "combined strategy trend", 0, true, criterion7},
      {8, "strategy separation", 60, false, criterion8},
      {9, "IDX parser", 5, false, criterion9},
  };
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));

  int failed = 0;
  for (const Criterion& c : all) {
    if (!wanted.empty() && !wanted.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    bool pass = o.pass;
    std::string timing = fmt("%.1f s", secs);
    if (c.limit_s > 0) {
      timing += fmt(" of %.0f s", c.limit_s);
      if (secs > c.limit_s) {
        pass = false;
        timing += " EXCEEDED";
      }
    }
    std::printf("[%s] criterion %d %s: %s (%s)%s\n", pass ? "PASS" : "FAIL", c.id, c.name,
                o.detail.c_str(), timing.c_str(), c.advisory && !pass ? " [advisory]" : "");
    std::fflush(stdout);
    if (!pass && !c.advisory) ++failed;
  }
  return failed == 0 ? 0 : 1;
}
