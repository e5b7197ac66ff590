//
// Copyright 2026 The ShuffleDP Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

// Command-line front end: one binary, one subcommand per experiment.

#include <unistd.h>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "shuffledp/accountant.h"
#include "shuffledp/audit.h"
#include "shuffledp/bench.h"
#include "shuffledp/data.h"
#include "shuffledp/errors.h"
#include "shuffledp/lognormal.h"
#include "shuffledp/model.h"
#include "shuffledp/permute.h"
#include "shuffledp/toyexp.h"
#include "shuffledp/trainer.h"

namespace shuffledp {
namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;

constexpr char kToolVersion[] = "0.1.0";

enum ExitCode : int {
  kOk = 0,
  kOther = 1,
  kUsage = 2,
  kConfig = 3,
  kInfeasible = 4,
  kDomain = 5,
};

// Shortest round-trip decimal, independent of the C locale.
std::string Num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

std::vector<double> ParseList(const std::string& text, const char* what) {
  std::vector<double> out;
  std::string_view s = text;
  while (!s.empty()) {
    const size_t comma = s.find(',');
    std::string_view item = s.substr(0, comma);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (item.empty() || ec != std::errc() || ptr != item.data() + item.size()) {
      throw ConfigError(std::string("bad number '") + std::string(item) +
                        "' in " + what);
    }
    out.push_back(v);
    if (comma == std::string_view::npos) break;
    s.remove_prefix(comma + 1);
  }
  if (out.empty()) throw ConfigError(std::string("empty list for ") + what);
  return out;
}

std::string ReadFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Writes to a sibling temporary file and renames it into place.
void WriteAtomic(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary);
    out << content;
    out.flush();
    if (!out) throw ConfigError("cannot write '" + tmp.string() + "'");
  }
  fs::rename(tmp, path);
}

std::string DefaultOut(const std::string& name) {
  const char* dir = std::getenv("SHUFFLEDP_OUT_DIR");
  return (fs::path(dir && *dir ? dir : ".") / name).string();
}

struct Run {
  std::string subcommand;
  std::vector<std::string> argv;
  json config = json::object();
  uint64_t seed = 0;
  std::vector<std::string> outputs;
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

  void WriteManifest(const fs::path& path) const {
    json m;
    m["subcommand"] = subcommand;
    m["argv"] = argv;
    m["config"] = config;
    m["seed"] = seed;
    m["tool_version"] = kToolVersion;
    m["outputs"] = outputs;
    m["timings"] = {
        {"wall_seconds",
         std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
             .count()}};
    WriteAtomic(path, m.dump(2) + "\n");
  }

  // Writes `content` to `path`, then the manifest next to it.
  void Emit(const std::string& path, const std::string& content) {
    WriteAtomic(path, content);
    outputs.push_back(path);
    WriteManifest(path + ".manifest.json");
  }
};

// ---- sigma / curve / heatmap ----

struct AccountantFlags {
  double delta = 1e-5;
  double c = 1.0;
  double c_prime = 1.0;
  double p = 0.0;
  int64_t steps = 0;
  double slack = 0.5;
  double fw_warning = 4.0;

  void Register(CLI::App* app) {
    app->add_option("--delta", delta, "total delta")->default_val(1e-5);
    app->add_option("--c", c, "per-sample clip norm")->default_val(1.0);
    app->add_option("--c-prime", c_prime, "batch clip norm")->default_val(1.0);
    app->add_option("--p", p, "sampling rate |B|/N")->required();
    app->add_option("--steps", steps, "training steps T")->required();
    app->add_option("--slack-fraction", slack,
                    "fraction of delta kept as composition slack")
        ->default_val(0.5);
    app->add_option("--fw-warning", fw_warning,
                    "c^2/sigma^2 above which a variance warning is raised")
        ->default_val(4.0);
  }

  json ToJson() const {
    return {{"delta", delta}, {"c", c}, {"c_prime", c_prime}, {"p", p},
            {"steps", steps}, {"slack_fraction", slack},
            {"fw_warning", fw_warning}};
  }

  SolveOptions Options() const {
    SolveOptions o;
    o.delta_slack_fraction = slack;
    o.fw_variance_warning = fw_warning;
    return o;
  }

  SigmaSolution Solve(double eps, int64_t d, bool shuffled) const {
    SigmaRequest r;
    r.total = {eps, delta};
    r.c = c;
    r.c_prime = c_prime;
    r.d = d;
    r.p = p;
    r.steps = steps;
    r.shuffled = shuffled;
    return SolveSigma(r, Options());
  }
};

void Warn(const SigmaSolution& s, double c) {
  if (s.high_variance_warning) {
    std::cerr << "warning: kind=fw_variance message=c^2/sigma^2="
              << Num(c * c / (s.sigma * s.sigma))
              << " exceeds the lognormal approximation threshold\n";
  }
}

// ---- train config ----

struct TrainFlags {
  std::string config_path;
  std::string data;
  std::string out;
  std::optional<double> eps, delta, c, c_prime, lr, sigma, sigma0;
  std::optional<int64_t> steps;
  std::optional<size_t> batch_size;
  std::optional<uint64_t> seed;
  std::optional<int> threads;
  std::optional<std::string> loss;
  bool no_shuffle = false;
  bool freeze = false;
  bool force_fallback = false;
};

// The config document is {"model": {...}, "train": {...}}; a bare model
// document is also accepted for invariance-check.
ModelConfig ModelFromDocument(const json& doc) {
  const json& m = doc.contains("model") ? doc.at("model") : doc;
  return ParseModelConfig(m.dump());
}

json ParseJsonFile(const std::string& path) {
  const std::string text = ReadFile(path);
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError("'" + path + "': " + e.what());
  }
}

TrainConfig ResolveTrainConfig(const json& doc, const TrainFlags& f,
                               LossKind model_loss) {
  TrainConfig cfg;
  cfg.loss = model_loss;
  const json t = doc.value("train", json::object());
  static const std::vector<std::string> kKeys = {
      "epsilon", "delta", "c", "c_prime", "batch_size", "steps",
      "lr", "seed", "loss", "shuffle", "freeze_permutations",
      "force_fallback", "sigma", "sigma0", "threads", "slack_fraction"};
  for (const auto& [k, v] : t.items()) {
    if (std::find(kKeys.begin(), kKeys.end(), k) == kKeys.end()) {
      throw ConfigError("unknown train config key '" + k + "'");
    }
  }
  try {
    cfg.budget.epsilon = t.value("epsilon", cfg.budget.epsilon);
    cfg.budget.delta = t.value("delta", cfg.budget.delta);
    cfg.c = t.value("c", cfg.c);
    cfg.c_prime = t.value("c_prime", cfg.c_prime);
    cfg.batch_size = t.value("batch_size", cfg.batch_size);
    cfg.steps = t.value("steps", cfg.steps);
    cfg.lr = t.value("lr", cfg.lr);
    cfg.seed = t.value("seed", cfg.seed);
    if (t.contains("loss")) cfg.loss = ParseLoss(t["loss"].get<std::string>());
    cfg.shuffle = t.value("shuffle", cfg.shuffle);
    cfg.freeze_permutations = t.value("freeze_permutations", false);
    cfg.force_fallback = t.value("force_fallback", false);
    if (t.contains("sigma")) cfg.sigma_override = t["sigma"].get<double>();
    if (t.contains("sigma0")) cfg.sigma0_override = t["sigma0"].get<double>();
    cfg.threads = t.value("threads", cfg.threads);
    cfg.solve.delta_slack_fraction =
        t.value("slack_fraction", cfg.solve.delta_slack_fraction);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("train config: ") + e.what());
  }
  if (f.eps) cfg.budget.epsilon = *f.eps;
  if (f.delta) cfg.budget.delta = *f.delta;
  if (f.c) cfg.c = *f.c;
  if (f.c_prime) cfg.c_prime = *f.c_prime;
  if (f.batch_size) cfg.batch_size = *f.batch_size;
  if (f.steps) cfg.steps = *f.steps;
  if (f.lr) cfg.lr = *f.lr;
  if (f.seed) cfg.seed = *f.seed;
  if (f.loss) cfg.loss = ParseLoss(*f.loss);
  if (f.sigma) cfg.sigma_override = *f.sigma;
  if (f.sigma0) cfg.sigma0_override = *f.sigma0;
  if (f.threads) cfg.threads = *f.threads;
  if (f.no_shuffle) cfg.shuffle = false;
  if (f.freeze) cfg.freeze_permutations = true;
  if (f.force_fallback) cfg.force_fallback = true;
  cfg.budget.Validate();
  return cfg;
}

json TrainConfigToJson(const TrainConfig& c) {
  json j = {{"epsilon", c.budget.epsilon},
            {"delta", c.budget.delta},
            {"c", c.c},
            {"c_prime", c.c_prime},
            {"batch_size", c.batch_size},
            {"steps", c.steps},
            {"lr", c.lr},
            {"seed", c.seed},
            {"loss", c.loss == LossKind::kCrossEntropy ? "cross_entropy"
                                                       : "squared_error"},
            {"shuffle", c.shuffle},
            {"freeze_permutations", c.freeze_permutations},
            {"force_fallback", c.force_fallback},
            {"threads", c.threads},
            {"slack_fraction", c.solve.delta_slack_fraction}};
  if (c.sigma_override) j["sigma"] = *c.sigma_override;
  if (c.sigma0_override) j["sigma0"] = *c.sigma0_override;
  return j;
}

const char* PathName(UpdatePath p) {
  return p == UpdatePath::kShuffled ? "shuffled" : "fallback";
}

int RunTrain(const TrainFlags& f, Run& run) {
  const json doc = ParseJsonFile(f.config_path);
  const ModelConfig mcfg = ModelFromDocument(doc);
  const TrainConfig cfg = ResolveTrainConfig(doc, f, mcfg.loss);
  const Dataset data = LoadDataset(f.data);
  if (data.dim() != mcfg.input_dim) {
    throw ConfigError("data has " + std::to_string(data.dim()) +
                      " features but the model expects " +
                      std::to_string(mcfg.input_dim));
  }
  Model model = BuildModel(mcfg, cfg.seed);
  run.seed = cfg.seed;
  run.config = {{"model", json::parse(ModelConfigToJson(mcfg))},
                {"train", TrainConfigToJson(cfg)},
                {"data", f.data}};

  const TrainResult r = Train(cfg, std::move(model), data);

  const fs::path dir = f.out.empty() ? fs::path(DefaultOut("train")) : fs::path(f.out);
  fs::create_directories(dir);
  std::string log;
  for (const StepRecord& s : r.log) log += StepRecordToJson(s) + "\n";
  const std::string log_path = (dir / "steps.jsonl").string();
  WriteAtomic(log_path, log);
  run.outputs.push_back(log_path);

  const std::string weights_path = (dir / "weights.bin").string();
  const std::string tmp = weights_path + ".tmp." + std::to_string(::getpid());
  SaveWeights(tmp, r.model);
  fs::rename(tmp, weights_path);
  run.outputs.push_back(weights_path);

  json summary;
  summary["final_loss"] = MeanLoss(r.model, data, cfg.loss);
  summary["final_accuracy"] = Accuracy(r.model, data);
  summary["sigma"] = r.sigma;
  summary["sigma0"] = r.sigma0;
  summary["noise_multiplier"] =
      (r.path == UpdatePath::kShuffled ? r.sigma : r.sigma0) / cfg.c;
  summary["path"] = PathName(r.path);
  summary["d"] = r.d;
  summary["fw_variance_warning"] = r.fw_warning;
  summary["log_permutation_count"] = LogPermutationCount(r.model);
  json groups = json::array();
  for (size_t i = 0; i < mcfg.blocks.size(); ++i) {
    groups.push_back(
        {{"block", i},
         {"type", mcfg.blocks[i].kind == BlockConfig::Kind::kMlp ? "mlp"
                                                                 : "attention"},
         {"path", PathName(r.path)}});
  }
  summary["groups"] = groups;
  const std::string summary_path = (dir / "summary.json").string();
  WriteAtomic(summary_path, summary.dump(2) + "\n");
  run.outputs.push_back(summary_path);
  run.WriteManifest(dir / "manifest.json");

  std::cout << "path=" << PathName(r.path) << " sigma=" << Num(r.sigma)
            << " sigma0=" << Num(r.sigma0)
            << " final_loss=" << Num(summary["final_loss"].get<double>())
            << " final_accuracy=" << Num(summary["final_accuracy"].get<double>())
            << "\n";
  return kOk;
}

int RunInvarianceCheck(const std::string& config_path, uint64_t seed,
                       int trials, Run& run) {
  const ModelConfig mcfg = ModelFromDocument(ParseJsonFile(config_path));
  run.seed = seed;
  run.config = {{"model", json::parse(ModelConfigToJson(mcfg))},
                {"trials", trials}};
  const Model orig = BuildModel(mcfg, seed);
  Rng rng(DeriveSeed(seed, 99));
  Model perm = orig;
  const ModelPermutation p = SampleModelPermutation(perm, rng);
  ApplyModelPermutation(perm, p);
  const int classes = static_cast<int>(Forward(orig, std::vector<double>(
                                                         mcfg.input_dim, 0.0))
                                           .size());
  double fwd = 0.0, bwd = 0.0, weight_l2 = 0.0;
  {
    const auto a = orig.Flatten();
    const auto b = perm.Flatten();
    for (size_t i = 0; i < a.size(); ++i) weight_l2 += (a[i] - b[i]) * (a[i] - b[i]);
    weight_l2 = std::sqrt(weight_l2);
  }
  for (int t = 0; t < trials; ++t) {
    std::vector<double> x(mcfg.input_dim);
    for (double& v : x) v = rng.Normal();
    const auto ya = Forward(orig, x);
    const auto yb = Forward(perm, x);
    for (size_t i = 0; i < ya.size(); ++i) fwd = std::max(fwd, std::abs(ya[i] - yb[i]));
    const int label = t % classes;
    Model g = Backprop(orig, x, label, mcfg.loss).grads;
    ApplyModelPermutation(g, p);
    const auto ga = g.Flatten();
    const auto gb = Backprop(perm, x, label, mcfg.loss).grads.Flatten();
    for (size_t i = 0; i < ga.size(); ++i) bwd = std::max(bwd, std::abs(ga[i] - gb[i]));
  }
  std::cout << "max_forward_deviation=" << Num(fwd)
            << " max_backward_deviation=" << Num(bwd)
            << " weight_l2_difference=" << Num(weight_l2) << "\n";
  return kOk;
}

int Fail(ExitCode code, const std::string& kind, std::string message) {
  std::replace(message.begin(), message.end(), '\n', ' ');
  std::cerr << "error: kind=" << kind << " message=" << message << "\n";
  return code;
}

int Main(int argc, char** argv) {
  CLI::App app{"Shuffled Gaussian mechanism: accountant, trainer and experiments",
               "shuffledp"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);
  Run run;
  for (int i = 0; i < argc; ++i) run.argv.emplace_back(argv[i]);

  // sigma
  auto* sigma_cmd = app.add_subcommand("sigma", "noise std for a training run");
  double s_eps = 0;
  int64_t s_d = 0;
  bool s_unshuffled = false;
  std::string s_out;
  AccountantFlags s_acc;
  sigma_cmd->add_option("--eps", s_eps, "total epsilon")->required();
  sigma_cmd->add_option("--d", s_d, "shuffled dimension")->required();
  sigma_cmd->add_flag("--unshuffled", s_unshuffled, "plain Gaussian accounting");
  sigma_cmd->add_option("--out", s_out, "optional JSON output");
  s_acc.Register(sigma_cmd);

  // curve
  auto* curve_cmd = app.add_subcommand("curve", "sigma against epsilon");
  int64_t c_d = 0;
  std::string c_eps = "0.25,0.5,1,2,4";
  std::string c_out;
  AccountantFlags c_acc;
  curve_cmd->add_option("--d", c_d, "shuffled dimension")->required();
  curve_cmd->add_option("--eps-list", c_eps, "comma-separated epsilons")
      ->default_val(c_eps);
  curve_cmd->add_option("--out", c_out, "CSV output");
  c_acc.Register(curve_cmd);

  // heatmap
  auto* heat_cmd = app.add_subcommand("heatmap", "sigma over (d, epsilon)");
  std::string h_d = "1,1000,1000000,1000000000";
  std::string h_eps = "0.25,0.5,1,2,4";
  std::string h_out;
  AccountantFlags h_acc;
  heat_cmd->add_option("--d-list", h_d, "dimensions; 1 means unshuffled")
      ->default_val(h_d);
  heat_cmd->add_option("--eps-list", h_eps, "epsilons")->default_val(h_eps);
  heat_cmd->add_option("--out", h_out, "CSV output");
  h_acc.Register(heat_cmd);

  // train
  auto* train_cmd = app.add_subcommand("train", "shuffled DPSGD");
  TrainFlags tf;
  train_cmd->add_option("--config", tf.config_path, "JSON config")->required();
  train_cmd->add_option("--data", tf.data, "CSV path or synthetic:key=value,...")
      ->required();
  train_cmd->add_option("--out", tf.out, "output directory");
  train_cmd->add_option("--eps", tf.eps, "total epsilon");
  train_cmd->add_option("--delta", tf.delta, "total delta");
  train_cmd->add_option("--c", tf.c, "per-sample clip norm");
  train_cmd->add_option("--c-prime", tf.c_prime, "batch clip norm");
  train_cmd->add_option("--batch-size", tf.batch_size, "expected batch size");
  train_cmd->add_option("--steps", tf.steps, "training steps");
  train_cmd->add_option("--lr", tf.lr, "learning rate");
  train_cmd->add_option("--seed", tf.seed, "seed");
  train_cmd->add_option("--loss", tf.loss, "cross_entropy or squared_error");
  train_cmd->add_option("--sigma", tf.sigma, "override shuffled noise std");
  train_cmd->add_option("--sigma0", tf.sigma0, "override unshuffled noise std");
  train_cmd->add_option("--threads", tf.threads, "per-sample gradient threads");
  train_cmd->add_flag("--no-shuffle", tf.no_shuffle, "skip the permutation step");
  train_cmd->add_flag("--freeze-permutations", tf.freeze,
                      "reuse the first sampled permutation");
  train_cmd->add_flag("--force-fallback", tf.force_fallback,
                      "always use the unshuffled noise");

  // audit
  auto* audit_cmd = app.add_subcommand("audit", "Dirac-canary audit of one invocation");
  std::optional<double> a_sigma, a_eps;
  AuditRequest ar;
  bool a_unshuffled = false;
  std::string a_out;
  audit_cmd->add_option("--sigma", a_sigma, "noise std");
  audit_cmd->add_option("--eps-theo", a_eps,
                        "calibrate sigma to this certified epsilon instead");
  audit_cmd->add_option("--c", ar.spec.c, "canary norm")->default_val(1.0);
  audit_cmd->add_option("--c-prime", ar.spec.c_prime, "batch clip norm")
      ->default_val(1.0);
  audit_cmd->add_option("--d", ar.spec.d, "dimension")->required();
  audit_cmd->add_option("--trials", ar.trials, "trials per hypothesis")
      ->default_val(10000);
  audit_cmd->add_option("--delta", ar.delta, "delta")->default_val(1e-5);
  audit_cmd->add_option("--seed", ar.seed, "seed")->default_val(0);
  audit_cmd->add_option("--bootstrap", ar.bootstrap_reps, "bootstrap resamples")
      ->default_val(200);
  audit_cmd->add_option("--threads", ar.threads, "worker threads")->default_val(1);
  audit_cmd->add_flag("--unshuffled", a_unshuffled, "audit the plain Gaussian");
  audit_cmd->add_option("--out", a_out, "JSON output");

  // lognormal-compare
  auto* ln_cmd = app.add_subcommand("lognormal-compare",
                                    "Fenton-Wilkinson against Monte-Carlo");
  int64_t l_d = 0, l_draws = 100000;
  double l_sigma = 0;
  uint64_t l_seed = 0;
  int l_points = 200, l_threads = 0;
  std::string l_out;
  ln_cmd->add_option("--d", l_d, "number of summands")->required();
  ln_cmd->add_option("--sigma", l_sigma, "std of each log-term")->required();
  ln_cmd->add_option("--draws", l_draws, "Monte-Carlo draws")->default_val(100000);
  ln_cmd->add_option("--seed", l_seed, "seed")->default_val(0);
  ln_cmd->add_option("--points", l_points, "CDF evaluation points")->default_val(200);
  ln_cmd->add_option("--threads", l_threads, "threads, 0 = all cores")->default_val(0);
  ln_cmd->add_option("--out", l_out, "CSV output");

  // toy-distance
  auto* toy_cmd = app.add_subcommand("toy-distance",
                                     "grid distance of 2-D (shuffled) Gaussians");
  std::string t_c1 = "-2,0", t_c2 = "2,0";
  double t_sigma = 1.0;
  GridSpec grid;
  std::string t_out;
  toy_cmd->add_option("--c1", t_c1, "first center x,y")->default_val(t_c1);
  toy_cmd->add_option("--c2", t_c2, "second center x,y")->default_val(t_c2);
  toy_cmd->add_option("--sigma", t_sigma, "noise std")->default_val(1.0);
  toy_cmd->add_option("--grid", grid.points_per_axis, "points per axis")
      ->default_val(201);
  toy_cmd->add_option("--lo", grid.lo, "grid lower edge")->default_val(-10.0);
  toy_cmd->add_option("--hi", grid.hi, "grid upper edge")->default_val(10.0);
  toy_cmd->add_option("--out", t_out, "CSV of grid densities");

  // invariance-check
  auto* inv_cmd = app.add_subcommand("invariance-check",
                                     "forward/backward deviation under permutation");
  std::string i_config;
  uint64_t i_seed = 0;
  int i_trials = 10;
  inv_cmd->add_option("--config", i_config, "model or train JSON config")->required();
  inv_cmd->add_option("--seed", i_seed, "seed")->default_val(0);
  inv_cmd->add_option("--trials", i_trials, "random inputs")->default_val(10);

  // shuffle-bench
  auto* bench_cmd = app.add_subcommand("shuffle-bench", "time an n x n index shuffle");
  size_t b_n = 10000;
  int b_reps = 7;
  uint64_t b_seed = 0;
  std::string b_out;
  bench_cmd->add_option("--n", b_n, "matrix side")->default_val(10000);
  bench_cmd->add_option("--reps", b_reps, "repetitions")->default_val(7);
  bench_cmd->add_option("--seed", b_seed, "seed")->default_val(0);
  bench_cmd->add_option("--out", b_out, "CSV of per-repetition times");

  for (CLI::App* sub : app.get_subcommands({})) sub->allow_extras(false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return Fail(kUsage, "usage", e.what());
  }

  try {
    if (*sigma_cmd) {
      run.subcommand = "sigma";
      run.config = s_acc.ToJson();
      run.config["epsilon"] = s_eps;
      run.config["d"] = s_d;
      run.config["shuffled"] = !s_unshuffled;
      const SigmaSolution s = s_acc.Solve(s_eps, s_d, !s_unshuffled);
      Warn(s, s_acc.c);
      std::cout << Num(s.sigma) << "\n";
      if (!s_out.empty()) {
        const json j = {{"sigma", s.sigma},
                        {"per_step_epsilon", s.per_step.epsilon},
                        {"per_step_delta", s.per_step.delta},
                        {"per_invocation_epsilon", s.per_invocation.epsilon},
                        {"per_invocation_delta", s.per_invocation.delta},
                        {"fw_variance_warning", s.high_variance_warning}};
        run.Emit(s_out, j.dump(2) + "\n");
      }
      return kOk;
    }
    if (*curve_cmd) {
      run.subcommand = "curve";
      const auto eps = ParseList(c_eps, "--eps-list");
      run.config = c_acc.ToJson();
      run.config["d"] = c_d;
      run.config["eps_list"] = eps;
      std::string csv = "epsilon,sigma_shuffled,sigma_unshuffled\n";
      for (double e : eps) {
        const SigmaSolution s = c_acc.Solve(e, c_d, true);
        Warn(s, c_acc.c);
        csv += Num(e) + "," + Num(s.sigma) + "," +
               Num(c_acc.Solve(e, c_d, false).sigma) + "\n";
      }
      run.Emit(c_out.empty() ? DefaultOut("curve.csv") : c_out, csv);
      std::cout << csv;
      return kOk;
    }
    if (*heat_cmd) {
      run.subcommand = "heatmap";
      const auto ds = ParseList(h_d, "--d-list");
      const auto eps = ParseList(h_eps, "--eps-list");
      run.config = h_acc.ToJson();
      run.config["d_list"] = ds;
      run.config["eps_list"] = eps;
      std::string csv = "d,epsilon,sigma\n";
      for (double dv : ds) {
        if (dv < 1 || dv != std::floor(dv)) {
          throw ConfigError("--d-list entries must be positive integers");
        }
        const int64_t d = static_cast<int64_t>(dv);
        for (double e : eps) {
          const SigmaSolution s = h_acc.Solve(e, std::max<int64_t>(d, 2), d > 1);
          csv += std::to_string(d) + "," + Num(e) + "," + Num(s.sigma) + "\n";
        }
      }
      run.Emit(h_out.empty() ? DefaultOut("heatmap.csv") : h_out, csv);
      std::cout << csv;
      return kOk;
    }
    if (*train_cmd) {
      run.subcommand = "train";
      return RunTrain(tf, run);
    }
    if (*audit_cmd) {
      run.subcommand = "audit";
      if (a_sigma.has_value() == a_eps.has_value()) {
        return Fail(kUsage, "usage", "audit needs exactly one of --sigma, --eps-theo");
      }
      ar.shuffled = !a_unshuffled;
      ar.spec.sigma = a_sigma ? *a_sigma
                              : CalibrateSigma(ar.spec, *a_eps, ar.delta, ar.shuffled);
      run.seed = ar.seed;
      run.config = {{"sigma", ar.spec.sigma}, {"c", ar.spec.c},
                    {"c_prime", ar.spec.c_prime}, {"d", ar.spec.d},
                    {"trials", ar.trials}, {"delta", ar.delta},
                    {"bootstrap", ar.bootstrap_reps}, {"shuffled", ar.shuffled},
                    {"threads", ar.threads}};
      const AuditReport rep = RunAudit(ar);
      json j = {{"sigma", rep.sigma},
                      {"shuffled", rep.shuffled},
                      {"eps_theoretical", rep.eps_theoretical},
                      {"eps_empirical", rep.outcome.eps_empirical},
                      {"ci_level", ar.level},
                      {"ci_lo", rep.ci.lo},
                      {"ci_hi", rep.ci.hi},
                      {"alpha", rep.outcome.alpha},
                      {"beta", rep.outcome.beta},
                      {"delta", rep.outcome.delta},
                      {"threshold", rep.outcome.threshold},
                      {"trials", rep.outcome.trials},
                      {"clamped", rep.outcome.clamped}};
      if (ar.shuffled) {
        j["eps_exact_max_test"] = ExactMaxTestEpsilon(ar.spec, ar.delta).eps_empirical;
      }
      run.Emit(a_out.empty() ? DefaultOut("audit.json") : a_out, j.dump(2) + "\n");
      std::cout << j.dump() << "\n";
      return kOk;
    }
    if (*ln_cmd) {
      run.subcommand = "lognormal-compare";
      if (l_d < 1 || l_points < 1) throw DomainError("--d and --points must be >= 1");
      run.seed = l_seed;
      run.config = {{"d", l_d}, {"sigma", l_sigma}, {"draws", l_draws},
                    {"points", l_points}};
      const std::vector<double> mus(static_cast<size_t>(l_d), 0.0);
      const double s2 = l_sigma * l_sigma;
      const auto mc = MonteCarloSumSamples(mus, s2, l_draws, l_seed, l_threads);
      const LognormalSumApprox fw = FentonWilkinson(mus, s2);
      // Evaluate at Monte-Carlo quantiles so the grid follows the mass.
      std::string csv = "x,cdf_fw,cdf_mc\n";
      for (int i = 0; i < l_points; ++i) {
        const double q = (i + 0.5) / l_points;
        const double x = mc[static_cast<size_t>(q * (mc.size() - 1))];
        const double emp = static_cast<double>(
                               std::upper_bound(mc.begin(), mc.end(), x) -
                               mc.begin()) /
                           mc.size();
        csv += Num(x) + "," + Num(fw.Cdf(x)) + "," + Num(emp) + "\n";
      }
      run.Emit(l_out.empty() ? DefaultOut("lognormal.csv") : l_out, csv);
      std::cout << "ks=" << Num(KolmogorovSmirnov(mc, fw)) << " mu_y="
                << Num(fw.mu_y) << " sigma2_y=" << Num(fw.sigma2_y) << "\n";
      return kOk;
    }
    if (*toy_cmd) {
      run.subcommand = "toy-distance";
      const auto c1 = ParseList(t_c1, "--c1");
      const auto c2 = ParseList(t_c2, "--c2");
      run.config = {{"c1", c1}, {"c2", c2}, {"sigma", t_sigma},
                    {"grid", grid.points_per_axis}, {"lo", grid.lo},
                    {"hi", grid.hi}};
      const double plain = MixtureDistance(c1, c2, t_sigma, grid, false);
      const double shuffled = MixtureDistance(c1, c2, t_sigma, grid, true);
      std::string csv = "x,y,pdf1,pdf2,shuffled_pdf1,shuffled_pdf2\n";
      for (const GridDensity& g : EvaluateGrid(c1, c2, t_sigma, grid)) {
        csv += Num(g.x) + "," + Num(g.y) + "," + Num(g.plain1) + "," +
               Num(g.plain2) + "," + Num(g.shuffled1) + "," + Num(g.shuffled2) +
               "\n";
      }
      run.Emit(t_out.empty() ? DefaultOut("toy_grid.csv") : t_out, csv);
      std::cout << "unshuffled=" << Num(plain) << " shuffled=" << Num(shuffled)
                << " ratio=" << Num(plain / shuffled) << "\n";
      return kOk;
    }
    if (*inv_cmd) {
      run.subcommand = "invariance-check";
      return RunInvarianceCheck(i_config, i_seed, i_trials, run);
    }
    if (*bench_cmd) {
      run.subcommand = "shuffle-bench";
      run.seed = b_seed;
      run.config = {{"n", b_n}, {"reps", b_reps}};
      const ShuffleBenchResult r = RunShuffleBench(b_n, b_reps, b_seed);
      std::cout << "n=" << r.n << " reps=" << r.reps
                << " median_ms=" << Num(r.median_ms)
                << " min_ms=" << Num(r.min_ms)
                << " permutation_ok=" << (r.permutation_ok ? "true" : "false")
                << " hardware_threads=" << std::thread::hardware_concurrency()
                << " (timings are hardware dependent)\n";
      if (!b_out.empty()) {
        std::string csv = "rep,ms\n";
        for (size_t i = 0; i < r.times_ms.size(); ++i) {
          csv += std::to_string(i) + "," + Num(r.times_ms[i]) + "\n";
        }
        run.Emit(b_out, csv);
      }
      return r.permutation_ok ? kOk : kOther;
    }
  } catch (const InfeasibleBudgetError& e) {
    return Fail(kInfeasible, "infeasible_budget", e.what());
  } catch (const ConfigError& e) {
    return Fail(kConfig, "config", e.what());
  } catch (const DomainError& e) {
    return Fail(kDomain, "domain", e.what());
  } catch (const ShapeError& e) {
    return Fail(kDomain, "shape", e.what());
  } catch (const fs::filesystem_error& e) {
    return Fail(kConfig, "io", e.what());
  } catch (const std::bad_alloc&) {
    return Fail(kOther, "allocation", "out of memory");
  } catch (const std::exception& e) {
    return Fail(kOther, "internal", e.what());
  }
  return Fail(kUsage, "usage", "no subcommand");
}

}  // namespace
}  // namespace shuffledp

int main(int argc, char** argv) { return shuffledp::Main(argc, argv); }
