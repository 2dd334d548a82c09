#include "relu_prism/cli.h"

#include <openssl/evp.h>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "json.hpp"
#include "relu_prism/error.h"
#include "relu_prism/experiment.h"
#include "relu_prism/explain.h"

#ifndef RELU_PRISM_VERSION
#define RELU_PRISM_VERSION "0.0.0"
#endif

namespace relu_prism::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kNetworkFile = "network.json";
constexpr const char* kClustersFile = "clusters.json";
constexpr const char* kImportanceFile = "importance.csv";
constexpr const char* kVerifyFile = "verify.json";
constexpr const char* kManifestFile = "manifest.json";
constexpr const char* kHistoryFile = "history.csv";
constexpr const char* kDatasetFile = "dataset.csv";
constexpr const char* kSweepFile = "sweep.json";

std::vector<std::uint64_t> parse_seed_list(const std::string& spec) {
  std::vector<std::uint64_t> seeds;
  auto number = [&](const std::string& s) {
    try {
      std::size_t pos = 0;
      const unsigned long long v = std::stoull(s, &pos);
      if (pos != s.size()) throw std::invalid_argument(s);
      return static_cast<std::uint64_t>(v);
    } catch (const std::exception&) {
      throw InvalidInputError(fmt::format("bad seed '{}' in '{}'", s, spec));
    }
  };
  if (auto dots = spec.find(".."); dots != std::string::npos) {
    const auto lo = number(spec.substr(0, dots));
    const auto hi = number(spec.substr(dots + 2));
    if (hi < lo || hi - lo >= 1000) throw InvalidInputError("bad seed range " + spec);
    for (auto s = lo; s <= hi; ++s) seeds.push_back(s);
    return seeds;
  }
  std::stringstream ss(spec);
  for (std::string item; std::getline(ss, item, ',');) seeds.push_back(number(item));
  if (seeds.empty()) throw InvalidInputError("empty seed list");
  return seeds;
}

template <typename T>
std::vector<T> parse_list(const std::string& spec, const char* what) {
  std::vector<T> values;
  if (spec.empty()) return values;
  std::stringstream ss(spec);
  for (std::string item; std::getline(ss, item, ',');) {
    try {
      std::size_t pos = 0;
      const long v = std::stol(item, &pos);
      if (pos != item.size() || v < 0) throw std::invalid_argument(item);
      values.push_back(static_cast<T>(v));
    } catch (const std::exception&) {
      throw InvalidInputError(fmt::format("bad {} list '{}'", what, spec));
    }
  }
  return values;
}

std::string join_list(const auto& values) {
  std::string s;
  for (const auto& v : values) s += (s.empty() ? "" : ",") + fmt::format("{}", v);
  return s;
}

// Flags shared by simulate and titanic.
struct TrainFlags {
  std::string seeds;
  std::optional<std::uint64_t> seed;
  int epochs = 10;
  double lr = 0.01;
  std::size_t batch_size = 100;
  double reg = 0.02;
  std::string reg_norm = "l1";
  std::string reg_reduction = "mean";
  std::string reg_layers;
  std::string hidden = "4,2";
  std::string normalization = "raw";
  double tol = kDefaultAffineTolerance;
  std::string out;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--seed", seed, "Training seed (default: $RELU_PRISM_SEED or 1)");
    cmd->add_option("--seeds", seeds, "Seed sweep, e.g. 1..5 or 1,3,7; the best run is kept")
        ->excludes(cmd->get_option("--seed"));
    cmd->add_option("--epochs", epochs, "Training epochs")->capture_default_str();
    cmd->add_option("--lr", lr, "Adam step size")->capture_default_str();
    cmd->add_option("--batch-size", batch_size, "Mini-batch size")->capture_default_str();
    cmd->add_option("--reg", reg, "Activity regularization coefficient")->capture_default_str();
    cmd->add_option("--reg-norm", reg_norm, "Activity penalty norm: l1 or l2")->capture_default_str();
    cmd->add_option("--reg-reduction", reg_reduction,
                    "Per-layer reduction over units: mean or sum")
        ->capture_default_str();
    cmd->add_option("--reg-layers", reg_layers,
                    "Comma list of 0-based hidden layers to penalize (default: all)");
    cmd->add_option("--hidden", hidden, "Hidden layer widths")->capture_default_str();
    cmd->add_option("--normalization", normalization, "importance.csv weights: raw or max_abs")
        ->capture_default_str();
    cmd->add_option("--tol", tol, "Affine equivalence tolerance")->capture_default_str();
    cmd->add_option("--out", out, "Output directory")->required();
  }

  std::vector<std::uint64_t> resolve_seeds() const {
    if (!seeds.empty()) return parse_seed_list(seeds);
    if (seed) return {*seed};
    if (const char* env = std::getenv(kSeedEnvVar); env != nullptr && *env != '\0') {
      return {parse_seed_list(env).front()};
    }
    return {1};
  }

  TrainConfig config() const {
    TrainConfig c;
    c.hidden_widths = parse_list<std::size_t>(hidden, "hidden width");
    c.learning_rate = lr;
    c.epochs = epochs;
    c.batch_size = batch_size;
    c.activity_reg_coeff = reg;
    c.activity_norm = parse_activity_norm(reg_norm);
    c.activity_reduction = parse_activity_reduction(reg_reduction);
    c.regularized_layers = parse_list<std::size_t>(reg_layers, "layer");
    c.validate();
    return c;
  }

  // Fully resolved flags, --out excluded, so a manifest replays identically
  // into any directory and independently of the environment.
  std::vector<std::string> canonical(const std::vector<std::uint64_t>& resolved) const {
    const TrainConfig c = config();
    std::vector<std::string> args{"--seeds",         join_list(resolved),
                                  "--epochs",        std::to_string(epochs),
                                  "--lr",            fmt::format("{}", lr),
                                  "--batch-size",    std::to_string(batch_size),
                                  "--reg",           fmt::format("{}", reg),
                                  "--reg-norm",      std::string(to_string(c.activity_norm)),
                                  "--reg-reduction", std::string(to_string(c.activity_reduction)),
                                  "--hidden",        join_list(c.hidden_widths),
                                  "--normalization", std::string(to_string(parse_normalization(normalization))),
                                  "--tol",           fmt::format("{}", tol)};
    if (!c.regularized_layers.empty()) {
      args.push_back("--reg-layers");
      args.push_back(join_list(c.regularized_layers));
    }
    return args;
  }
};

json config_to_json(const TrainConfig& c) {
  return {{"hidden_widths", c.hidden_widths},
          {"learning_rate", c.learning_rate},
          {"epochs", c.epochs},
          {"batch_size", c.batch_size},
          {"activity_reg_coeff", c.activity_reg_coeff},
          {"activity_norm", std::string(to_string(c.activity_norm))},
          {"activity_reduction", std::string(to_string(c.activity_reduction))},
          {"regularized_layers", c.regularized_layers},
          {"adam", {{"beta1", c.adam.beta1}, {"beta2", c.adam.beta2}, {"epsilon", c.adam.epsilon}}}};
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInputError("cannot write " + path.string());
  out << text;
}

json affine_report_json(const AffineVerifyReport& r, double tol) {
  return {{"max_abs_err", r.max_abs_err},
          {"worst_index", r.worst_index},
          {"distinct_patterns", r.distinct_patterns},
          {"tol", tol},
          {"pass", r.pass}};
}

json jacobian_json(const JacobianSummary& j) {
  return {{"checked", j.checked},     {"skipped_boundary", j.skipped_boundary},
          {"max_row_err", j.max_row_err}, {"step", j.step},
          {"tol", j.tol},             {"pass", j.pass}};
}

std::string history_csv(const TrainHistory& history) {
  std::string s = "epoch,loss,accuracy\n";
  for (std::size_t e = 0; e < history.size(); ++e)
    s += fmt::format("{},{},{}\n", e + 1, history[e].loss, history[e].accuracy);
  return s;
}

json run_summary_json(const RunSummary& r) {
  return {{"seed", r.config.seed},
          {"train_accuracy", r.train_accuracy},
          {"analyzed_accuracy", r.analyzed_accuracy},
          {"initial_loss", r.initial_loss},
          {"final_loss", r.history.back().loss},
          {"clusters", r.clusters.size()},
          {"has_all_inactive_cluster", r.has_all_inactive_cluster()},
          {"verified", r.verified()}};
}

struct PipelineInputs {
  std::string command;
  std::vector<std::string> canonical_args;
  json inputs = json::array();
  json extra = json::object();
};

// Writes every artifact of a (possibly multi-seed) run; top-level files belong
// to the best run. Returns the exit code.
int write_pipeline(const fs::path& out_dir, const std::vector<RunSummary>& runs,
                   const Dataset& analyzed, Normalization normalization, double tol,
                   const PipelineInputs& meta, std::ostream& out) {
  fs::create_directories(out_dir);
  const std::size_t best = best_run(runs);
  const RunSummary& run = runs[best];

  save_network(run.network, out_dir / kNetworkFile);
  write_text(out_dir / kClustersFile, clusters_to_json(run.clusters).dump(2) + "\n");
  const auto reports = feature_importances(run.clusters, analyzed.feature_names, normalization);
  write_text(out_dir / kImportanceFile, render_report(run.clusters, reports, ReportFormat::csv));
  const json verify{{"affine", affine_report_json(run.verify, tol)},
                    {"jacobian", jacobian_json(run.jacobian)},
                    {"pass", run.verified()}};
  write_text(out_dir / kVerifyFile, verify.dump(2) + "\n");
  write_text(out_dir / kHistoryFile, history_csv(run.history));
  write_csv(analyzed, out_dir / kDatasetFile);

  json sweep{{"best_seed", run.config.seed}, {"runs", json::array()}};
  for (const auto& r : runs) sweep["runs"].push_back(run_summary_json(r));
  write_text(out_dir / kSweepFile, sweep.dump(2) + "\n");

  std::vector<std::uint64_t> seeds;
  for (const auto& r : runs) seeds.push_back(r.config.seed);
  json manifest{{"tool", "relu_prism"},
                {"version", RELU_PRISM_VERSION},
                {"command", meta.command},
                {"args", meta.canonical_args},
                {"config", config_to_json(run.config)},
                {"seeds", seeds},
                {"best_seed", run.config.seed},
                {"inputs", meta.inputs},
                {"outputs", {kNetworkFile, kClustersFile, kImportanceFile, kVerifyFile, kHistoryFile,
                             kDatasetFile, kSweepFile}}};
  for (const auto& [k, v] : meta.extra.items()) manifest[k] = v;
  write_text(out_dir / kManifestFile, manifest.dump(2) + "\n");

  for (const auto& r : runs) {
    out << fmt::format("seed {:>4}  train acc {:.4f}  clusters {:>3}  all-inactive {}  verified {}\n",
                       r.config.seed, r.train_accuracy, r.clusters.size(),
                       r.has_all_inactive_cluster() ? "yes" : "no", r.verified() ? "yes" : "no");
  }
  out << fmt::format("best seed {}: accuracy {:.4f}, {} clusters (* = all units inactive)\n",
                     run.config.seed, run.train_accuracy, run.clusters.size());
  out << render_report(run.clusters, reports, ReportFormat::text_table);
  out << fmt::format("affine max |err| {:.3g} (tol {:g}), jacobian max err {:.3g} over {} points\n",
                     run.verify.max_abs_err, tol, run.jacobian.max_row_err, run.jacobian.checked);
  out << "artifacts written to " << out_dir.string() << "\n";
  return run.verified() ? kExitOk : kExitVerificationFailed;
}

int cmd_simulate(const TrainFlags& flags, std::size_t n, std::uint64_t data_seed, std::ostream& out) {
  const auto seeds = flags.resolve_seeds();
  const TrainConfig config = flags.config();
  const Normalization normalization = parse_normalization(flags.normalization);
  const Dataset data = gen_boolean(n, data_seed);
  const auto runs = run_sweep(data, data, config, seeds, flags.tol);

  PipelineInputs meta;
  meta.command = "simulate";
  meta.canonical_args = {"simulate", "--n", std::to_string(n), "--data-seed", std::to_string(data_seed)};
  const auto rest = flags.canonical(seeds);
  meta.canonical_args.insert(meta.canonical_args.end(), rest.begin(), rest.end());
  meta.extra = {{"data", {{"generator", "boolean"}, {"n", n}, {"seed", data_seed}}}};
  return write_pipeline(flags.out, runs, data, normalization, flags.tol, meta, out);
}

void print_titanic_clusters(const RunSummary& run, const Dataset& data, std::ostream& out) {
  out << "cluster  fraction  pred+   survived  male&3rd  female&1st\n";
  for (std::size_t i = 0; i < run.clusters.size(); ++i) {
    const Cluster& c = run.clusters[i];
    std::size_t male3 = 0, female1 = 0;
    for (auto r : c.member_indices) {
      const bool female = data.features(r, 1) == 1.0;
      const double pclass = data.features(r, 2);
      male3 += !female && pclass == 3.0;
      female1 += female && pclass == 1.0;
    }
    const double size = static_cast<double>(c.stats.size);
    out << fmt::format("{:>7}{}  {:>8.3f}  {:>5.3f}  {:>8.3f}  {:>8.3f}  {:>10.3f}\n", i,
                       c.all_inactive() ? "*" : " ", c.stats.fraction,
                       c.stats.predicted_positive_rate, c.stats.target_positive_rate, male3 / size,
                       female1 / size);
  }
}

int cmd_titanic(const TrainFlags& flags, const fs::path& csv, double split_fraction,
                std::uint64_t split_seed, const std::string& analyze, std::ostream& out) {
  const auto seeds = flags.resolve_seeds();
  const TrainConfig config = flags.config();
  const Normalization normalization = parse_normalization(flags.normalization);
  if (analyze != "train" && analyze != "test" && analyze != "all") {
    throw InvalidInputError("--analyze must be train, test or all");
  }
  const Dataset all = load_titanic(csv);
  Dataset train_set = all;
  std::optional<Dataset> test_set;
  if (split_fraction < 1.0) {
    auto parts = split(all, split_fraction, split_seed);
    train_set = std::move(parts.first);
    test_set = std::move(parts.second);
  }
  if (analyze == "test" && !test_set) throw InvalidInputError("--analyze test needs --split < 1");
  const Dataset& analyzed = analyze == "test" ? *test_set : analyze == "all" ? all : train_set;

  const auto runs = run_sweep(train_set, analyzed, config, seeds, flags.tol);

  PipelineInputs meta;
  meta.command = "titanic";
  meta.canonical_args = {"titanic", "--csv", csv.string(), "--split", fmt::format("{}", split_fraction),
                         "--split-seed", std::to_string(split_seed), "--analyze", analyze};
  const auto rest = flags.canonical(seeds);
  meta.canonical_args.insert(meta.canonical_args.end(), rest.begin(), rest.end());
  meta.inputs.push_back({{"path", csv.string()}, {"sha256", sha256_file(csv)}});
  const int code = write_pipeline(flags.out, runs, analyzed, normalization, flags.tol, meta, out);

  const RunSummary& best = runs[best_run(runs)];
  out << fmt::format("titanic accuracy (train split): {:.4f}\n", best.train_accuracy);
  if (test_set) out << fmt::format("titanic accuracy (held-out): {:.4f}\n", accuracy(best.network, *test_set));
  print_titanic_clusters(best, analyzed, out);
  return code;
}

struct VerifyFlags {
  std::string net;
  std::string data;
  std::string clusters;
  std::string out;
  double tol = kDefaultAffineTolerance;
  double jacobian_tol = kDefaultJacobianTolerance;
  double step = kDefaultJacobianStep;
};

// Compares recorded cluster maps with the ones the network yields now.
json check_recorded_clusters(const Network& net, const Dataset& data, const fs::path& path,
                             double tol, bool& pass) {
  std::ifstream in(path);
  if (!in) throw InvalidInputError("cannot open " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw SchemaError(fmt::format("{}: {}", path.string(), e.what()));
  }
  if (!doc.is_array()) throw SchemaError(path.string() + ": expected a JSON array of clusters");

  const auto widths = net.hidden_widths();
  std::map<std::string, AffineMap> recorded;
  double max_map_err = 0.0;
  for (const auto& entry : doc) {
    try {
      const std::string key = entry.at("pattern").get<std::string>();
      const auto& omega = entry.at("omega");
      const auto& bias = entry.at("bias");
      AffineMap map{Eigen::MatrixXd(net.output_dim(), net.input_dim()), Eigen::VectorXd(net.output_dim())};
      if (omega.size() != net.output_dim() || bias.size() != net.output_dim()) {
        throw SchemaError(path.string() + ": cluster map has the wrong output dimension");
      }
      for (std::size_t r = 0; r < net.output_dim(); ++r) {
        if (omega[r].size() != net.input_dim()) {
          throw SchemaError(path.string() + ": cluster map has the wrong input dimension");
        }
        for (std::size_t c = 0; c < net.input_dim(); ++c) map.omega(r, c) = omega[r][c].get<double>();
        map.bias[r] = bias[r].get<double>();
      }
      const AffineMap now = effective_affine(net, ActivationPattern::from_key(key, widths));
      max_map_err = std::max({max_map_err, (now.omega - map.omega).cwiseAbs().maxCoeff(),
                              (now.bias - map.bias).cwiseAbs().maxCoeff()});
      recorded.emplace(key, std::move(map));
    } catch (const json::exception& e) {
      throw SchemaError(fmt::format("{}: {}", path.string(), e.what()));
    } catch (const InvalidInputError& e) {
      throw SchemaError(fmt::format("{}: {}", path.string(), e.what()));
    }
  }
  double max_row_err = 0.0;
  std::size_t matched = 0, unseen = 0;
  for (std::size_t i = 0; i < data.rows(); ++i) {
    const Eigen::VectorXd u = data.row(i);
    const ForwardTrace trace = forward_trace(net, u);
    auto it = recorded.find(trace.pattern.key());
    if (it == recorded.end()) {
      ++unseen;
      continue;
    }
    ++matched;
    max_row_err = std::max(max_row_err, (it->second.apply(u) - trace.logit).cwiseAbs().maxCoeff());
  }
  pass = max_map_err <= tol && max_row_err <= tol;
  return {{"clusters", recorded.size()}, {"max_map_err", max_map_err}, {"max_row_err", max_row_err},
          {"rows_matched", matched},    {"rows_unseen_pattern", unseen}, {"tol", tol},
          {"pass", pass}};
}

int cmd_verify(const VerifyFlags& flags, std::ostream& out) {
  if (!(flags.tol > 0.0)) throw InvalidInputError(fmt::format("--tol must be > 0, got {}", flags.tol));
  const Network net = load_network(flags.net);
  const Dataset data = read_csv(flags.data);
  if (data.dims() != net.input_dim()) {
    throw InvalidInputError(fmt::format("dataset has {} features, network expects {}", data.dims(),
                                        net.input_dim()));
  }
  const AffineVerifyReport affine = verify_affine(net, data.features, flags.tol);
  const JacobianSummary jac = jacobian_summary(net, data.features, flags.step, flags.jacobian_tol);
  json report{{"affine", affine_report_json(affine, flags.tol)}, {"jacobian", jacobian_json(jac)}};
  bool pass = affine.pass && jac.pass;

  json inputs = json::array({{{"path", flags.net}, {"sha256", sha256_file(flags.net)}},
                             {{"path", flags.data}, {"sha256", sha256_file(flags.data)}}});
  std::vector<std::string> args{"verify",          "--net",   flags.net,
                                "--data",          flags.data, "--tol",
                                fmt::format("{}", flags.tol), "--jacobian-tol",
                                fmt::format("{}", flags.jacobian_tol), "--step",
                                fmt::format("{}", flags.step)};
  if (!flags.clusters.empty()) {
    bool clusters_pass = false;
    report["recorded_clusters"] = check_recorded_clusters(net, data, flags.clusters, flags.tol, clusters_pass);
    pass = pass && clusters_pass;
    inputs.push_back({{"path", flags.clusters}, {"sha256", sha256_file(flags.clusters)}});
    args.push_back("--clusters");
    args.push_back(flags.clusters);
  }
  report["pass"] = pass;

  const fs::path out_dir = flags.out.empty() ? fs::path(flags.net).parent_path() / "verify" : fs::path(flags.out);
  fs::create_directories(out_dir);
  write_text(out_dir / kVerifyFile, report.dump(2) + "\n");
  const json manifest{{"tool", "relu_prism"}, {"version", RELU_PRISM_VERSION},
                      {"command", "verify"},  {"args", args},
                      {"inputs", inputs},     {"outputs", {kVerifyFile}}};
  write_text(out_dir / kManifestFile, manifest.dump(2) + "\n");

  out << report.dump(2) << "\n";
  out << (pass ? "verification passed\n" : "verification FAILED\n");
  return pass ? kExitOk : kExitVerificationFailed;
}

std::vector<std::string> replay_args(const fs::path& manifest_path, const std::string& out_override) {
  std::ifstream in(manifest_path);
  if (!in) throw InvalidInputError("cannot open " + manifest_path.string());
  json manifest;
  try {
    in >> manifest;
  } catch (const json::exception& e) {
    throw SchemaError(fmt::format("{}: {}", manifest_path.string(), e.what()));
  }
  if (!manifest.contains("args") || !manifest["args"].is_array()) {
    throw SchemaError(manifest_path.string() + ": manifest has no args");
  }
  for (const auto& input : manifest.value("inputs", json::array())) {
    const std::string path = input.at("path").get<std::string>();
    if (sha256_file(path) != input.at("sha256").get<std::string>()) {
      throw InvalidInputError(fmt::format("input {} changed since the manifest was written", path));
    }
  }
  auto args = manifest["args"].get<std::vector<std::string>>();
  const fs::path out_dir = out_override.empty() ? manifest_path.parent_path() : fs::path(out_override);
  args.push_back("--out");
  args.push_back(out_dir.string());
  return args;
}

}  // namespace

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInputError("cannot open " + path.string());
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 initialization failed");
  }
  std::vector<char> buf(1 << 16);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), digest, &len);
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", digest[i]);
  return hex;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Activation-pattern clustering and per-cluster affine explanations for ReLU networks",
               "relu_prism"};
  app.require_subcommand(1);

  TrainFlags sim_flags;
  std::size_t n = kDefaultBooleanSamples;
  std::uint64_t data_seed = 0;
  auto* simulate = app.add_subcommand("simulate", "Boolean simulation experiment");
  simulate->add_option("--n", n, "Number of samples")->capture_default_str();
  simulate->add_option("--data-seed", data_seed, "Seed of the generated dataset")->capture_default_str();
  sim_flags.add_to(simulate);

  TrainFlags tit_flags;
  std::string csv;
  double split_fraction = 1.0;
  std::uint64_t split_seed = 0;
  std::string analyze = "train";
  auto* titanic = app.add_subcommand("titanic", "Titanic experiment");
  titanic->add_option("--csv", csv, "Kaggle Titanic train.csv")->required()->check(CLI::ExistingFile);
  titanic->add_option("--split", split_fraction, "Training fraction; 1 trains on every row")
      ->capture_default_str();
  titanic->add_option("--split-seed", split_seed, "Seed of the train/held-out split")->capture_default_str();
  titanic->add_option("--analyze", analyze, "Rows to partition: train, test or all")->capture_default_str();
  tit_flags.add_to(titanic);

  VerifyFlags vflags;
  auto* verify = app.add_subcommand("verify", "Check affine exactness of a saved network on a dataset");
  verify->add_option("--net", vflags.net, "network.json")->required()->check(CLI::ExistingFile);
  verify->add_option("--data", vflags.data, "Dataset csv (features..., target)")->required()->check(CLI::ExistingFile);
  verify->add_option("--clusters", vflags.clusters, "clusters.json to cross-check")->check(CLI::ExistingFile);
  verify->add_option("--tol", vflags.tol, "Affine equivalence tolerance")->capture_default_str();
  verify->add_option("--jacobian-tol", vflags.jacobian_tol, "Jacobian tolerance")->capture_default_str();
  verify->add_option("--step", vflags.step, "Finite-difference step")->capture_default_str();
  verify->add_option("--out", vflags.out, "Output directory (default: <net dir>/verify)");

  std::string manifest_path, rerun_out;
  auto* rerun = app.add_subcommand("rerun", "Replay a command from its manifest.json");
  rerun->add_option("--manifest", manifest_path, "manifest.json")->required()->check(CLI::ExistingFile);
  rerun->add_option("--out", rerun_out, "Output directory (default: the manifest's directory)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInputError;
  }

  try {
    if (*simulate) return cmd_simulate(sim_flags, n, data_seed, out);
    if (*titanic) return cmd_titanic(tit_flags, csv, split_fraction, split_seed, analyze, out);
    if (*verify) return cmd_verify(vflags, out);
    if (*rerun) return run(replay_args(manifest_path, rerun_out), out, err);
  } catch (const TrainingDivergedError& e) {
    err << "error: " << e.what() << "\n";
    return kExitTrainingDiverged;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitInputError;
  }
  return kExitInputError;
}

}  // namespace relu_prism::cli
