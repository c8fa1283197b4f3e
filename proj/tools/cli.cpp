#include "cli.hpp"

#include "debiaskit/debias.hpp"
#include "debiaskit/embedding_store.hpp"
#include "debiaskit/fair/rates.hpp"
#include "debiaskit/fair/synthetic.hpp"
#include "debiaskit/fair/train.hpp"
#include "debiaskit/lexicon.hpp"
#include "debiaskit/metrics.hpp"
#include "debiaskit/parallel.hpp"
#include "debiaskit/subspace.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <numbers>
#include <set>

namespace debiaskit::cli {

namespace {

using ojson = nlohmann::ordered_json;
namespace fs = std::filesystem;

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto comma = text.find(',', start);
    if (comma == std::string::npos) comma = text.size();
    std::string item = text.substr(start, comma - start);
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (!item.empty()) out.push_back(std::move(item));
    start = comma + 1;
  }
  return out;
}

std::vector<std::size_t> parse_components(const std::string& text) {
  std::vector<std::size_t> out;
  for (const auto& item : split_list(text)) {
    std::size_t value = 0;
    const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), value);
    if (ec != std::errc{} || ptr != item.data() + item.size() || value == 0) {
      throw ValidationError(fmt::format("--k expects positive integers, got '{}'", item));
    }
    out.push_back(value);
  }
  return out;
}

EmbeddingFormat resolve_format(const std::string& choice, const fs::path& path) {
  if (choice == "text") return EmbeddingFormat::text;
  if (choice == "binary") return EmbeddingFormat::binary;
  return format_from_path(path);
}

std::string_view format_name(EmbeddingFormat format) { return format == EmbeddingFormat::binary ? "binary" : "text"; }

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(fmt::format("cannot write '{}'", path.string()));
  out << text;
  if (!out) throw Error(fmt::format("failed while writing '{}'", path.string()));
}

void write_json(const fs::path& path, const ojson& doc) { write_text(path, doc.dump(2) + "\n"); }

void log_warnings(const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) spdlog::warn("{}", w);
}

// Every option of every subcommand, bound before parsing.
struct Options {
  // debias
  std::string mode = "single";
  std::string identities;
  std::string k;
  std::string in;
  std::string taxonomy;
  std::string out;
  std::string report;
  std::string in_format = "auto";
  std::string out_format = "auto";
  // audit
  std::vector<std::string> stores;
  std::string baseline;
  std::vector<std::string> evals;
  // analogies
  std::string a;
  std::string b;
  std::string pool;
  std::size_t n = 10;
  double delta = kDefaultAnalogyDelta;
  // gen-data
  std::string spec;
  std::uint64_t seed = 7;
  std::size_t size = 0;
  // train-fair
  std::string data;
  std::string eval_data;
  std::string train_mode = "joint";
  std::string trace;
  fair::ConstraintConfig constraints;
  fair::TrainHyperparams hyper;
  // replay
  std::string manifest;
};

RunRecord cmd_debias(const Options& o) {
  RunRecord record;
  const auto in_format = resolve_format(o.in_format, o.in);
  const auto out_format = resolve_format(o.out_format, o.out);
  DebiasPlan plan;
  plan.mode = parse_debias_mode(o.mode);
  plan.identities = split_list(o.identities);
  plan.components = parse_components(o.k);

  const IdentityTaxonomy taxonomy = load_taxonomy(o.taxonomy);
  record.input("taxonomy", o.taxonomy);
  const EmbeddingStore store = load_embeddings(o.in, in_format);
  record.input("embeddings", o.in);
  spdlog::info("loaded {} words, d = {}", store.size(), store.dim());

  const DebiasResult result = hard_debias(store, taxonomy, plan);
  log_warnings(result.report.warnings);
  for (const auto& c : result.report.conflicts) {
    spdlog::warn("'{}' is equalized for {} but neutral for {}", c.word, c.equalized_for, c.neutral_for);
  }
  save_embeddings(result.store, o.out, out_format);
  record.output("embeddings", o.out);
  write_json(o.report, to_json(result.report, result.store));
  record.output("report", o.report);

  std::vector<std::size_t> components;
  for (std::size_t i = 0; i < plan.identities.size(); ++i) components.push_back(plan.components_for(i));
  record.config = {{"mode", to_string(plan.mode)},
                   {"identities", plan.identities},
                   {"k", components},
                   {"in_format", format_name(in_format)},
                   {"out_format", format_name(out_format)}};
  record.primary_output = o.out;
  for (const auto& pass : result.report.passes) {
    spdlog::info("pass over {}: rank {}, {} neutralized, {} equalized, {} degenerate", fmt::join(pass.identities, "+"),
                 pass.basis_rank, pass.neutralized, pass.equalized, pass.skipped_degenerate);
  }
  return record;
}

std::string store_name(const fs::path& path, std::set<std::string>& taken) {
  std::string name = path.filename().string();
  if (taken.contains(name)) name = path.string();
  for (int i = 2; taken.contains(name); ++i) name = fmt::format("{}#{}", path.string(), i);
  taken.insert(name);
  return name;
}

RunRecord cmd_audit(const Options& o) {
  RunRecord record;
  std::vector<std::string> paths;
  if (!o.baseline.empty()) paths.push_back(o.baseline);
  paths.insert(paths.end(), o.stores.begin(), o.stores.end());
  if (paths.size() < 2) throw ValidationError("audit needs a baseline and at least one more store");

  std::vector<EvalSpec> evals;
  for (const auto& path : o.evals) {
    evals.push_back(load_eval_spec(path));
    record.input("eval", path);
  }
  std::vector<EmbeddingStore> stores;
  std::vector<NamedStore> named;
  std::set<std::string> taken;
  stores.reserve(paths.size());
  for (const auto& path : paths) {
    stores.push_back(load_embeddings(path));
    record.input(named.empty() ? "baseline" : "embeddings", path);
    named.push_back({store_name(path, taken), nullptr});
  }
  for (std::size_t i = 0; i < stores.size(); ++i) named[i].store = &stores[i];

  const CompareReport report = compare_report(named, evals);
  log_warnings(report.warnings);
  write_compare_report(report, o.out);
  record.output("report", o.out);
  for (const auto& row : report.rows) {
    spdlog::info("{} / {}: MAC {:.6f}, p = {:.3g}", row.store, row.identity, row.mac, row.test.p_value);
  }

  std::vector<std::string> names;
  for (const auto& s : named) names.push_back(s.name);
  std::vector<std::string> identities;
  for (const auto& e : evals) identities.push_back(e.identity);
  record.config = {{"stores", names}, {"baseline", names.front()}, {"identities", identities}};
  record.primary_output = o.out;
  return record;
}

RunRecord cmd_inspect(const Options& o) {
  RunRecord record;
  const IdentityTaxonomy taxonomy = load_taxonomy(o.taxonomy);
  record.input("taxonomy", o.taxonomy);
  const EmbeddingStore store = load_embeddings(o.in, resolve_format(o.in_format, o.in));
  record.input("embeddings", o.in);

  std::vector<std::string> names = split_list(o.identities);
  if (names.empty()) {
    for (const auto& identity : taxonomy.identities) names.push_back(identity.name);
  }
  DebiasPlan plan;
  plan.identities = names;
  plan.components = parse_components(o.k);

  std::vector<BiasSubspace> subspaces;
  ojson doc;
  ojson list = ojson::array();
  for (std::size_t i = 0; i < names.size(); ++i) {
    subspaces.push_back(identify_subspace(store, taxonomy.find(names[i]), plan.components_for(i)));
    for (const auto& word : subspaces.back().missing_words) spdlog::warn("{}: '{}' not in vocabulary", names[i], word);
    list.push_back(to_json(subspaces.back()));
  }
  doc["subspaces"] = std::move(list);
  ojson angles = ojson::array();
  for (std::size_t i = 0; i < subspaces.size(); ++i) {
    for (std::size_t j = i + 1; j < subspaces.size(); ++j) {
      const auto radians = principal_angles(subspaces[i], subspaces[j]);
      std::vector<double> degrees;
      for (double r : radians) degrees.push_back(r * 180.0 / std::numbers::pi);
      angles.push_back({{"a", names[i]}, {"b", names[j]}, {"radians", radians}, {"degrees", degrees}});
      spdlog::info("{} vs {}: smallest principal angle {:.3f} degrees", names[i], names[j],
                   degrees.empty() ? 0.0 : degrees.front());
    }
  }
  doc["principal_angles"] = std::move(angles);
  const JointSubspace joint = join_subspaces(subspaces);
  doc["joint_rank"] = joint.rank();
  write_json(o.out, doc);
  record.output("subspaces", o.out);

  std::vector<std::size_t> components;
  for (std::size_t i = 0; i < names.size(); ++i) components.push_back(plan.components_for(i));
  record.config = {{"identities", names}, {"k", components}};
  record.primary_output = o.out;
  return record;
}

std::vector<std::string> read_word_list(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(fmt::format("cannot open word list '{}'", path.string()));
  std::vector<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    line.erase(0, line.find_first_not_of(" \t\r"));
    line.erase(line.find_last_not_of(" \t\r") + 1);
    if (!line.empty()) words.push_back(line);
  }
  return words;
}

RunRecord cmd_analogies(const Options& o) {
  RunRecord record;
  const EmbeddingStore store = load_embeddings(o.in, resolve_format(o.in_format, o.in));
  record.input("embeddings", o.in);
  const std::vector<std::string> pool = read_word_list(o.pool);
  record.input("pool", o.pool);
  if (!(o.delta > 0.0)) throw ValidationError("--delta must be positive");

  const auto ranked = top_analogies(store, o.a, o.b, pool, o.n, o.delta);
  std::string csv = "rank,a,x,b,y,score\n";
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    csv += fmt::format("{},{},{},{},{},{:.17g}\n", i + 1, o.a, ranked[i].x, o.b, ranked[i].y, ranked[i].score);
    spdlog::info("{}:{} :: {}:{}  ({:.4f})", o.a, ranked[i].x, o.b, ranked[i].y, ranked[i].score);
  }
  if (ranked.size() < o.n) spdlog::warn("only {} pairs satisfy the distance bound {}", ranked.size(), o.delta);
  write_text(o.out, csv);
  record.output("analogies", o.out);
  record.config = {{"a", o.a}, {"b", o.b}, {"n", o.n}, {"delta", o.delta}};
  record.primary_output = o.out;
  return record;
}

RunRecord cmd_gen_data(const Options& o) {
  RunRecord record;
  fair::SyntheticSpec spec = fair::load_synthetic_spec(o.spec);
  record.input("spec", o.spec);
  if (o.size > 0) spec.size = o.size;
  const fair::LabeledDataset data = fair::generate_synthetic(spec, o.seed);
  fair::write_dataset_csv(data, o.out);
  record.output("dataset", o.out);
  std::size_t positives = std::count(data.labels().begin(), data.labels().end(), std::uint8_t{1});
  spdlog::info("{} rows, {} toxic ({:.4f})", data.size(), positives,
               static_cast<double>(positives) / static_cast<double>(data.size()));
  record.config = {{"seed", o.seed}, {"spec", to_json(spec)}};
  record.primary_output = o.out;
  return record;
}

RunRecord cmd_train_fair(const Options& o) {
  RunRecord record;
  fair::ConstraintConfig config = o.constraints;
  config.mode = fair::parse_constraint_mode(o.train_mode);
  const fair::LabeledDataset data = fair::read_dataset_csv(o.data);
  record.input("data", o.data);
  std::optional<fair::LabeledDataset> held_out;
  if (!o.eval_data.empty()) {
    held_out = fair::read_dataset_csv(o.eval_data);
    record.input("eval_data", o.eval_data);
  }

  const fair::TrainResult result = fair::train_constrained(data, config, o.hyper);
  // The trace goes out first so it survives a failure further down.
  fair::write_trace_csv(result.trace, o.trace);
  record.output("trace", o.trace);
  if (result.diverged) spdlog::warn("training diverged; returning parameters from epoch {}", result.returned_epoch);
  if (result.unsatisfiable) {
    spdlog::warn("constraints stopped improving; returning the least-violating parameters (epoch {})",
                 result.returned_epoch);
  }

  ojson doc;
  ojson cfg = {{"mode", to_string(config.mode)},
               {"tau_fnr", config.tau_fnr},
               {"tau_fpr", config.tau_fpr},
               {"identities", config.identities},
               {"learning_rate", o.hyper.learning_rate},
               {"epochs", o.hyper.epochs},
               {"batch_size", o.hyper.batch_size},
               {"penalty_step", o.hyper.penalty_step},
               {"penalty_weight", o.hyper.penalty_weight},
               {"temperature", o.hyper.temperature},
               {"patience", o.hyper.patience},
               {"seed", o.hyper.seed},
               {"threshold", o.hyper.threshold}};
  doc["config"] = cfg;
  doc["training"] = to_json(result);
  const fair::BiasReport train_report = fair::evaluate(result.params.scores(data), data, result.params.threshold);
  log_warnings(train_report.warnings);
  doc["train_metrics"] = to_json(train_report);
  const auto joint = fair::joint_bias(train_report);
  spdlog::info("train: accuracy {:.4f}, F1 {:.4f}, joint bias {:.4f} (FNED_J {:.4f}, FPED_J {:.4f})",
               train_report.accuracy, train_report.f1, joint.total, joint.fned_j, joint.fped_j);
  if (held_out) {
    const fair::BiasReport eval_report =
        fair::evaluate(result.params.scores(*held_out), *held_out, result.params.threshold);
    log_warnings(eval_report.warnings);
    doc["eval_metrics"] = to_json(eval_report);
  }
  write_json(o.report, doc);
  record.output("report", o.report);
  record.config = std::move(cfg);
  record.primary_output = o.report;
  return record;
}

int cmd_replay(const Options& o) {
  const nlohmann::json manifest = read_json_file(o.manifest);
  if (manifest.value("tool", "") != kToolName) throw FormatError(fmt::format("'{}' is not a {} manifest", o.manifest, kToolName));
  if (manifest.value("version", "") != kToolVersion) {
    spdlog::warn("manifest written by version {}, replaying with {}", manifest.value("version", "?"), kToolVersion);
  }
  const fs::path original_cwd = fs::current_path();
  const std::string directory = manifest.value("working_directory", "");
  if (!directory.empty()) fs::current_path(directory);

  int status = 0;
  try {
    for (const auto& input : manifest.at("inputs")) {
      const std::string path = input.at("path");
      const std::string digest = sha256_file(path);
      if (digest != input.at("sha256").get<std::string>()) {
        throw ValidationError(fmt::format("input '{}' changed since the recorded run", path));
      }
    }
    const auto args = manifest.at("args").get<std::vector<std::string>>();
    const Outcome outcome = execute(args);
    if (outcome.exit_code != 0 || !outcome.record) throw Error("replayed command failed");
    const auto& recorded = manifest.at("outputs");
    if (recorded.size() != outcome.record->outputs.size()) throw ValidationError("replay produced a different set of outputs");
    std::size_t mismatches = 0;
    for (std::size_t i = 0; i < recorded.size(); ++i) {
      const auto& now = outcome.record->outputs[i];
      if (recorded[i].at("path").get<std::string>() != now.path || recorded[i].at("sha256").get<std::string>() != now.sha256) {
        spdlog::error("output '{}' differs from the recorded run", now.path);
        ++mismatches;
      }
    }
    if (mismatches > 0) {
      status = 1;
    } else {
      spdlog::info("replay matched {} output(s)", recorded.size());
    }
  } catch (...) {
    fs::current_path(original_cwd);
    throw;
  }
  fs::current_path(original_cwd);
  return status;
}

void add_format_options(CLI::App* sub, Options& o, bool with_output) {
  sub->add_option("--in-format", o.in_format, "Input embedding format")
      ->check(CLI::IsMember({"auto", "text", "binary"}))
      ->capture_default_str();
  if (with_output) {
    sub->add_option("--out-format", o.out_format, "Output embedding format")
        ->check(CLI::IsMember({"auto", "text", "binary"}))
        ->capture_default_str();
  }
}

}  // namespace

Outcome execute(const std::vector<std::string>& args) {
  CLI::App app{"Joint bias mitigation for word embeddings and classifiers", kToolName};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);
  std::string log_level = "info";
  app.add_option("--log-level", log_level, "trace, debug, info, warn, error or off")
      ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error", "off"}))
      ->capture_default_str();

  Options o;
  std::function<RunRecord(const Options&)> action;

  auto* debias = app.add_subcommand("debias", "Hard-debias an embedding store");
  debias->add_option("--mode", o.mode, "single, sequential or joint")
      ->check(CLI::IsMember({"single", "sequential", "joint"}))
      ->capture_default_str();
  debias->add_option("--identities", o.identities, "Comma-separated identity names")->required();
  debias->add_option("--k", o.k, "Components per identity (one value or one per identity)");
  debias->add_option("--in", o.in, "Input embeddings")->required();
  debias->add_option("--taxonomy", o.taxonomy, "Identity taxonomy JSON")->required();
  debias->add_option("--out", o.out, "Debiased embeddings")->required();
  debias->add_option("--report", o.report, "Report JSON")->required();
  add_format_options(debias, o, true);
  debias->callback([&] { action = cmd_debias; });

  auto* audit = app.add_subcommand("audit", "MAC and paired t-tests across embedding stores");
  audit->add_option("--in", o.stores, "Embedding store to compare (repeatable)")->required();
  audit->add_option("--baseline", o.baseline, "Reference store; defaults to the first --in");
  audit->add_option("--eval", o.evals, "Evaluation JSON (repeatable)")->required();
  audit->add_option("--out", o.out, "Report path (.csv or .json)")->required();
  audit->callback([&] { action = cmd_audit; });

  auto* inspect = app.add_subcommand("inspect-subspace", "Export bias subspaces and their principal angles");
  inspect->add_option("--in", o.in, "Input embeddings")->required();
  inspect->add_option("--taxonomy", o.taxonomy, "Identity taxonomy JSON")->required();
  inspect->add_option("--identities", o.identities, "Comma-separated identity names (default: all)");
  inspect->add_option("--k", o.k, "Components per identity");
  inspect->add_option("--out", o.out, "Subspace JSON")->required();
  add_format_options(inspect, o, false);
  inspect->callback([&] { action = cmd_inspect; });

  auto* analogies = app.add_subcommand("analogies", "Rank analogy pairs a:x :: b:y from a candidate pool");
  analogies->add_option("--in", o.in, "Input embeddings")->required();
  analogies->add_option("--a", o.a, "First seed word")->required();
  analogies->add_option("--b", o.b, "Second seed word")->required();
  analogies->add_option("--pool", o.pool, "Candidate words, one per line")->required();
  analogies->add_option("--n", o.n, "Number of pairs")->capture_default_str();
  analogies->add_option("--delta", o.delta, "Maximum |x - y|")->capture_default_str();
  analogies->add_option("--out", o.out, "Output CSV")->required();
  add_format_options(analogies, o, false);
  analogies->callback([&] { action = cmd_analogies; });

  auto* gen = app.add_subcommand("gen-data", "Generate a synthetic identity-annotated dataset");
  gen->add_option("--spec", o.spec, "Generator spec JSON")->required();
  gen->add_option("--out", o.out, "Dataset CSV")->required();
  gen->add_option("--seed", o.seed, "Random seed")->capture_default_str();
  gen->add_option("--size", o.size, "Row count, overriding the generator file");
  gen->callback([&] { action = cmd_gen_data; });

  auto* train = app.add_subcommand("train-fair", "Train a classifier under FNR/FPR deviation constraints");
  train->add_option("--data", o.data, "Training CSV")->required();
  train->add_option("--eval-data", o.eval_data, "Held-out CSV to report on");
  train->add_option("--mode", o.train_mode, "none, uniform or joint")
      ->check(CLI::IsMember({"none", "uniform", "joint"}))
      ->capture_default_str();
  train->add_option("--tau-fnr", o.constraints.tau_fnr, "FNR deviation tolerance")->capture_default_str();
  train->add_option("--tau-fpr", o.constraints.tau_fpr, "FPR deviation tolerance")->capture_default_str();
  train->add_option("--constrain", o.constraints.identities, "Identities to constrain (default: all)")->delimiter(',');
  train->add_option("--epochs", o.hyper.epochs)->capture_default_str();
  train->add_option("--lr", o.hyper.learning_rate)->capture_default_str();
  train->add_option("--batch-size", o.hyper.batch_size)->capture_default_str();
  train->add_option("--penalty-step", o.hyper.penalty_step, "Dual ascent rate")->capture_default_str();
  train->add_option("--penalty-weight", o.hyper.penalty_weight, "Quadratic penalty weight")->capture_default_str();
  train->add_option("--temperature", o.hyper.temperature, "Sigmoid surrogate sharpness")->capture_default_str();
  train->add_option("--patience", o.hyper.patience)->capture_default_str();
  train->add_option("--threshold", o.hyper.threshold)->capture_default_str();
  train->add_option("--seed", o.hyper.seed)->capture_default_str();
  train->add_option("--trace", o.trace, "Per-epoch trace CSV")->required();
  train->add_option("--report", o.report, "Report JSON")->required();
  train->callback([&] { action = cmd_train_fair; });

  bool replaying = false;
  auto* replay = app.add_subcommand("replay", "Re-run a command from its manifest and compare outputs");
  replay->add_option("--manifest", o.manifest, "Manifest JSON")->required();
  replay->callback([&] { replaying = true; });

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return {app.exit(e), std::nullopt};
  }
  spdlog::set_level(spdlog::level::from_str(log_level));

  try {
    if (replaying) return {cmd_replay(o), std::nullopt};
    RunRecord record = action(o);
    record.command = app.get_subcommands().front()->get_name();
    record.args = args;
    record.config["threads"] = worker_count();
    const auto manifest = write_manifest(record);
    spdlog::debug("manifest written to {}", manifest.string());
    return {0, std::move(record)};
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return {1, std::nullopt};
  }
}

}  // namespace debiaskit::cli
