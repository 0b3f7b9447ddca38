#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>

#include "CLI11.hpp"
#include "medres/cli/cli.h"
#include "medres/cli/run_config.h"
#include "medres/errors.h"
#include "medres/ingest/files.h"
#include "medres/metrics/report.h"
#include "medres/model/checkpoint.h"

namespace medres::cli {

namespace fs = std::filesystem;

namespace {

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out = "out";
  std::string data;
  std::string mode;
  std::string checkpoint;
  std::string split = "test";
  std::string dataset;
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt_opt(const std::optional<double>& v) { return v ? fmt(*v) : "undefined"; }

// --seed, then MEDRES_SEED, then the config file.
RunConfig effective_config(const Options& o) {
  RunConfig c = o.config.empty() ? RunConfig{} : load_run_config(o.config);
  if (o.seed) {
    c.seed = *o.seed;
  } else if (const char* env = std::getenv("MEDRES_SEED"); env && *env) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (*end != '\0') throw ConfigError(std::string("MEDRES_SEED is not an integer: ") + env);
    c.seed = v;
  }
  c.train.seed = c.seed;
  c.prepare.synthetic.seed = c.seed;
  if (!o.data.empty()) c.paths.data = fs::absolute(o.data).string();
  if (!o.mode.empty()) c.model.mode = parse_mode(o.mode);
  return c;
}

std::string data_file(const RunConfig& c, const std::string& explicit_path,
                      const std::string& name) {
  if (!explicit_path.empty()) return explicit_path;
  if (c.paths.data.empty()) return "";
  return (fs::path(c.paths.data) / name).string();
}

std::string require_path(const std::string& path, const std::string& what) {
  if (path.empty()) throw ConfigError("no path configured for " + what);
  if (!fs::exists(path)) throw ConfigError(what + " not found: " + path);
  return path;
}

ingest::GraphBundle load_graphs(const RunConfig& c) {
  auto b = ingest::load_manifest(
      require_path(data_file(c, c.paths.graphs, "graphs.json"), "graph manifest"));
  if (!b.has_schema) throw DataError("graph manifest has no dataset schema");
  return b;
}

void write_effective_config(const RunConfig& c, const fs::path& out_dir) {
  std::ofstream f(out_dir / "effective_config.ini");
  write_run_config(c, f);
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream f(path);
  if (!f) throw DataError(path.string(), 0, "cannot open for writing");
  return f;
}

int cmd_prepare(const Options& o, std::ostream& out) {
  RunConfig c = effective_config(o);
  const fs::path dir(o.out);
  fs::create_directories(dir);
  GraphSet graphs;
  ingest::DataSplits splits;
  if (c.prepare.source == "synthetic") {
    auto syn = ingest::synthesize(c.prepare.synthetic);
    splits = ingest::split_by_user(syn.data, c.prepare.fractions, c.seed + 1);
    graphs = std::move(syn.graphs);
  } else {
    const auto& cc = c.prepare.citation;
    const auto corpus = ingest::parse_citation_corpus(require_path(c.paths.corpus, "corpus"));
    ingest::WordVectors vectors;
    if (!c.paths.vectors.empty()) {
      std::vector<std::string> warnings;
      vectors = ingest::load_word_vectors(require_path(c.paths.vectors, "word vectors"),
                                          cc.vector_dim, &warnings);
      for (const auto& w : warnings) out << "warning: " << w << '\n';
    }
    int first_year = cc.candidate_first;
    if (first_year == 0 && !corpus.records.empty()) {
      first_year = corpus.records.front().year;
      for (const auto& r : corpus.records) first_year = std::min(first_year, r.year);
    }
    auto cg = ingest::build_citation_graphs(corpus.records, cc.train_window);
    Dataset train = ingest::generate_labeled_pairs(
        corpus.records, cg, cc.train_window, {first_year, cc.train_window.last}, vectors);
    Dataset test = ingest::generate_labeled_pairs(
        corpus.records, cg, cc.test_window, {first_year, cc.test_window.last}, vectors);
    if (cc.sample_rate < 1.0) {
      train = ingest::sample_rows(train, cc.sample_rate, c.seed + 2);
      test = ingest::sample_rows(test, cc.sample_rate, c.seed + 3);
    }
    train = ingest::filter_min_examples(
        train, {{true, 0, cc.min_user}, {false, 0, cc.min_author}});
    test = ingest::drop_unseen(test, train);
    auto tv = ingest::split_by_user(train, {1.0 - cc.val_fraction, cc.val_fraction, 0.0},
                                    c.seed + 1);
    splits = {std::move(tv.train), std::move(tv.val), std::move(test)};
    graphs = std::move(cg.graphs);
    out << "corpus records: " << corpus.records.size()
        << ", dangling references: " << corpus.dangling.size() << '\n';
  }
  ingest::write_manifest(dir.string(), graphs, splits.train.schema());
  const auto& cat = graphs.catalog();
  ingest::write_dataset_jsonl(splits.train, cat, (dir / "train.jsonl").string());
  ingest::write_dataset_jsonl(splits.val, cat, (dir / "val.jsonl").string());
  ingest::write_dataset_jsonl(splits.test, cat, (dir / "test.jsonl").string());
  c.paths.data = fs::absolute(dir).string();
  write_effective_config(c, dir);
  out << "graphs: " << graphs.graphs().size() << ", rows train/val/test: "
      << splits.train.size() << "/" << splits.val.size() << "/" << splits.test.size()
      << '\n';
  return kExitOk;
}

int cmd_train(const Options& o, std::ostream& out) {
  const RunConfig c = effective_config(o);
  const auto bundle = load_graphs(c);
  const auto& cat = bundle.graphs.catalog();
  const Dataset train = ingest::load_dataset_jsonl(
      require_path(data_file(c, c.paths.train, "train.jsonl"), "training data"), cat,
      bundle.schema);
  std::optional<Dataset> val;
  if (const auto vp = data_file(c, c.paths.val, "val.jsonl"); !vp.empty() && fs::exists(vp)) {
    val = ingest::load_dataset_jsonl(vp, cat, bundle.schema);
    if (val->empty()) val.reset();
  }
  const auto violations = validate(bundle.graphs, &train);
  if (!violations.empty()) {
    throw DataError(violations.front().location + ": " + violations.front().message);
  }

  const MedresModel model(bundle.graphs, bundle.schema, c.model);
  ParameterStore params;
  model.init_parameters(params, c.seed);
  const fs::path dir(o.out);
  fs::create_directories(dir);
  const FitResult fr = fit(model, std::move(params), train, val ? &*val : nullptr, c.train,
                           [&](const HistoryRow& r) {
                             out << "iteration " << r.iteration << ": loss " << fmt(r.loss)
                                 << ", train micro-pAp@" << c.train.k << " "
                                 << fmt_opt(r.train_micro_papk) << ", val "
                                 << fmt_opt(r.val_micro_papk) << '\n';
                           });

  Checkpoint ckpt{c.model, bundle.schema, graph_set_digest(bundle.graphs), fr.best, {}};
  ckpt.metadata["best_iteration"] = std::to_string(fr.best_iteration);
  ckpt.metadata["seed"] = std::to_string(c.seed);
  save_checkpoint((dir / "checkpoint.bin").string(), ckpt);
  {
    auto f = open_output(dir / "history.csv");
    write_history_csv(fr.history, f);
  }
  write_effective_config(c, dir);

  const Dataset& report_on = val ? *val : train;
  const auto scores = model.batch_score(fr.best, report_on);
  for (std::size_t k : c.metrics.ks) {
    const auto v = metrics::micro_papk(user_instances(report_on, scores, k));
    out << (val ? "val" : "train") << " micro-pAp@" << k << " = " << fmt_opt(v) << '\n';
  }
  out << "best iteration " << fr.best_iteration << "; wrote " << (dir / "checkpoint.bin").string()
      << '\n';
  return kExitOk;
}

struct LoadedModel {
  ingest::GraphBundle bundle;
  Checkpoint ckpt;
  std::unique_ptr<MedresModel> model;
};

LoadedModel load_model(const RunConfig& c, const Options& o) {
  LoadedModel lm;
  lm.bundle = load_graphs(c);
  const std::string path =
      o.checkpoint.empty() ? (fs::path(o.out) / "checkpoint.bin").string() : o.checkpoint;
  lm.ckpt = load_checkpoint(require_path(path, "checkpoint"));
  const std::string digest = graph_set_digest(lm.bundle.graphs);
  if (digest != lm.ckpt.digest) {
    throw DigestMismatchError("checkpoint was trained on graph set " + lm.ckpt.digest +
                              ", loaded graph set is " + digest);
  }
  lm.model = std::make_unique<MedresModel>(lm.bundle.graphs, lm.ckpt.schema, lm.ckpt.config);
  ParameterStore expected;
  lm.model->init_parameters(expected, 0);
  for (const auto& [name, entry] : expected.entries()) {
    if (!lm.ckpt.params.contains(name) ||
        !lm.ckpt.params.get(name).same_shape(entry.value)) {
      throw DataError(path, 0, "parameter " + name + " missing or misshapen");
    }
  }
  if (expected.size() != lm.ckpt.params.size()) {
    throw DataError(path, 0, "checkpoint holds parameters the model does not use");
  }
  return lm;
}

Dataset load_split(const RunConfig& c, const Options& o, const LoadedModel& lm) {
  std::string path = o.dataset;
  if (path.empty()) {
    if (o.split != "train" && o.split != "val" && o.split != "test") {
      throw ConfigError("--split must be train, val or test");
    }
    const std::string& explicit_path =
        o.split == "train" ? c.paths.train : (o.split == "val" ? c.paths.val : c.paths.test);
    path = data_file(c, explicit_path, o.split + ".jsonl");
  }
  return ingest::load_dataset_jsonl(require_path(path, "dataset"),
                                    lm.bundle.graphs.catalog(), lm.ckpt.schema);
}

int cmd_eval(const Options& o, std::ostream& out) {
  const RunConfig c = effective_config(o);
  const LoadedModel lm = load_model(c, o);
  const Dataset data = load_split(c, o, lm);
  if (data.empty()) throw DataError("evaluation dataset is empty");
  const auto scores = lm.model->batch_score(lm.ckpt.params, data);
  const fs::path dir(o.out);
  fs::create_directories(dir);
  const auto denom = c.metrics.normalized ? metrics::Denominator::kNormalized
                                          : metrics::Denominator::kLiteral;
  for (std::size_t k : c.metrics.ks) {
    std::vector<std::string> keys;
    const auto inst = user_instances(data, scores, k, &keys);
    const auto report = metrics::evaluate(keys, inst, denom);
    {
      auto f = open_output(dir / ("metrics_k" + std::to_string(k) + ".json"));
      f << metrics::report_json(report);
    }
    {
      auto f = open_output(dir / ("per_user_k" + std::to_string(k) + ".csv"));
      metrics::write_per_user_csv(report, f);
    }
    out << "k=" << k << ": micro-pAp " << fmt_opt(report.micro_papk) << ", macro-pAp "
        << fmt_opt(report.macro_papk) << ", pAUC " << fmt_opt(report.pauc) << ", prec "
        << fmt_opt(report.prec_at_k) << ", AUC " << fmt_opt(report.auc) << " ("
        << report.users - report.skipped << " users, " << report.skipped << " skipped)\n";
  }
  return kExitOk;
}

int cmd_score(const Options& o, std::ostream& out) {
  const RunConfig c = effective_config(o);
  const LoadedModel lm = load_model(c, o);
  const Dataset data = load_split(c, o, lm);
  const auto scores = lm.model->batch_score(lm.ckpt.params, data);
  const fs::path dir(o.out);
  fs::create_directories(dir);
  auto f = open_output(dir / "scores.tsv");
  f << "user_key\titem_ref\tscore\n";
  for (std::size_t i = 0; i < data.size(); ++i) {
    f << data[i].user_key << '\t' << data[i].item_ref << '\t' << fmt(scores[i]) << '\n';
  }
  out << "scored " << data.size() << " rows into " << (dir / "scores.tsv").string() << '\n';
  return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multi-entity graph recommender: prepare data, train, evaluate, score"};
  app.name("medres");
  app.require_subcommand(1);
  Options o;
  std::uint64_t seed = 0;
  app.add_option("--config", o.config, "INI configuration file");
  auto* seed_opt = app.add_option("--seed", seed, "Overrides MEDRES_SEED and the config seed");
  app.add_option("--out", o.out, "Output directory")->capture_default_str();

  auto* prepare = app.add_subcommand("prepare", "Build graph and dataset files");
  auto* train = app.add_subcommand("train", "Train a model and write checkpoint.bin");
  auto* eval = app.add_subcommand("eval", "Write metric reports for a checkpoint");
  auto* score = app.add_subcommand("score", "Write per-row scores for a checkpoint");
  for (auto* sub : {prepare, train, eval, score}) sub->fallthrough();
  for (auto* sub : {train, eval, score}) {
    sub->add_option("--data", o.data, "Prepared data directory");
  }
  train->add_option("--mode", o.mode, "medres or collab");
  for (auto* sub : {eval, score}) {
    sub->add_option("--checkpoint", o.checkpoint, "Checkpoint (default <out>/checkpoint.bin)");
    sub->add_option("--split", o.split, "train, val or test")->capture_default_str();
    sub->add_option("--dataset", o.dataset, "JSON-lines dataset instead of a split");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }
  if (seed_opt->count() > 0) o.seed = seed;

  try {
    if (prepare->parsed()) return cmd_prepare(o, out);
    if (train->parsed()) return cmd_train(o, out);
    if (eval->parsed()) return cmd_eval(o, out);
    return cmd_score(o, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const DivergenceError& e) {
    err << "training diverged: " << e.what() << '\n';
    return kExitDivergence;
  } catch (const DigestMismatchError& e) {
    err << "digest mismatch: " << e.what() << '\n';
    return kExitDigest;
  } catch (const DimensionError& e) {
    err << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace medres::cli
