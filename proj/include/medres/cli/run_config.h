#pragma once

#include <cstddef>
#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "medres/ingest/citation.h"
#include "medres/ingest/splits.h"
#include "medres/ingest/synthetic.h"
#include "medres/model/medres_model.h"
#include "medres/training/trainer.h"

namespace medres::cli {

// Input locations. `data` names a prepared directory holding graphs.json,
// train.jsonl, val.jsonl and test.jsonl; the individual entries override it.
struct PathsConfig {
  std::string data;
  std::string graphs;
  std::string train;
  std::string val;
  std::string test;
  std::string corpus;
  std::string vectors;
};

struct CitationPrepConfig {
  std::size_t vector_dim = 50;
  ingest::YearWindow train_window{2000, 2003};
  ingest::YearWindow test_window{2004, 2005};
  // First year of papers that can be recommended; 0 means the corpus minimum.
  int candidate_first = 0;
  double sample_rate = 1.0;
  std::size_t min_user = 20;
  std::size_t min_author = 20;
  double val_fraction = 0.1;
};

struct PrepareConfig {
  std::string source = "synthetic";  // synthetic | citation
  ingest::SyntheticConfig synthetic;
  ingest::SplitFractions fractions{0.5, 0.25, 0.25};
  CitationPrepConfig citation;
};

struct MetricsConfig {
  std::vector<std::size_t> ks{10};
  bool normalized = false;
  std::string tie_policy = "ge";
};

struct RunConfig {
  std::uint64_t seed = 1;
  PathsConfig paths;
  PrepareConfig prepare;
  MedresConfig model;
  TrainConfig train;
  MetricsConfig metrics;
};

// INI file: an optional top-level "seed", then [paths], [prepare],
// [model], [train] and [metrics] sections. Unknown sections or keys and
// unparsable values throw ConfigError. Relative paths resolve against the
// config file's directory.
RunConfig load_run_config(const std::string& path);
// Reads the same format from a stream; relative paths resolve against
// `base_dir`.
RunConfig parse_run_config(std::istream& in, const std::string& base_dir);
// Every field, defaults included, in the format load_run_config reads.
void write_run_config(const RunConfig& config, std::ostream& out);

}  // namespace medres::cli
