#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "medres/embedding/blocks.h"
#include "medres/entitygraph/dataset.h"

namespace medres {

enum class ModelMode { kMedres, kCollab };
enum class EncoderKind { kAlgcn, kGcn };

struct MedresConfig {
  ModelMode mode = ModelMode::kMedres;
  EncoderKind encoder = EncoderKind::kAlgcn;
  std::size_t layers = 2;
  // Output width of each graph convolution (per branch for AL-GCN).
  std::size_t conv_width = 64;
  // Emb-merge output width, which is also the width of every slot.
  std::size_t merge_width = 64;
  std::size_t transforms = 2;
  bool per_branch_weights = false;
  // Symmetric degree normalization in the plain GCN encoder.
  bool normalize = false;
  std::size_t hidden1 = 256;
  std::size_t hidden2 = 128;
  bool scorer_bias = true;

  friend bool operator==(const MedresConfig&, const MedresConfig&) = default;
};

std::string to_string(ModelMode mode);
std::string to_string(EncoderKind kind);
// Throw ConfigError on unknown names.
ModelMode parse_mode(const std::string& s);
EncoderKind parse_encoder(const std::string& s);

enum class Side { kUser, kItem };

// One embedding slot of the representation: the merged embedding of
// `entity_type` within type pair `pair_index` (GraphSet::pairs() order).
struct Slot {
  std::size_t pair_index = 0;
  std::size_t entity_type = 0;
  std::size_t width = 0;
};

// Entity embeddings for one forward pass, one table per slot.
struct SlotTables {
  std::vector<Var> tables;
};

class MedresModel {
 public:
  // Keeps a reference to `graphs`, which must outlive the model.
  MedresModel(const GraphSet& graphs, DatasetSchema schema, MedresConfig config);
  ~MedresModel();
  MedresModel(MedresModel&&) noexcept;

  // Registers every parameter with a deterministic draw order.
  void init_parameters(ParameterStore& store, std::uint64_t seed) const;

  SlotTables embed(Tape& tape, const ParameterStore& store) const;
  // Phi for the given rows: slot embeddings in slot order (zeros where the
  // side has no entity of the slot's type), then the dynamic vector.
  Var represent(Tape& tape, const SlotTables& tables, const Dataset& data,
                const std::vector<std::size_t>& rows, Side side) const;
  // Relevance in (0, 1) for the given rows, rows x 1.
  Var score_rows(Tape& tape, const ParameterStore& store, const SlotTables& tables,
                 const Dataset& data, const std::vector<std::size_t>& rows) const;
  Var score_rows(Tape& tape, const ParameterStore& store, const Dataset& data,
                 const std::vector<std::size_t>& rows) const;

  // Scores in dataset order; entity embeddings are computed once.
  std::vector<double> batch_score(const ParameterStore& store, const Dataset& data) const;
  double score(const ParameterStore& store, const LabeledExample& example) const;

  const std::vector<Slot>& slots() const { return slots_; }
  std::size_t phi_width(Side side) const;
  std::size_t scorer_input_width() const;
  const MedresConfig& config() const { return config_; }
  const DatasetSchema& schema() const { return schema_; }
  const GraphSet& graphs() const { return *graphs_; }
  // "user:<type>" / "item:<type>" style description of the Phi layout.
  std::vector<std::string> layout(Side side) const;

 private:
  struct PairEncoder;

  const GraphSet* graphs_;
  DatasetSchema schema_;
  MedresConfig config_;
  std::vector<TypePair> pairs_;
  std::vector<Slot> slots_;
  std::vector<std::unique_ptr<PairEncoder>> encoders_;
  // Collab mode: one free table per entity type that owns a slot.
  std::vector<std::size_t> table_types_;
  std::vector<embed::FreeEmbeddingTable> free_tables_;
};

}  // namespace medres
