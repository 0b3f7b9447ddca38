#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "medres/diffcore/random.h"
#include "medres/embedding/layers.h"
#include "medres/entitygraph/catalog.h"

// Parameterised embedding blocks. Each block owns a name prefix and
// registers its tensors in a ParameterStore as "<prefix>/<tensor>".
namespace medres::embed {

// Layer-0 features for the block node set of a type pair: block-diagonal
// [F_first 0; 0 F_second]. A side without a feature matrix is one-hot, in
// which case the product with W^0 is a row slice instead of a matmul.
struct NodeInput {
  std::size_t first_count = 0;
  std::size_t second_count = 0;
  std::optional<Tensor> first_features;
  std::optional<Tensor> second_features;

  static NodeInput for_pair(const EntityCatalog& catalog, TypePair pair);
  std::size_t first_width() const;
  std::size_t second_width() const;
  std::size_t width() const { return first_width() + second_width(); }
  std::size_t node_count() const { return first_count + second_count; }
  // X^0 W^0 without materialising the block-diagonal X^0.
  Var project(Tape& tape, Var w0) const;
};

struct AlgcnConfig {
  std::size_t layers = 2;
  std::size_t width = 64;
  std::size_t transforms = 2;
  bool per_branch_weights = false;
};

class AlgcnBlock {
 public:
  AlgcnBlock(std::string prefix, AggregatedAdjacency agg, NodeInput input,
             AlgcnConfig config);

  void init_parameters(ParameterStore& store, Rng& rng) const;
  // Z for every node of the pair (first-type rows, then second-type rows).
  Var forward(Tape& tape, const ParameterStore& store) const;

  std::size_t output_width() const;
  std::size_t layer_input_width(std::size_t layer) const;
  const AggregatedAdjacency& adjacency() const { return agg_; }
  const PairPropagation& propagation() const { return prop_; }
  const AlgcnConfig& config() const { return config_; }

  std::string weight_name(std::size_t layer, std::size_t branch) const;
  std::string alpha_name(std::size_t layer, std::size_t branch) const;
  std::string beta_name(std::size_t layer, std::size_t branch) const;

 private:
  std::string prefix_;
  AggregatedAdjacency agg_;
  PairPropagation prop_;
  NodeInput input_;
  AlgcnConfig config_;
};

// Plain GCN stack over a single graph's symmetric block adjacency; the
// output is the last layer.
class GcnStack {
 public:
  GcnStack(std::string prefix, const SparseMatrix& oriented, NodeInput input,
           std::size_t layers, std::size_t width, bool normalize);

  void init_parameters(ParameterStore& store, Rng& rng) const;
  Var forward(Tape& tape, const ParameterStore& store) const;
  std::size_t output_width() const { return width_; }
  std::string weight_name(std::size_t layer) const;

 private:
  std::string prefix_;
  SparseMatrix block_;
  NodeInput input_;
  std::size_t layers_;
  std::size_t width_;
};

class EmbMergeLayer {
 public:
  EmbMergeLayer(std::string prefix, std::size_t input_width, std::size_t output_width);

  void init_parameters(ParameterStore& store, Rng& rng) const;
  MergedEmbedding forward(Tape& tape, const ParameterStore& store,
                          const std::vector<Var>& first_parts,
                          const std::vector<Var>& second_parts) const;
  std::size_t input_width() const { return input_width_; }
  std::size_t output_width() const { return output_width_; }

 private:
  std::string prefix_;
  std::size_t input_width_;
  std::size_t output_width_;
};

class FreeEmbeddingTable {
 public:
  static constexpr double kInitRange = 0.1;

  FreeEmbeddingTable(std::string name, std::size_t rows, std::size_t dim);

  // Uniform in +-kInitRange; registered without weight decay.
  void init_parameters(ParameterStore& store, Rng& rng) const;
  Var table(Tape& tape, const ParameterStore& store) const;
  const std::string& name() const { return name_; }
  std::size_t rows() const { return rows_; }
  std::size_t dim() const { return dim_; }

 private:
  std::string name_;
  std::size_t rows_;
  std::size_t dim_;
};

}  // namespace medres::embed
