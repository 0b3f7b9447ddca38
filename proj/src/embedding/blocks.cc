#include "medres/embedding/blocks.h"

#include <stdexcept>

#include "medres/errors.h"

namespace medres::embed {

NodeInput NodeInput::for_pair(const EntityCatalog& catalog, TypePair pair) {
  const auto& a = catalog.type(pair.first);
  const auto& b = catalog.type(pair.second);
  return {a.size, b.size, a.features, b.features};
}

std::size_t NodeInput::first_width() const {
  return first_features ? first_features->cols() : first_count;
}

std::size_t NodeInput::second_width() const {
  return second_features ? second_features->cols() : second_count;
}

Var NodeInput::project(Tape& tape, Var w0) const {
  if (w0.rows() != width()) {
    throw DimensionError("input projection has " + std::to_string(w0.rows()) +
                         " rows, features are " + std::to_string(width()) + " wide");
  }
  auto side = [&](const std::optional<Tensor>& f, std::size_t begin,
                  std::size_t count) {
    const Var rows = ops::slice_rows(w0, begin, count);
    return f ? ops::matmul(tape.constant(*f), rows) : rows;
  };
  return ops::concat_rows({side(first_features, 0, first_width()),
                           side(second_features, first_width(), second_width())});
}

AlgcnBlock::AlgcnBlock(std::string prefix, AggregatedAdjacency agg,
                       NodeInput input, AlgcnConfig config)
    : prefix_(std::move(prefix)),
      agg_(std::move(agg)),
      prop_(pair_propagation(agg_)),
      input_(std::move(input)),
      config_(config) {
  if (config_.layers == 0 || config_.width == 0) {
    throw ConfigError("algcn block needs at least one layer of positive width");
  }
  if (config_.transforms < 1 || config_.transforms > 8) {
    throw ConfigError("transforms per layer must be in 1..8, got " +
                      std::to_string(config_.transforms));
  }
  if (input_.first_count != agg_.rows || input_.second_count != agg_.cols) {
    throw DimensionError("node input does not match the pair vocabularies");
  }
}

std::size_t AlgcnBlock::layer_input_width(std::size_t layer) const {
  return layer == 0 ? input_.width() : config_.transforms * config_.width;
}

std::size_t AlgcnBlock::output_width() const {
  return config_.layers * config_.transforms * config_.width;
}

std::string AlgcnBlock::weight_name(std::size_t layer, std::size_t branch) const {
  std::string name = prefix_ + "/W" + std::to_string(layer);
  if (config_.per_branch_weights) name += "_" + std::to_string(branch);
  return name;
}

std::string AlgcnBlock::alpha_name(std::size_t layer, std::size_t branch) const {
  return prefix_ + "/alpha" + std::to_string(layer) + "_" + std::to_string(branch);
}

std::string AlgcnBlock::beta_name(std::size_t layer, std::size_t branch) const {
  return prefix_ + "/beta" + std::to_string(layer) + "_" + std::to_string(branch);
}

void AlgcnBlock::init_parameters(ParameterStore& store, Rng& rng) const {
  const std::size_t m = agg_.multiplicity();
  const std::size_t weight_sets = config_.per_branch_weights ? config_.transforms : 1;
  for (std::size_t l = 0; l < config_.layers; ++l) {
    for (std::size_t p = 0; p < weight_sets; ++p) {
      store.add(weight_name(l, p),
                glorot_uniform(layer_input_width(l), config_.width, rng));
    }
    for (std::size_t p = 0; p < config_.transforms; ++p) {
      store.add(alpha_name(l, p), Tensor::full(m, 1, 1.0), false);
      store.add(beta_name(l, p), Tensor::zeros(1, 1), false);
    }
  }
}

Var AlgcnBlock::forward(Tape& tape, const ParameterStore& store) const {
  const Var stacked = tape.constant(agg_.weights);
  std::vector<Var> layers;
  Var x;
  for (std::size_t l = 0; l < config_.layers; ++l) {
    std::vector<Var> values;
    for (std::size_t p = 0; p < config_.transforms; ++p) {
      values.push_back(transform_adjacency(
          stacked, {tape.parameter(store, alpha_name(l, p)),
                    tape.parameter(store, beta_name(l, p))}));
    }
    std::vector<Var> xw;
    const std::size_t weight_sets = config_.per_branch_weights ? config_.transforms : 1;
    for (std::size_t p = 0; p < weight_sets; ++p) {
      const Var w = tape.parameter(store, weight_name(l, p));
      xw.push_back(l == 0 ? input_.project(tape, w) : ops::matmul(x, w));
    }
    x = algcn_propagate(prop_, xw, values);
    layers.push_back(x);
  }
  return residual_concat(layers);
}

GcnStack::GcnStack(std::string prefix, const SparseMatrix& oriented,
                   NodeInput input, std::size_t layers, std::size_t width,
                   bool normalize)
    : prefix_(std::move(prefix)),
      block_(block_adjacency(oriented)),
      input_(std::move(input)),
      layers_(layers),
      width_(width) {
  if (layers_ == 0 || width_ == 0) {
    throw ConfigError("gcn stack needs at least one layer of positive width");
  }
  if (oriented.rows() != input_.first_count || oriented.cols() != input_.second_count) {
    throw DimensionError("node input does not match the graph vocabularies");
  }
  if (normalize) block_ = normalize_adjacency(block_);
}

std::string GcnStack::weight_name(std::size_t layer) const {
  return prefix_ + "/W" + std::to_string(layer);
}

void GcnStack::init_parameters(ParameterStore& store, Rng& rng) const {
  for (std::size_t l = 0; l < layers_; ++l) {
    store.add(weight_name(l),
              glorot_uniform(l == 0 ? input_.width() : width_, width_, rng));
  }
}

Var GcnStack::forward(Tape& tape, const ParameterStore& store) const {
  Var x;
  for (std::size_t l = 0; l < layers_; ++l) {
    const Var w = tape.parameter(store, weight_name(l));
    const Var xw = l == 0 ? input_.project(tape, w) : ops::matmul(x, w);
    x = ops::relu(ops::spmm(block_, xw));
  }
  return x;
}

EmbMergeLayer::EmbMergeLayer(std::string prefix, std::size_t input_width,
                             std::size_t output_width)
    : prefix_(std::move(prefix)),
      input_width_(input_width),
      output_width_(output_width) {
  if (input_width_ == 0 || output_width_ == 0) {
    throw ConfigError("emb-merge widths must be positive");
  }
}

void EmbMergeLayer::init_parameters(ParameterStore& store, Rng& rng) const {
  store.add(prefix_ + "/W_first", glorot_uniform(input_width_, output_width_, rng));
  store.add(prefix_ + "/c_first", Tensor::zeros(1, output_width_), false);
  store.add(prefix_ + "/W_second", glorot_uniform(input_width_, output_width_, rng));
  store.add(prefix_ + "/c_second", Tensor::zeros(1, output_width_), false);
}

MergedEmbedding EmbMergeLayer::forward(Tape& tape, const ParameterStore& store,
                                       const std::vector<Var>& first_parts,
                                       const std::vector<Var>& second_parts) const {
  return emb_merge(first_parts, second_parts,
                   tape.parameter(store, prefix_ + "/W_first"),
                   tape.parameter(store, prefix_ + "/c_first"),
                   tape.parameter(store, prefix_ + "/W_second"),
                   tape.parameter(store, prefix_ + "/c_second"));
}

FreeEmbeddingTable::FreeEmbeddingTable(std::string name, std::size_t rows,
                                       std::size_t dim)
    : name_(std::move(name)), rows_(rows), dim_(dim) {}

void FreeEmbeddingTable::init_parameters(ParameterStore& store, Rng& rng) const {
  store.add(name_, uniform_tensor(rows_, dim_, kInitRange, rng), false);
}

Var FreeEmbeddingTable::table(Tape& tape, const ParameterStore& store) const {
  return tape.parameter(store, name_);
}

}  // namespace medres::embed
