#include "medres/model/medres_model.h"

#include <algorithm>
#include <optional>

#include "medres/errors.h"

namespace medres {

std::string to_string(ModelMode mode) {
  return mode == ModelMode::kMedres ? "medres" : "collab";
}

std::string to_string(EncoderKind kind) {
  return kind == EncoderKind::kAlgcn ? "algcn" : "gcn";
}

ModelMode parse_mode(const std::string& s) {
  if (s == "medres") return ModelMode::kMedres;
  if (s == "collab") return ModelMode::kCollab;
  throw ConfigError("unknown model mode '" + s + "' (expected medres or collab)");
}

EncoderKind parse_encoder(const std::string& s) {
  if (s == "algcn") return EncoderKind::kAlgcn;
  if (s == "gcn") return EncoderKind::kGcn;
  throw ConfigError("unknown encoder '" + s + "' (expected algcn or gcn)");
}

struct MedresModel::PairEncoder {
  TypePair pair;
  std::size_t first_count = 0;
  std::optional<embed::AlgcnBlock> algcn;
  std::vector<embed::GcnStack> gcn;
  std::optional<embed::EmbMergeLayer> merge;

  void init(ParameterStore& store, Rng& rng) const {
    if (algcn) algcn->init_parameters(store, rng);
    for (const auto& g : gcn) g.init_parameters(store, rng);
    merge->init_parameters(store, rng);
  }

  embed::MergedEmbedding forward(Tape& tape, const ParameterStore& store) const {
    std::vector<Var> zs;
    if (algcn) zs.push_back(algcn->forward(tape, store));
    for (const auto& g : gcn) zs.push_back(g.forward(tape, store));
    std::vector<Var> first, second;
    for (const Var& z : zs) {
      first.push_back(ops::slice_rows(z, 0, first_count));
      second.push_back(ops::slice_rows(z, first_count, z.rows() - first_count));
    }
    return merge->forward(tape, store, first, second);
  }
};

MedresModel::~MedresModel() = default;
MedresModel::MedresModel(MedresModel&&) noexcept = default;

MedresModel::MedresModel(const GraphSet& graphs, DatasetSchema schema,
                         MedresConfig config)
    : graphs_(&graphs), schema_(std::move(schema)), config_(config) {
  if (config_.merge_width == 0 || config_.hidden1 == 0 || config_.hidden2 == 0) {
    throw ConfigError("model widths must be positive");
  }
  const auto& cat = graphs.catalog();
  for (std::size_t t : schema_.user_types) {
    if (t >= cat.type_count()) throw ConfigError("user type outside the catalog");
  }
  for (std::size_t t : schema_.item_types) {
    if (t >= cat.type_count()) throw ConfigError("item type outside the catalog");
  }
  pairs_ = graphs.pairs();
  for (std::size_t p = 0; p < pairs_.size(); ++p) {
    slots_.push_back({p, pairs_[p].first, config_.merge_width});
    slots_.push_back({p, pairs_[p].second, config_.merge_width});
  }

  if (config_.mode == ModelMode::kCollab) {
    for (const auto& s : slots_) {
      if (std::find(table_types_.begin(), table_types_.end(), s.entity_type) ==
          table_types_.end()) {
        table_types_.push_back(s.entity_type);
      }
    }
    for (std::size_t t : table_types_) {
      free_tables_.emplace_back("free/" + cat.type(t).name, cat.type(t).size,
                                config_.merge_width);
    }
    return;
  }

  for (std::size_t p = 0; p < pairs_.size(); ++p) {
    const TypePair pair = pairs_[p];
    const std::string prefix = "pair" + std::to_string(p) + "." +
                               cat.type(pair.first).name + "-" +
                               cat.type(pair.second).name;
    auto enc = std::make_unique<PairEncoder>();
    enc->pair = pair;
    enc->first_count = cat.type(pair.first).size;
    const auto input = embed::NodeInput::for_pair(cat, pair);
    std::size_t merge_in = 0;
    if (config_.encoder == EncoderKind::kAlgcn) {
      embed::AlgcnConfig ac{config_.layers, config_.conv_width, config_.transforms,
                            config_.per_branch_weights};
      enc->algcn.emplace(prefix + "/algcn", aggregate(graphs, pair), input, ac);
      merge_in = enc->algcn->output_width();
    } else {
      for (std::size_t gi : graphs.graphs_for(pair)) {
        enc->gcn.emplace_back(prefix + "/gcn." + graphs.graphs()[gi].name,
                              oriented_adjacency(graphs, gi, pair), input,
                              config_.layers, config_.conv_width, config_.normalize);
        merge_in += config_.conv_width;
      }
    }
    enc->merge.emplace(prefix + "/merge", merge_in, config_.merge_width);
    encoders_.push_back(std::move(enc));
  }
}

void MedresModel::init_parameters(ParameterStore& store, std::uint64_t seed) const {
  Rng rng(seed);
  for (const auto& enc : encoders_) enc->init(store, rng);
  for (const auto& t : free_tables_) t.init_parameters(store, rng);
  const std::size_t widths[] = {scorer_input_width(), config_.hidden1,
                                config_.hidden2, 1};
  for (std::size_t i = 0; i < 3; ++i) {
    const std::string n = std::to_string(i + 1);
    store.add("scorer/M" + n, glorot_uniform(widths[i], widths[i + 1], rng));
    if (config_.scorer_bias) {
      store.add("scorer/b" + n, Tensor::zeros(1, widths[i + 1]), false);
    }
  }
}

SlotTables MedresModel::embed(Tape& tape, const ParameterStore& store) const {
  SlotTables out;
  if (config_.mode == ModelMode::kCollab) {
    for (const auto& s : slots_) {
      const auto it = std::find(table_types_.begin(), table_types_.end(), s.entity_type);
      out.tables.push_back(
          free_tables_[static_cast<std::size_t>(it - table_types_.begin())].table(tape, store));
    }
    return out;
  }
  for (std::size_t p = 0; p < encoders_.size(); ++p) {
    const auto merged = encoders_[p]->forward(tape, store);
    out.tables.push_back(merged.first);
    out.tables.push_back(merged.second);
  }
  return out;
}

Var MedresModel::represent(Tape& tape, const SlotTables& tables, const Dataset& data,
                           const std::vector<std::size_t>& rows, Side side) const {
  const auto& types = side == Side::kUser ? schema_.user_types : schema_.item_types;
  const std::size_t dim = side == Side::kUser ? schema_.user_dim : schema_.item_dim;
  if (data.schema() != schema_) {
    throw DimensionError("dataset schema differs from the model schema");
  }
  std::vector<Var> parts;
  for (std::size_t s = 0; s < slots_.size(); ++s) {
    const auto pos = std::find(types.begin(), types.end(), slots_[s].entity_type);
    if (pos == types.end()) {
      parts.push_back(tape.constant(Tensor::zeros(rows.size(), slots_[s].width)));
      continue;
    }
    const std::size_t slot_in_side = static_cast<std::size_t>(pos - types.begin());
    std::vector<std::size_t> ids;
    ids.reserve(rows.size());
    for (std::size_t r : rows) {
      const auto& ex = data[r];
      ids.push_back(side == Side::kUser ? ex.user_entities.at(slot_in_side)
                                        : ex.item_entities.at(slot_in_side));
    }
    parts.push_back(embed::free_lookup(tables.tables.at(s), ids));
  }
  if (dim > 0) {
    std::vector<double> d;
    d.reserve(rows.size() * dim);
    for (std::size_t r : rows) {
      const auto& v = side == Side::kUser ? data[r].user_vec : data[r].item_vec;
      d.insert(d.end(), v.begin(), v.end());
    }
    parts.push_back(tape.constant(Tensor(rows.size(), dim, std::move(d))));
  }
  if (parts.empty()) throw ConfigError("representation has zero width");
  return parts.size() == 1 ? parts[0] : ops::concat_cols(parts);
}

Var MedresModel::score_rows(Tape& tape, const ParameterStore& store,
                            const SlotTables& tables, const Dataset& data,
                            const std::vector<std::size_t>& rows) const {
  Var h = ops::concat_cols({represent(tape, tables, data, rows, Side::kUser),
                            represent(tape, tables, data, rows, Side::kItem)});
  for (std::size_t i = 1; i <= 3; ++i) {
    const std::string n = std::to_string(i);
    h = ops::matmul(h, tape.parameter(store, "scorer/M" + n));
    if (config_.scorer_bias) h = ops::add(h, tape.parameter(store, "scorer/b" + n));
    h = i < 3 ? ops::relu(h) : ops::sigmoid(h);
  }
  return h;
}

Var MedresModel::score_rows(Tape& tape, const ParameterStore& store,
                            const Dataset& data,
                            const std::vector<std::size_t>& rows) const {
  return score_rows(tape, store, embed(tape, store), data, rows);
}

std::vector<double> MedresModel::batch_score(const ParameterStore& store,
                                             const Dataset& data) const {
  std::vector<double> out;
  out.reserve(data.size());
  if (data.empty()) return out;
  // Rows are scored independently, so chunking only bounds tape memory.
  constexpr std::size_t kChunk = 2048;
  Tape tape;
  const SlotTables tables = embed(tape, store);
  for (std::size_t begin = 0; begin < data.size(); begin += kChunk) {
    std::vector<std::size_t> rows;
    for (std::size_t r = begin; r < std::min(data.size(), begin + kChunk); ++r) {
      rows.push_back(r);
    }
    const Var s = score_rows(tape, store, tables, data, rows);
    for (double v : s.value().data()) out.push_back(v);
  }
  return out;
}

double MedresModel::score(const ParameterStore& store, const LabeledExample& example) const {
  Dataset one(schema_);
  one.add(example);
  return batch_score(store, one).front();
}

std::size_t MedresModel::phi_width(Side side) const {
  std::size_t w = 0;
  for (const auto& s : slots_) w += s.width;
  return w + (side == Side::kUser ? schema_.user_dim : schema_.item_dim);
}

std::size_t MedresModel::scorer_input_width() const {
  return phi_width(Side::kUser) + phi_width(Side::kItem);
}

std::vector<std::string> MedresModel::layout(Side side) const {
  const auto& cat = graphs_->catalog();
  const auto& types = side == Side::kUser ? schema_.user_types : schema_.item_types;
  std::vector<std::string> out;
  for (const auto& s : slots_) {
    const TypePair p = pairs_[s.pair_index];
    const bool filled = std::find(types.begin(), types.end(), s.entity_type) != types.end();
    out.push_back(cat.type(p.first).name + "-" + cat.type(p.second).name + ":" +
                  cat.type(s.entity_type).name + (filled ? "" : " (zero)"));
  }
  const std::size_t dim = side == Side::kUser ? schema_.user_dim : schema_.item_dim;
  if (dim > 0) out.push_back((side == Side::kUser ? "user_vec[" : "item_vec[") +
                             std::to_string(dim) + "]");
  return out;
}

}  // namespace medres
