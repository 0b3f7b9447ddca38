#include "medres/ingest/synthetic.h"

#include "medres/diffcore/random.h"
#include "medres/errors.h"

namespace medres::ingest {

namespace {

// Balanced assignment: round-robin labels in shuffled order.
std::vector<std::size_t> assign_clusters(std::size_t n, std::size_t k, Rng& rng) {
  std::vector<std::size_t> c(n);
  for (std::size_t i = 0; i < n; ++i) c[i] = i % k;
  rng.shuffle(c);
  return c;
}

}  // namespace

SyntheticData synthesize(const SyntheticConfig& cfg) {
  if (cfg.clusters == 0) throw ConfigError("synthetic data needs at least one cluster");
  if (cfg.max_weight == 0) throw ConfigError("max_weight must be positive");
  Rng rng(cfg.seed);
  SyntheticData out;
  out.user_cluster = assign_clusters(cfg.users, cfg.clusters, rng);
  out.item_cluster = assign_clusters(cfg.items, cfg.clusters, rng);

  EntityCatalog cat;
  const std::size_t user_type = cat.add_type("user", cfg.users);
  const std::size_t item_type = cat.add_type("item", cfg.items);
  out.graphs = GraphSet(std::move(cat));
  for (std::size_t g = 0; g < cfg.graphs; ++g) {
    std::vector<SparseEntry> edges;
    for (std::size_t u = 0; u < cfg.users; ++u) {
      for (std::size_t i = 0; i < cfg.items; ++i) {
        const bool same = out.user_cluster[u] == out.item_cluster[i];
        if (rng.bernoulli(same ? cfg.edge_same : cfg.edge_cross)) {
          edges.push_back({u, i, static_cast<double>(1 + rng.below(cfg.max_weight))});
        }
      }
    }
    out.graphs.add_graph({"interaction_" + std::to_string(g), user_type, item_type,
                          SparseMatrix(cfg.users, cfg.items, std::move(edges))});
  }

  out.data = Dataset(DatasetSchema{{user_type}, {item_type}, cfg.user_dim, cfg.item_dim});
  for (std::size_t u = 0; u < cfg.users; ++u) {
    for (std::size_t i = 0; i < cfg.items; ++i) {
      if (cfg.pair_rate < 1.0 && !rng.bernoulli(cfg.pair_rate)) continue;
      const bool same = out.user_cluster[u] == out.item_cluster[i];
      LabeledExample ex;
      ex.user_entities = {u};
      ex.item_entities = {i};
      ex.label = rng.bernoulli(same ? cfg.positive_same : cfg.positive_cross) ? 1 : 0;
      for (std::size_t d = 0; d < cfg.user_dim; ++d) {
        ex.user_vec.push_back(cfg.vector_noise * rng.normal());
      }
      for (std::size_t d = 0; d < cfg.item_dim; ++d) {
        ex.item_vec.push_back(cfg.vector_noise * rng.normal());
      }
      out.data.add(std::move(ex));
    }
  }
  return out;
}

}  // namespace medres::ingest
