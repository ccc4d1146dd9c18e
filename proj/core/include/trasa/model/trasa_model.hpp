#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "trasa/ad/ops.hpp"
#include "trasa/ad/tape.hpp"
#include "trasa/graph/session_graph.hpp"
#include "trasa/model/hyperparams.hpp"
#include "trasa/model/parameters.hpp"

namespace trasa::model {

using ad::Tape;
using ad::Var;
using graph::EdgeType;
using graph::ItemId;

/// Transition relations of one session, encoded once and shared by every
/// layer and head. Row u of `forward`/`backward` belongs to the u-th
/// distinct edge-type sequence; identical paths share a row.
template <typename T>
struct RelationVars {
  std::size_t node_count = 0;
  /// Canonical pair index (PathTable::pair_index) -> distinct-path row.
  std::vector<std::size_t> slot;
  std::vector<std::vector<EdgeType>> distinct_paths;
  Var<T> encoded;   // U x d, [last forward state | last backward state]
  Var<T> forward;   // U x d, relation oriented low -> high node
  Var<T> backward;  // U x d, relation oriented high -> low node
  Var<T> stacked;   // 2U x d, [forward; backward]

  /// Row of `stacked` holding the relation from node i towards node j.
  /// The self pair uses the forward half on the query side.
  std::size_t query_row(std::size_t i, std::size_t j) const;
  /// Row of `stacked` holding the relation from node j towards node i, as
  /// used on the key side of score (i, j). The self pair uses the backward half.
  std::size_t key_row(std::size_t i, std::size_t j) const;
};

struct PassOptions {
  bool training = false;
  std::uint64_t dropout_seed = 0;
};

template <typename T>
struct SessionOutput {
  Var<T> representation;  // 1 x d session vector
  Var<T> logits;          // 1 x n item scores
  Var<T> probabilities;   // 1 x n softmax of logits
};

/// Parameters plus configuration.
template <typename T>
class TrasaModel {
 public:
  /// Fresh Gaussian-initialized model.
  TrasaModel(const Hyperparams& hp, std::uint64_t seed);
  /// Adopt existing parameters; throws FormatError unless the names and
  /// shapes match `parameter_inventory(hp)` exactly.
  TrasaModel(const Hyperparams& hp, ParameterSet<T> params);

  const Hyperparams& hyperparams() const { return hp_; }
  ParameterSet<T>& parameters() { return params_; }
  const ParameterSet<T>& parameters() const { return params_; }

  /// Eval-mode item scores for one session.
  std::vector<T> score_items(std::span<const ItemId> session);

  /// Forward + backward for one (prefix, target) instance. The loss is
  /// multiplied by `scale` before backward, so gradients accumulate into the
  /// parameters' buffers already scaled. Returns the unscaled loss.
  T accumulate_gradients(std::span<const ItemId> session, ItemId target, T scale,
                         const PassOptions& options);

  /// Loss for one instance without a backward pass.
  T instance_loss(std::span<const ItemId> session, ItemId target, const PassOptions& options);

 private:
  Hyperparams hp_;
  ParameterSet<T> params_;
};

/// One forward computation on a tape. Exposes every stage so each can be
/// exercised on its own.
template <typename T>
class ForwardPass {
 public:
  ForwardPass(TrasaModel<T>& model, Tape<T>& tape, PassOptions options = {});

  Tape<T>& tape() { return tape_; }
  const Hyperparams& hyperparams() const { return model_.hyperparams(); }

  /// Parameter `name` bound to the tape (bound once, then cached).
  Var<T> param(const std::string& name);

  /// Standard GRU step for a batch of rows: x is B x d, h_prev is B x d/2.
  /// `prefix` selects the cell, e.g. "relation.gru_fwd.".
  Var<T> gru_cell(Var<T> x, Var<T> h_prev, const std::string& prefix);

  /// Bi-GRU encoding of explicit edge-type sequences (no deduplication).
  RelationVars<T> encode_paths(const std::vector<std::vector<EdgeType>>& paths);
  /// Relations for every node pair of a path table.
  RelationVars<T> encode_relations(const graph::PathTable& table);

  /// m x m scaled scores of one head. `relations` may be null (relation-free).
  Var<T> attention_scores(Var<T> nodes, const RelationVars<T>* relations,
                          const std::string& prefix, std::size_t head);
  /// Row-softmaxed scores of one head, before dropout.
  Var<T> attention_probabilities(Var<T> nodes, const RelationVars<T>* relations,
                                 const std::string& prefix, std::size_t head);
  /// Multi-head attention, residual + layer norm, FFN, residual + layer norm.
  Var<T> encoder_layer(Var<T> nodes, const RelationVars<T>* relations, const std::string& prefix);

  /// Node representations H_g after the encoder stack (raw embeddings for WO_SAN).
  Var<T> encode_items(const graph::SessionGraph& graph);

  /// Session vector s_h (1 x d) for the configured readout variant.
  Var<T> readout(Var<T> node_reps, const graph::SessionGraph& graph);
  /// Soft-attention weights gamma (k x 1) over the rows of `items`, using
  /// row `current` as the current interest.
  Var<T> readout_weights(Var<T> items, std::size_t current);
  /// Per-position rows H_s with reversed positions added (when enabled),
  /// truncated to the last max_positions positions.
  Var<T> sequence_representations(Var<T> node_reps, const graph::SessionGraph& graph);

  /// 1 x n scores against the row-normalized item table.
  Var<T> logits(Var<T> session_repr);

  /// Loss for one instance from 1 x n probabilities.
  Var<T> loss(Var<T> probabilities, ItemId target);

  SessionOutput<T> run(std::span<const ItemId> session);

 private:
  struct ProjectedPairs {
    Var<T> queries;  // m^2 x d
    Var<T> keys;     // m^2 x d
  };
  ProjectedPairs project_pairs(Var<T> nodes, const RelationVars<T>* relations,
                               const std::string& prefix);
  Var<T> head_scores(const ProjectedPairs& pairs, std::size_t m, std::size_t head);
  Var<T> gru_update(Var<T> xz, Var<T> xg, Var<T> xh, Var<T> h_prev, const std::string& prefix);
  Var<T> run_gru(const std::vector<std::vector<EdgeType>>& paths, bool reversed,
                 const std::string& prefix);
  Var<T> dropout(Var<T> x);

  TrasaModel<T>& model_;
  Tape<T>& tape_;
  PassOptions options_;
  std::uint64_t dropout_calls_ = 0;
  std::unordered_map<std::string, Var<T>> bound_;
};

extern template class TrasaModel<float>;
extern template class TrasaModel<double>;
extern template class ForwardPass<float>;
extern template class ForwardPass<double>;

}  // namespace trasa::model
