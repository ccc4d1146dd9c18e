#include "trasa/model/trasa_model.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace trasa::model {

namespace {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t counter) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (counter + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

void check_inventory(const Hyperparams& hp, const auto& params) {
  const auto expected = parameter_inventory(hp);
  if (expected.size() != params.size()) {
    throw FormatError("parameter set has " + std::to_string(params.size()) +
                      " tensors, configuration expects " + std::to_string(expected.size()));
  }
  for (const auto& [name, shape] : expected) {
    if (!params.contains(name)) throw FormatError("missing parameter '" + name + "'");
    if (params.get(name).shape() != shape) {
      throw FormatError("parameter '" + name + "' has shape " +
                        ad::to_string(params.get(name).shape()) + ", expected " +
                        ad::to_string(shape));
    }
  }
}

}  // namespace

template <typename T>
std::size_t RelationVars<T>::query_row(std::size_t i, std::size_t j) const {
  const std::size_t u = slot.at(graph::PathTable::pair_index(i, j, node_count));
  return i <= j ? u : distinct_paths.size() + u;
}

template <typename T>
std::size_t RelationVars<T>::key_row(std::size_t i, std::size_t j) const {
  const std::size_t u = slot.at(graph::PathTable::pair_index(i, j, node_count));
  return j < i ? u : distinct_paths.size() + u;
}

// ---------------------------------------------------------------- model

template <typename T>
TrasaModel<T>::TrasaModel(const Hyperparams& hp, std::uint64_t seed)
    : hp_(hp), params_(initialize_parameters<T>(hp, seed)) {}

template <typename T>
TrasaModel<T>::TrasaModel(const Hyperparams& hp, ParameterSet<T> params)
    : hp_(hp), params_(std::move(params)) {
  hp_.validate();
  check_inventory(hp_, params_);
  for (auto* p : params_.pointers()) p->set_requires_grad(true);
}

template <typename T>
std::vector<T> TrasaModel<T>::score_items(std::span<const ItemId> session) {
  Tape<T> tape;
  ForwardPass<T> pass(*this, tape, PassOptions{});
  auto out = pass.run(session);
  const auto data = out.logits.value().data();
  return {data.begin(), data.end()};
}

template <typename T>
T TrasaModel<T>::accumulate_gradients(std::span<const ItemId> session, ItemId target, T scale,
                                      const PassOptions& options) {
  Tape<T> tape;
  ForwardPass<T> pass(*this, tape, options);
  auto out = pass.run(session);
  auto loss = pass.loss(out.probabilities, target);
  const T value = loss.value().item();
  tape.backward(scale == T(1) ? loss : ad::affine(loss, scale));
  return value;
}

template <typename T>
T TrasaModel<T>::instance_loss(std::span<const ItemId> session, ItemId target,
                               const PassOptions& options) {
  Tape<T> tape;
  ForwardPass<T> pass(*this, tape, options);
  auto out = pass.run(session);
  return pass.loss(out.probabilities, target).value().item();
}

// ---------------------------------------------------------------- forward pass

template <typename T>
ForwardPass<T>::ForwardPass(TrasaModel<T>& model, Tape<T>& tape, PassOptions options)
    : model_(model), tape_(tape), options_(options) {}

template <typename T>
Var<T> ForwardPass<T>::param(const std::string& name) {
  auto it = bound_.find(name);
  if (it != bound_.end()) return it->second;
  Var<T> v = tape_.parameter(model_.parameters().get(name));
  bound_.emplace(name, v);
  return v;
}

template <typename T>
Var<T> ForwardPass<T>::dropout(Var<T> x) {
  const auto seed = mix_seed(options_.dropout_seed, dropout_calls_++);
  return ad::dropout(x, hyperparams().dropout, options_.training, seed);
}

template <typename T>
Var<T> ForwardPass<T>::gru_update(Var<T> xz, Var<T> xg, Var<T> xh, Var<T> h_prev,
                                  const std::string& prefix) {
  using namespace ad;
  Var<T> z = sigmoid(xz + matmul(h_prev, param(prefix + "U_z")));
  Var<T> g = sigmoid(xg + matmul(h_prev, param(prefix + "U_g")));
  Var<T> candidate = tanh(xh + matmul(g * h_prev, param(prefix + "U_h")));
  // (1 - z) * h_prev + z * candidate
  return h_prev + z * (candidate - h_prev);
}

template <typename T>
Var<T> ForwardPass<T>::gru_cell(Var<T> x, Var<T> h_prev, const std::string& prefix) {
  using namespace ad;
  const std::size_t hidden = hyperparams().gru_hidden();
  if (h_prev.value().rank() != 2 || h_prev.value().dim(1) != hidden ||
      h_prev.value().dim(0) != x.value().rows()) {
    throw DimensionError("gru_cell hidden state " + ad::to_string(h_prev.shape()) +
                         " does not match input " + ad::to_string(x.shape()) + " and width " +
                         std::to_string(hidden));
  }
  Var<T> xz = matmul(x, param(prefix + "W_z")) + param(prefix + "b_z");
  Var<T> xg = matmul(x, param(prefix + "W_g")) + param(prefix + "b_g");
  Var<T> xh = matmul(x, param(prefix + "W_h")) + param(prefix + "b_h");
  return gru_update(xz, xg, xh, h_prev, prefix);
}

template <typename T>
Var<T> ForwardPass<T>::run_gru(const std::vector<std::vector<EdgeType>>& paths, bool reversed,
                               const std::string& prefix) {
  using namespace ad;
  const std::size_t count = paths.size();
  const std::size_t hidden = hyperparams().gru_hidden();
  std::size_t longest = 0;
  for (const auto& p : paths) longest = std::max(longest, p.size());

  // Edge embeddings only take four values, so the input projections are
  // computed once per edge type and gathered per step.
  Var<T> edges = param("edge_type_embedding");
  Var<T> xz_table = matmul(edges, param(prefix + "W_z")) + param(prefix + "b_z");
  Var<T> xg_table = matmul(edges, param(prefix + "W_g")) + param(prefix + "b_g");
  Var<T> xh_table = matmul(edges, param(prefix + "W_h")) + param(prefix + "b_h");

  // Sequences are right-aligned so every one ends on the last step; rows
  // still in their left padding keep the zero initial state.
  Var<T> h = tape_.constant(Tensor<T>(Shape{count, hidden}));
  std::vector<std::size_t> types(count);
  for (std::size_t t = 0; t < longest; ++t) {
    Tensor<T> mask(Shape{count, hidden});
    bool padded = false;
    for (std::size_t u = 0; u < count; ++u) {
      const std::size_t len = paths[u].size();
      const std::size_t offset = longest - len;
      if (t < offset) {
        types[u] = 0;
        padded = true;
        continue;
      }
      const std::size_t e = t - offset;
      types[u] = static_cast<std::size_t>(reversed ? paths[u][len - 1 - e] : paths[u][e]);
      std::fill_n(mask.data().begin() + u * hidden, hidden, T(1));
    }
    Var<T> next = gru_update(gather_rows(xz_table, std::span<const std::size_t>(types)),
                             gather_rows(xg_table, std::span<const std::size_t>(types)),
                             gather_rows(xh_table, std::span<const std::size_t>(types)), h, prefix);
    h = padded ? h + tape_.constant(std::move(mask)) * (next - h) : next;
  }
  return h;
}

template <typename T>
RelationVars<T> ForwardPass<T>::encode_paths(const std::vector<std::vector<EdgeType>>& paths) {
  using namespace ad;
  if (paths.empty()) throw ContractError("encode_paths needs at least one path");
  for (const auto& p : paths) {
    if (p.empty()) throw ContractError("relation paths must be non-empty");
  }
  const std::size_t d = hyperparams().dim;
  RelationVars<T> rel;
  rel.distinct_paths = paths;
  const Var<T> halves[] = {run_gru(paths, false, "relation.gru_fwd."),
                           run_gru(paths, true, "relation.gru_bwd.")};
  rel.encoded = concat(std::span<const Var<T>>(halves), 1);
  Var<T> split = matmul(rel.encoded, param("relation.W_r"));
  rel.forward = slice(split, 1, 0, d);
  rel.backward = slice(split, 1, d, 2 * d);
  const Var<T> both[] = {rel.forward, rel.backward};
  rel.stacked = concat(std::span<const Var<T>>(both), 0);
  return rel;
}

template <typename T>
RelationVars<T> ForwardPass<T>::encode_relations(const graph::PathTable& table) {
  std::map<std::vector<EdgeType>, std::size_t> ids;
  std::vector<std::vector<EdgeType>> distinct;
  std::vector<std::size_t> slot(table.size());
  for (std::size_t k = 0; k < table.size(); ++k) {
    const auto& types = table.paths()[k].edge_types;
    auto [it, inserted] = ids.try_emplace(types, distinct.size());
    if (inserted) distinct.push_back(types);
    slot[k] = it->second;
  }
  RelationVars<T> rel = encode_paths(distinct);
  rel.node_count = table.node_count();
  rel.slot = std::move(slot);
  return rel;
}

template <typename T>
typename ForwardPass<T>::ProjectedPairs ForwardPass<T>::project_pairs(
    Var<T> nodes, const RelationVars<T>* relations, const std::string& prefix) {
  using namespace ad;
  const std::size_t m = nodes.value().dim(0);
  if (relations && relations->node_count != m) {
    throw InvariantError("relations cover " + std::to_string(relations->node_count) +
                         " nodes, attention input has " + std::to_string(m));
  }
  std::vector<std::size_t> rows_i, rows_j, q_rows, k_rows;
  rows_i.reserve(m * m);
  rows_j.reserve(m * m);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      rows_i.push_back(i);
      rows_j.push_back(j);
      if (relations) {
        q_rows.push_back(relations->query_row(i, j));
        k_rows.push_back(relations->key_row(i, j));
      }
    }
  }
  Var<T> w_q = param(prefix + "W_q");
  Var<T> w_k = param(prefix + "W_k");
  // ((h_i + r_ij) W_q) = h_i W_q + r_ij W_q, projected once per distinct row.
  ProjectedPairs out;
  out.queries = gather_rows(matmul(nodes, w_q), std::span<const std::size_t>(rows_i));
  out.keys = gather_rows(matmul(nodes, w_k), std::span<const std::size_t>(rows_j));
  if (relations) {
    out.queries = out.queries + gather_rows(matmul(relations->stacked, w_q),
                                            std::span<const std::size_t>(q_rows));
    out.keys = out.keys + gather_rows(matmul(relations->stacked, w_k),
                                      std::span<const std::size_t>(k_rows));
  }
  return out;
}

template <typename T>
Var<T> ForwardPass<T>::head_scores(const ProjectedPairs& pairs, std::size_t m, std::size_t head) {
  using namespace ad;
  const std::size_t dh = hyperparams().head_dim();
  if (head >= hyperparams().num_heads) {
    throw BoundsError("head " + std::to_string(head) + " out of range for " +
                      std::to_string(hyperparams().num_heads) + " heads");
  }
  Var<T> q = slice(pairs.queries, 1, head * dh, (head + 1) * dh);
  Var<T> k = slice(pairs.keys, 1, head * dh, (head + 1) * dh);
  Var<T> dots = reshape(sum(q * k, 1), Shape{m, m});
  return affine(dots, T(1) / std::sqrt(static_cast<T>(dh)));
}

template <typename T>
Var<T> ForwardPass<T>::attention_scores(Var<T> nodes, const RelationVars<T>* relations,
                                        const std::string& prefix, std::size_t head) {
  return head_scores(project_pairs(nodes, relations, prefix), nodes.value().dim(0), head);
}

template <typename T>
Var<T> ForwardPass<T>::attention_probabilities(Var<T> nodes, const RelationVars<T>* relations,
                                               const std::string& prefix, std::size_t head) {
  return ad::softmax(attention_scores(nodes, relations, prefix, head), 1);
}

template <typename T>
Var<T> ForwardPass<T>::encoder_layer(Var<T> nodes, const RelationVars<T>* relations,
                                     const std::string& prefix) {
  using namespace ad;
  const std::size_t m = nodes.value().dim(0);
  const std::size_t heads = hyperparams().num_heads;
  const std::size_t dh = hyperparams().head_dim();

  const ProjectedPairs pairs = project_pairs(nodes, relations, prefix);
  Var<T> values = matmul(nodes, param(prefix + "W_v"));
  std::vector<Var<T>> head_out;
  head_out.reserve(heads);
  for (std::size_t h = 0; h < heads; ++h) {
    Var<T> probs = dropout(softmax(head_scores(pairs, m, h), 1));
    head_out.push_back(matmul(probs, slice(values, 1, h * dh, (h + 1) * dh)));
  }
  Var<T> attended = matmul(concat(std::span<const Var<T>>(head_out), 1), param(prefix + "W_o"));
  Var<T> x = layer_norm_rows(nodes + attended, param(prefix + "ln1.gain"),
                             param(prefix + "ln1.bias"));

  Var<T> inner = relu(matmul(x, param(prefix + "ffn.W_1")) + param(prefix + "ffn.b_1"));
  Var<T> ffn = dropout(matmul(inner, param(prefix + "ffn.W_2")) + param(prefix + "ffn.b_2"));
  return layer_norm_rows(x + ffn, param(prefix + "ln2.gain"), param(prefix + "ln2.bias"));
}

template <typename T>
Var<T> ForwardPass<T>::encode_items(const graph::SessionGraph& graph) {
  const auto& hp = hyperparams();
  Var<T> reps = ad::gather_rows(param("item_embedding"),
                                std::span<const std::size_t>(graph.nodes()));
  if (hp.encoder_layers() == 0) return reps;

  RelationVars<T> relations;
  const RelationVars<T>* rel_ptr = nullptr;
  if (hp.uses_relations()) {
    relations = encode_relations(
        graph::shortest_paths(graph, {.cap = hp.path_cap, .traverse_pre = hp.traverse_pre}));
    rel_ptr = &relations;
  }
  for (std::size_t k = 0; k < hp.encoder_layers(); ++k) {
    reps = encoder_layer(reps, rel_ptr, layer_prefix(k));
  }
  return reps;
}

template <typename T>
Var<T> ForwardPass<T>::sequence_representations(Var<T> node_reps,
                                                const graph::SessionGraph& graph) {
  using namespace ad;
  const auto& hp = hyperparams();
  const auto& mapping = graph::revert_mapping(graph);
  const std::size_t len = std::min(mapping.size(), hp.max_positions);
  const std::vector<std::size_t> recent(mapping.end() - static_cast<std::ptrdiff_t>(len),
                                        mapping.end());
  Var<T> seq = gather_rows(node_reps, std::span<const std::size_t>(recent));
  if (!hp.uses_positions()) return seq;
  // Position i (1-based) of l receives p_{l-i+1}: table rows l-1, ..., 0.
  std::vector<std::size_t> pos(len);
  for (std::size_t i = 0; i < len; ++i) pos[i] = len - 1 - i;
  return seq + gather_rows(param("position_embedding"), std::span<const std::size_t>(pos));
}

template <typename T>
Var<T> ForwardPass<T>::readout_weights(Var<T> items, std::size_t current) {
  using namespace ad;
  Var<T> interest = slice(items, 0, current, current + 1);
  Var<T> hidden = matmul(items, param("readout.W_4")) +
                  matmul(interest, param("readout.W_5")) + param("readout.b_3");
  return softmax(matmul(hidden, param("readout.q")), 0);
}

template <typename T>
Var<T> ForwardPass<T>::readout(Var<T> node_reps, const graph::SessionGraph& graph) {
  using namespace ad;
  const auto& hp = hyperparams();
  if (graph.session_length() == 0) throw ContractError("readout of an empty session");
  switch (hp.readout) {
    case Readout::kTrasa: {
      Var<T> seq = sequence_representations(node_reps, graph);
      Var<T> gamma = readout_weights(seq, seq.value().dim(0) - 1);
      return matmul(transpose(gamma), seq);
    }
    case Readout::kSum: {
      Var<T> seq = sequence_representations(node_reps, graph);
      return reshape(sum(seq, 0), Shape{1, hp.dim});
    }
    case Readout::kGraph: {
      const std::size_t last = graph.position_to_node().back();
      Var<T> gamma = readout_weights(node_reps, last);
      return matmul(transpose(gamma), node_reps);
    }
    case Readout::kSan: {
      Var<T> seq = sequence_representations(node_reps, graph);
      Var<T> out = encoder_layer(seq, nullptr, kSanReadoutPrefix);
      const std::size_t rows = out.value().dim(0);
      return slice(out, 0, rows - 1, rows);
    }
  }
  throw InvariantError("unknown readout variant");
}

template <typename T>
Var<T> ForwardPass<T>::logits(Var<T> session_repr) {
  using namespace ad;
  Var<T> normalized = l2_normalize_rows(param("item_embedding"));
  return matmul(session_repr, transpose(normalized));
}

template <typename T>
Var<T> ForwardPass<T>::loss(Var<T> probabilities, ItemId target) {
  using namespace ad;
  const std::size_t n = probabilities.value().size();
  if (target >= n) {
    throw BoundsError("target item " + std::to_string(target) + " out of range for " +
                      std::to_string(n) + " items");
  }
  constexpr T kLo = T(1e-8);
  constexpr T kHi = T(1) - T(1e-8);
  Tensor<T> onehot(probabilities.shape());
  onehot[target] = T(1);
  Var<T> y = tape_.constant(std::move(onehot));
  Var<T> log_p = log_clamped(probabilities, kLo, kHi);
  if (hyperparams().loss == LossMode::kStandardCe) return affine(sum(y * log_p), T(-1));
  // -sum_i [ y_i log p_i + (1 - y_i) log(1 - p_i) ]
  Var<T> log_q = log_clamped(affine(probabilities, T(-1), T(1)), kLo, kHi);
  Var<T> not_y = affine(y, T(-1), T(1));
  return affine(sum(y * log_p) + sum(not_y * log_q), T(-1));
}

template <typename T>
SessionOutput<T> ForwardPass<T>::run(std::span<const ItemId> session) {
  const auto& hp = hyperparams();
  for (ItemId item : session) {
    if (item >= hp.vocab_size) {
      throw BoundsError("item " + std::to_string(item) + " out of range for vocabulary of " +
                        std::to_string(hp.vocab_size));
    }
  }
  const graph::SessionGraph graph = graph::build_graph(session);
  SessionOutput<T> out;
  out.representation = readout(encode_items(graph), graph);
  out.logits = logits(out.representation);
  out.probabilities = ad::softmax(out.logits, 1);
  return out;
}

template struct RelationVars<float>;
template struct RelationVars<double>;
template class TrasaModel<float>;
template class TrasaModel<double>;
template class ForwardPass<float>;
template class ForwardPass<double>;

}  // namespace trasa::model
