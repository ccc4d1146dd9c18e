#include "formula_fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "oracles.hpp"

namespace trasa::testing {

using graph::EdgeType;
using model::ForwardPass;

model::TrasaModel<double> hand_model(std::size_t vocab_size, model::Ablation ablation,
                                     model::Readout readout) {
  model::Hyperparams hp;
  hp.vocab_size = vocab_size;
  hp.dim = 4;
  hp.num_heads = 2;
  hp.num_layers = 1;
  hp.ffn_inner = 6;
  hp.dropout = 0.0;
  hp.max_positions = 8;
  hp.ablation = ablation;
  hp.readout = readout;
  model::TrasaModel<double> net(hp, 1);
  fill_hand_weights(net.parameters());
  return net;
}

namespace {

std::vector<double> row(const Matrix& m, std::size_t r) { return m[r]; }

std::vector<double> slice(const std::vector<double>& v, std::size_t begin, std::size_t end) {
  return {v.begin() + static_cast<std::ptrdiff_t>(begin), v.begin() + static_cast<std::ptrdiff_t>(end)};
}

void track(double& worst, double a, double b) { worst = std::max(worst, std::abs(a - b)); }

/// Scores of one head written out from the formula, pair by pair.
Matrix oracle_scores(const model::ParameterSet<double>& params, const Matrix& nodes,
                     const std::vector<std::vector<std::vector<double>>>& rq,
                     const std::vector<std::vector<std::vector<double>>>& rk, std::size_t head,
                     std::size_t dh) {
  const Matrix wq = to_matrix(params.get("layer0.W_q"));
  const Matrix wk = to_matrix(params.get("layer0.W_k"));
  const std::size_t m = nodes.size();
  Matrix out(m, std::vector<double>(m));
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const auto q = slice(row_times(add(nodes[i], rq[i][j]), wq), head * dh, (head + 1) * dh);
      const auto k = slice(row_times(add(nodes[j], rk[i][j]), wk), head * dh, (head + 1) * dh);
      out[i][j] = dot(q, k) / std::sqrt(static_cast<double>(dh));
    }
  }
  return out;
}

}  // namespace

double FormulaDeviations::worst() const {
  return std::max({attention, zero_relation, readout, scoring, loss});
}

std::string FormulaDeviations::describe() const {
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "attention=%.3g zero_relation=%.3g exact=%s readout=%.3g scoring=%.3g loss=%.3g",
                attention, zero_relation, zero_relation_exact ? "yes" : "no", readout, scoring, loss);
  return buf;
}

FormulaDeviations formula_deviations() {
  FormulaDeviations dev;
  const std::vector<graph::ItemId> session{0, 1};

  // Relation-aware attention scores, m = 2.
  {
    auto net = hand_model(3);
    const auto& hp = net.hyperparams();
    const auto& params = net.parameters();
    ad::Tape<double> tape;
    ForwardPass<double> pass(net, tape);
    const auto g = graph::build_graph(session);
    const auto rel = pass.encode_relations(graph::shortest_paths(g));
    auto nodes = ad::gather_rows(pass.param("item_embedding"), std::span<const std::size_t>(g.nodes()));

    const Matrix items = to_matrix(params.get("item_embedding"));
    const Matrix h{row(items, 0), row(items, 1)};
    const auto self = relation_reference(params, {EdgeType::kSelf}, hp.dim);
    const auto next = relation_reference(params, {EdgeType::kNxt}, hp.dim);
    // Query side r_{i->j}, key side r_{j->i}; pair (0, 1) is canonical.
    const std::vector<std::vector<std::vector<double>>> rq{{self.first, next.first},
                                                           {next.second, self.first}};
    const std::vector<std::vector<std::vector<double>>> rk{{self.second, next.second},
                                                           {next.first, self.second}};
    for (std::size_t head = 0; head < hp.num_heads; ++head) {
      const auto got = to_matrix(pass.attention_scores(nodes, &rel, "layer0.", head).value());
      const auto want = oracle_scores(params, h, rq, rk, head, hp.head_dim());
      for (std::size_t i = 0; i < 2; ++i) {
        for (std::size_t j = 0; j < 2; ++j) track(dev.attention, got[i][j], want[i][j]);
      }
    }
  }

  // Zero relations reduce to the plain scaled dot product.
  {
    auto net = hand_model(3);
    const auto& hp = net.hyperparams();
    auto& wr = net.parameters().get("relation.W_r");
    std::fill(wr.data().begin(), wr.data().end(), 0.0);
    ad::Tape<double> tape;
    ForwardPass<double> pass(net, tape);
    const auto g = graph::build_graph(session);
    const auto rel = pass.encode_relations(graph::shortest_paths(g));
    auto nodes = ad::gather_rows(pass.param("item_embedding"), std::span<const std::size_t>(g.nodes()));
    const Matrix items = to_matrix(net.parameters().get("item_embedding"));
    const Matrix h{row(items, 0), row(items, 1)};
    const std::vector<std::vector<std::vector<double>>> zero(
        2, std::vector<std::vector<double>>(2, std::vector<double>(hp.dim, 0.0)));
    dev.zero_relation_exact = true;
    for (std::size_t head = 0; head < hp.num_heads; ++head) {
      const auto& with = pass.attention_scores(nodes, &rel, "layer0.", head).value();
      const auto& without = pass.attention_scores(nodes, nullptr, "layer0.", head).value();
      for (std::size_t k = 0; k < with.size(); ++k) {
        if (with[k] != without[k]) dev.zero_relation_exact = false;
      }
      const auto want = oracle_scores(net.parameters(), h, zero, zero, head, hp.head_dim());
      const auto got = to_matrix(without);
      for (std::size_t i = 0; i < 2; ++i) {
        for (std::size_t j = 0; j < 2; ++j) track(dev.zero_relation, got[i][j], want[i][j]);
      }
    }
  }

  // Soft-attention readout, l = 2.
  {
    auto net = hand_model(3);
    const auto& params = net.parameters();
    ad::Tape<double> tape;
    ForwardPass<double> pass(net, tape);
    const auto g = graph::build_graph(session);
    auto nodes = ad::gather_rows(pass.param("item_embedding"), std::span<const std::size_t>(g.nodes()));
    auto s_h = pass.readout(nodes, g);
    auto seq = pass.sequence_representations(nodes, g);
    auto gamma = pass.readout_weights(seq, 1);

    const Matrix items = to_matrix(params.get("item_embedding"));
    const Matrix pos = to_matrix(params.get("position_embedding"));
    // Reversed positions: the first click gets p_2, the last p_1.
    const Matrix hs{add(items[0], pos[1]), add(items[1], pos[0])};
    const Matrix w4 = to_matrix(params.get("readout.W_4"));
    const Matrix w5 = to_matrix(params.get("readout.W_5"));
    const auto b3 = to_matrix(params.get("readout.b_3"))[0];
    std::vector<double> q;
    for (const auto& r : to_matrix(params.get("readout.q"))) q.push_back(r[0]);
    std::vector<double> eps;
    for (const auto& hi : hs) eps.push_back(dot(add(add(row_times(hi, w4), row_times(hs[1], w5)), b3), q));
    const auto want_gamma = softmax(eps);
    std::vector<double> want_s(4, 0.0);
    for (std::size_t i = 0; i < 2; ++i) {
      for (std::size_t c = 0; c < 4; ++c) want_s[c] += want_gamma[i] * hs[i][c];
    }
    for (std::size_t i = 0; i < 2; ++i) track(dev.readout, gamma.value()[i], want_gamma[i]);
    for (std::size_t c = 0; c < 4; ++c) track(dev.readout, s_h.value()[c], want_s[c]);
  }

  // Item scores and probabilities, n = 3.
  {
    auto net = hand_model(3);
    ad::Tape<double> tape;
    ForwardPass<double> pass(net, tape);
    const std::vector<double> s{0.3, -0.2, 0.5, 0.1};
    auto z = pass.logits(tape.constant(ad::Tensor<double>(ad::Shape{1, 4}, s)));
    auto y = ad::softmax(z, 1);
    const Matrix items = to_matrix(net.parameters().get("item_embedding"));
    std::vector<double> want_z;
    for (const auto& e : items) want_z.push_back(dot(s, e) / std::sqrt(dot(e, e)));
    const auto want_y = softmax(want_z);
    for (std::size_t i = 0; i < 3; ++i) {
      track(dev.scoring, z.value()[i], want_z[i]);
      track(dev.scoring, y.value()[i], want_y[i]);
    }
  }

  // Binary cross-entropy over every item.
  {
    auto net = hand_model(3);
    ad::Tape<double> tape;
    ForwardPass<double> pass(net, tape);
    auto uniform2 = tape.constant(ad::Tensor<double>(ad::Shape{1, 2}, 0.5));
    track(dev.loss, pass.loss(uniform2, 0).value().item(), 2.0 * std::log(2.0));
    auto uniform5 = tape.constant(ad::Tensor<double>(ad::Shape{1, 5}, 0.2));
    track(dev.loss, pass.loss(uniform5, 3).value().item(), -std::log(0.2) - 4.0 * std::log(0.8));
    const std::vector<double> p{0.2, 0.5, 0.3};
    auto fixture = tape.constant(ad::Tensor<double>(ad::Shape{1, 3}, p));
    const double want = -(std::log(0.3) + std::log(1.0 - 0.2) + std::log(1.0 - 0.5));
    track(dev.loss, pass.loss(fixture, 2).value().item(), want);
  }
  return dev;
}

}  // namespace trasa::testing
