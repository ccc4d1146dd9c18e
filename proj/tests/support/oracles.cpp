#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>
#include <stdexcept>

namespace trasa::testing {

using graph::EdgeType;

// ----------------------------------------------------------------- graphs

namespace {

std::vector<std::size_t> first_occurrence_ids(const graph::Session& session, std::size_t& count) {
  std::map<graph::ItemId, std::size_t> id;
  std::vector<std::size_t> out;
  for (auto item : session) {
    auto it = id.find(item);
    if (it == id.end()) it = id.emplace(item, id.size()).first;
    out.push_back(it->second);
  }
  count = id.size();
  return out;
}

}  // namespace

std::vector<std::vector<int>> brute_edge_types(const graph::Session& session) {
  std::size_t m = 0;
  const auto pos = first_occurrence_ids(session, m);
  std::vector<std::vector<bool>> adjacent(m, std::vector<bool>(m, false));
  for (std::size_t t = 0; t + 1 < pos.size(); ++t) {
    if (pos[t] != pos[t + 1]) adjacent[pos[t]][pos[t + 1]] = true;
  }
  std::vector<std::vector<int>> types(m, std::vector<int>(m, -1));
  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t b = 0; b < m; ++b) {
      if (a == b) {
        types[a][b] = static_cast<int>(EdgeType::kSelf);
      } else if (adjacent[a][b] && adjacent[b][a]) {
        types[a][b] = static_cast<int>(EdgeType::kNpl);
      } else if (adjacent[a][b]) {
        types[a][b] = static_cast<int>(EdgeType::kNxt);
      } else if (adjacent[b][a]) {
        types[a][b] = static_cast<int>(EdgeType::kPre);
      }
    }
  }
  return types;
}

BrutePath brute_shortest_path(const graph::Session& session, std::size_t from, std::size_t to,
                              bool traverse_pre) {
  if (from == to) return BrutePath{1, {EdgeType::kSelf}, {from}};
  const auto types = brute_edge_types(session);
  const std::size_t m = types.size();
  auto usable = [&](std::size_t a, std::size_t b) {
    const int t = types[a][b];
    if (a == b || t < 0) return false;
    return traverse_pre || t != static_cast<int>(EdgeType::kPre);
  };

  std::vector<std::size_t> best;
  std::vector<std::size_t> current{from};
  std::vector<bool> visited(m, false);
  visited[from] = true;
  // Exhaustive depth-first enumeration of simple paths.
  auto explore = [&](auto&& self, std::size_t node) -> void {
    if (node == to) {
      if (best.empty() || current.size() < best.size() ||
          (current.size() == best.size() && current < best)) {
        best = current;
      }
      return;
    }
    for (std::size_t next = 0; next < m; ++next) {
      if (visited[next] || !usable(node, next)) continue;
      visited[next] = true;
      current.push_back(next);
      self(self, next);
      current.pop_back();
      visited[next] = false;
    }
  };
  explore(explore, from);
  if (best.empty()) throw std::runtime_error("brute force: target unreachable");

  BrutePath out;
  out.nodes = best;
  out.length = best.size() - 1;
  for (std::size_t k = 0; k + 1 < best.size(); ++k) {
    out.edge_types.push_back(static_cast<EdgeType>(types[best[k]][best[k + 1]]));
  }
  return out;
}

// ------------------------------------------------------------ dense maths

Matrix to_matrix(const ad::Tensor<double>& t) {
  const std::size_t rows = t.rank() == 1 ? 1 : t.dim(0);
  const std::size_t cols = t.rank() == 1 ? t.dim(0) : t.dim(1);
  Matrix m(rows, std::vector<double>(cols));
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) m[r][c] = t[r * cols + c];
  }
  return m;
}

std::vector<double> row_times(const std::vector<double>& x, const Matrix& w) {
  if (x.size() != w.size()) throw std::invalid_argument("row_times: extent mismatch");
  std::vector<double> out(w[0].size(), 0.0);
  for (std::size_t k = 0; k < x.size(); ++k) {
    for (std::size_t j = 0; j < out.size(); ++j) out[j] += x[k] * w[k][j];
  }
  return out;
}

std::vector<double> add(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
  return out;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

std::vector<double> softmax(const std::vector<double>& x) {
  const double top = *std::max_element(x.begin(), x.end());
  std::vector<double> out(x.size());
  double total = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) total += out[i] = std::exp(x[i] - top);
  for (auto& v : out) v /= total;
  return out;
}

std::vector<double> gru_reference(const model::ParameterSet<double>& params, const std::string& prefix,
                                  const std::vector<EdgeType>& path, bool backward) {
  const Matrix edges = to_matrix(params.get("edge_type_embedding"));
  auto m = [&](const std::string& name) { return to_matrix(params.get(prefix + name)); };
  auto v = [&](const std::string& name) {
    const auto& t = params.get(prefix + name);
    return std::vector<double>(t.data().begin(), t.data().end());
  };
  const Matrix wz = m("W_z"), uz = m("U_z"), wg = m("W_g"), ug = m("U_g"), wh = m("W_h"), uh = m("U_h");
  const auto bz = v("b_z"), bg = v("b_g"), bh = v("b_h");
  const std::size_t hidden = bz.size();
  std::vector<double> h(hidden, 0.0);
  for (std::size_t s = 0; s < path.size(); ++s) {
    const auto type = backward ? path[path.size() - 1 - s] : path[s];
    const auto& x = edges[static_cast<std::size_t>(type)];
    const auto az = add(add(row_times(x, wz), row_times(h, uz)), bz);
    const auto ag = add(add(row_times(x, wg), row_times(h, ug)), bg);
    std::vector<double> gated(hidden);
    for (std::size_t k = 0; k < hidden; ++k) gated[k] = h[k] / (1.0 + std::exp(-ag[k]));
    const auto ah = add(add(row_times(x, wh), row_times(gated, uh)), bh);
    for (std::size_t k = 0; k < hidden; ++k) {
      const double z = 1.0 / (1.0 + std::exp(-az[k]));
      h[k] = (1.0 - z) * h[k] + z * std::tanh(ah[k]);
    }
  }
  return h;
}

std::pair<std::vector<double>, std::vector<double>> relation_reference(
    const model::ParameterSet<double>& params, const std::vector<EdgeType>& path, std::size_t dim) {
  auto r = gru_reference(params, "relation.gru_fwd.", path, false);
  const auto back = gru_reference(params, "relation.gru_bwd.", path, true);
  r.insert(r.end(), back.begin(), back.end());
  const auto split = row_times(r, to_matrix(params.get("relation.W_r")));
  return {std::vector<double>(split.begin(), split.begin() + static_cast<std::ptrdiff_t>(dim)),
          std::vector<double>(split.begin() + static_cast<std::ptrdiff_t>(dim), split.end())};
}

void fill_hand_weights(model::ParameterSet<double>& params) {
  std::size_t counter = 0;
  for (std::size_t p = 0; p < params.size(); ++p) {
    for (auto& v : params.at(p).data()) {
      v = 0.05 * static_cast<double>(static_cast<int>((counter * 7 + 3) % 13) - 6);
      ++counter;
    }
  }
}

// ---------------------------------------------------------------- fixtures

std::string preprocessing_log() {
  // Session s<k> clicks at 100k + position unless noted.
  return "session_id,item_id,timestamp\n"
         "s1,a,101\n"
         "s1,b,102\n"
         "s1,c,103\n"
         "s2,b,201\n"
         "s2,c,202\n"
         "s2,d,203\n"
         "s3,a,301\n"
         "s3,x,302\n"
         // s4 rows appear out of chronological order.
         "s4,b,404\n"
         "s4,a,403\n"
         "s4,d,402\n"
         "s4,c,401\n"
         "s5,y,501\n"
         "s5,y,502\n"
         "s6,a,601\n"
         "s6,b,602\n"
         "s6,d,602\n"
         "s7,d,701\n"
         "s7,c,702\n"
         "s7,e,703\n"
         "s8,e,801\n"
         "s8,a,802\n"
         "s8,y,803\n"
         "broken row without enough fields\n"
         "s9,b,901\n"
         "s9,e,902\n"
         "s9,d,903\n"
         "s10,c,1001\n"
         "s10,a,1002\n"
         "s10,e,1003\n"
         "s10,x,1004\n"
         "s11,y,1101\n"
         "s11,e,1102\n"
         "s11,a,1103\n"
         "s12,b,1201\n"
         "s12,z,1202\n"
         "s12,z,1203\n"
         "s12,z,1204\n"
         "s12,z,1205\n"
         "s12,z,1206\n";
}

PreprocessingExpectation preprocessing_expectation() {
  // Support: a7 b6 c5 d5 e5 z5 keep; x2 y4 drop. s3 -> [a] and s5 -> []
  // fall to the length rule. Ten sessions remain; the last two by time
  // (s11, s12) form the test split and s12 holds z, unseen in training.
  // Vocabulary by first occurrence in chronological training sessions.
  PreprocessingExpectation e;
  e.vocabulary = {"a", "b", "c", "d", "e"};
  e.train = {
      {{0}, 1}, {{0, 1}, 2},             // s1 a b c
      {{1}, 2}, {{1, 2}, 3},             // s2 b c d
      {{2}, 3}, {{2, 3}, 0}, {{2, 3, 0}, 1},  // s4 c d a b
      {{0}, 1}, {{0, 1}, 3},             // s6 a b d
      {{3}, 2}, {{3, 2}, 4},             // s7 d c e
      {{4}, 0},                          // s8 e a
      {{1}, 4}, {{1, 4}, 3},             // s9 b e d
      {{2}, 0}, {{2, 0}, 4},             // s10 c a e
  };
  e.test = {{{4}, 0}};  // s11 e a
  e.stats.sessions = 9;
  e.stats.clicks = 26;
  e.stats.items = 5;
  e.stats.average_length = 26.0 / 9.0;
  e.malformed_rows = 1;
  e.dropped_test_sessions = 1;
  e.dropped_test_instances = 5;
  return e;
}

model::TrasaModel<float> rank_fixture_model() {
  model::Hyperparams hp;
  hp.vocab_size = 25;
  hp.dim = 2;
  hp.num_heads = 1;
  hp.ablation = model::Ablation::kWoSan;
  hp.readout = model::Readout::kSum;
  model::TrasaModel<float> net(hp, 1);
  auto& items = net.parameters().get("item_embedding");
  for (std::size_t b = 0; b < hp.vocab_size; ++b) {
    items.at(b, 0) = static_cast<float>(std::cos(0.1 * static_cast<double>(b)));
    items.at(b, 1) = static_cast<float>(std::sin(0.1 * static_cast<double>(b)));
  }
  auto& positions = net.parameters().get("position_embedding");
  std::fill(positions.data().begin(), positions.data().end(), 0.0f);
  return net;
}

std::vector<data::Instance> rank_fixture_instances() {
  return {{{0}, 0}, {{0}, 3}, {{0}, 20}, {{0}, 1}};
}

TempDir::TempDir(const std::string& tag) {
  std::string pattern = (std::filesystem::temp_directory_path() / ("trasa-" + tag + "-XXXXXX")).string();
  if (mkdtemp(pattern.data()) == nullptr) throw std::runtime_error("mkdtemp failed");
  path_ = pattern;
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

}  // namespace trasa::testing
