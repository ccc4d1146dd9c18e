#include "trasa/train/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <istream>

#include "trasa/errors.hpp"

namespace trasa::train {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <typename U>
U parse_unsigned(const std::string& key, const std::string& text) {
  U value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) {
    throw ConfigError("config '" + key + "' expects a non-negative integer, got '" + text + "'");
  }
  return value;
}

double parse_double(const std::string& key, const std::string& text) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size() || !std::isfinite(v)) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config '" + key + "' expects a number, got '" + text + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "1" || text == "true" || text == "yes" || text == "on") return true;
  if (text == "0" || text == "false" || text == "no" || text == "off") return false;
  throw ConfigError("config '" + key + "' expects a boolean, got '" + text + "'");
}

std::string real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

struct Field {
  std::string key;
  std::function<void(TrainConfig&, const std::string&)> set;
  std::function<std::string(const TrainConfig&)> get;
};

const std::vector<Field>& fields() {
  static const std::vector<Field> all = [] {
    std::vector<Field> f;
    auto size_field = [&f](const std::string& key, std::size_t TrainConfig::*member) {
      f.push_back({key,
                   [key, member](TrainConfig& c, const std::string& v) {
                     c.*member = parse_unsigned<std::size_t>(key, v);
                   },
                   [member](const TrainConfig& c) { return std::to_string(c.*member); }});
    };
    auto real_field = [&f](const std::string& key, double TrainConfig::*member) {
      f.push_back({key,
                   [key, member](TrainConfig& c, const std::string& v) {
                     c.*member = parse_double(key, v);
                   },
                   [member](const TrainConfig& c) { return real(c.*member); }});
    };
    real_field("learning_rate", &TrainConfig::learning_rate);
    real_field("lr_decay_factor", &TrainConfig::lr_decay_factor);
    size_field("lr_decay_every_epochs", &TrainConfig::lr_decay_every_epochs);
    real_field("weight_decay", &TrainConfig::weight_decay);
    real_field("dropout", &TrainConfig::dropout);
    size_field("batch_size", &TrainConfig::batch_size);
    size_field("max_epochs", &TrainConfig::max_epochs);
    size_field("early_stop_patience", &TrainConfig::early_stop_patience);
    size_field("validation_k", &TrainConfig::validation_k);
    f.push_back({"seed",
                 [](TrainConfig& c, const std::string& v) {
                   c.seed = parse_unsigned<std::uint64_t>("seed", v);
                 },
                 [](const TrainConfig& c) { return std::to_string(c.seed); }});
    f.push_back({"ablation",
                 [](TrainConfig& c, const std::string& v) { c.ablation = model::parse_ablation(v); },
                 [](const TrainConfig& c) { return std::string(model::to_string(c.ablation)); }});
    f.push_back({"readout",
                 [](TrainConfig& c, const std::string& v) { c.readout = model::parse_readout(v); },
                 [](const TrainConfig& c) { return std::string(model::to_string(c.readout)); }});
    f.push_back({"loss_mode",
                 [](TrainConfig& c, const std::string& v) { c.loss = model::parse_loss_mode(v); },
                 [](const TrainConfig& c) { return std::string(model::to_string(c.loss)); }});
    size_field("dim", &TrainConfig::dim);
    size_field("num_heads", &TrainConfig::num_heads);
    size_field("num_layers", &TrainConfig::num_layers);
    size_field("ffn_inner", &TrainConfig::ffn_inner);
    size_field("max_positions", &TrainConfig::max_positions);
    size_field("path_cap", &TrainConfig::path_cap);
    f.push_back({"traverse_pre",
                 [](TrainConfig& c, const std::string& v) { c.traverse_pre = parse_bool("traverse_pre", v); },
                 [](const TrainConfig& c) { return std::string(c.traverse_pre ? "true" : "false"); }});
    real_field("init_std", &TrainConfig::init_std);
    return f;
  }();
  return all;
}

}  // namespace

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
  if (!(lr_decay_factor > 0.0)) throw ConfigError("lr_decay_factor must be positive");
  if (lr_decay_every_epochs == 0) throw ConfigError("lr_decay_every_epochs must be at least 1");
  if (!(weight_decay >= 0.0)) throw ConfigError("weight_decay must be non-negative");
  if (batch_size == 0) throw ConfigError("batch_size must be at least 1");
  if (max_epochs == 0) throw ConfigError("max_epochs must be at least 1");
  if (early_stop_patience == 0) throw ConfigError("early_stop_patience must be at least 1");
  if (validation_k == 0) throw ConfigError("validation_k must be at least 1");
  hyperparams(1).validate();
}

model::Hyperparams TrainConfig::hyperparams(std::size_t vocab_size) const {
  model::Hyperparams hp;
  hp.vocab_size = vocab_size;
  hp.dim = dim;
  hp.num_heads = num_heads;
  hp.num_layers = num_layers;
  hp.ffn_inner = ffn_inner;
  hp.dropout = dropout;
  hp.max_positions = max_positions;
  hp.path_cap = path_cap;
  hp.traverse_pre = traverse_pre;
  hp.init_std = init_std;
  hp.ablation = ablation;
  hp.readout = readout;
  hp.loss = loss;
  return hp;
}

ConfigValues parse_config(std::istream& in) {
  ConfigValues values;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + " lacks '='");
    }
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError("config line " + std::to_string(line_no) + " has an empty key");
    if (!values.emplace(key, trim(line.substr(eq + 1))).second) {
      throw ConfigError("config key '" + key + "' repeated on line " + std::to_string(line_no));
    }
  }
  return values;
}

ConfigValues read_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config file '" + path.string() + "'");
  return parse_config(in);
}

void apply_config(TrainConfig& config, const ConfigValues& values) {
  for (const auto& [key, value] : values) {
    bool found = false;
    for (const auto& field : fields()) {
      if (field.key == key) {
        field.set(config, value);
        found = true;
        break;
      }
    }
    if (!found) throw ConfigError("unknown config key '" + key + "'");
  }
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& field : fields()) k.push_back(field.key);
    return k;
  }();
  return keys;
}

std::string format_config(const TrainConfig& config) {
  std::string out;
  for (const auto& field : fields()) out += field.key + " = " + field.get(config) + "\n";
  return out;
}

}  // namespace trasa::train
