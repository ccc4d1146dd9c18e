#include "trasa/train/gradcheck_suite.hpp"

#include <cstdio>

#include "trasa/model/trasa_model.hpp"

namespace trasa::train {

using model::Ablation;
using model::LossMode;
using model::Readout;

model::Hyperparams toy_hyperparams() {
  model::Hyperparams hp;
  hp.vocab_size = 6;
  hp.dim = 8;
  hp.num_heads = 2;
  hp.num_layers = 1;
  hp.ffn_inner = 16;
  hp.dropout = 0.1;
  hp.max_positions = 8;
  hp.path_cap = 16;
  hp.init_std = 0.5;
  return hp;
}

std::vector<data::Instance> toy_instances() {
  return {
      {{0, 1, 2, 1}, 3},
      {{4, 5, 4}, 0},
      {{2, 3, 5, 0, 3}, 1},
      {{5, 1, 0}, 2},
  };
}

std::vector<GradCheckCase> default_gradcheck_cases() {
  const auto base = toy_hyperparams();
  auto with = [&](const std::string& name, auto edit) {
    model::Hyperparams hp = base;
    edit(hp);
    return GradCheckCase{name, hp};
  };
  return {
      with("full", [](model::Hyperparams&) {}),
      with("full_standard_ce", [](model::Hyperparams& hp) { hp.loss = LossMode::kStandardCe; }),
      with("full_traverse_pre", [](model::Hyperparams& hp) { hp.traverse_pre = true; }),
      with("full_two_layers", [](model::Hyperparams& hp) { hp.num_layers = 2; }),
      with("wo_pos", [](model::Hyperparams& hp) { hp.ablation = Ablation::kWoPos; }),
      with("wo_rel_pos", [](model::Hyperparams& hp) { hp.ablation = Ablation::kWoRelPos; }),
      with("wo_san", [](model::Hyperparams& hp) { hp.ablation = Ablation::kWoSan; }),
      with("readout_san", [](model::Hyperparams& hp) { hp.readout = Readout::kSan; }),
      with("readout_sum", [](model::Hyperparams& hp) { hp.readout = Readout::kSum; }),
      with("readout_graph", [](model::Hyperparams& hp) { hp.readout = Readout::kGraph; }),
  };
}

GradCheckReport run_gradcheck_suite(const std::vector<GradCheckCase>& cases,
                                    const std::vector<data::Instance>& instances,
                                    std::uint64_t seed) {
  GradCheckReport report;
  for (const auto& c : cases) {
    model::TrasaModel<double> net(c.hp, seed);
    auto pass_for = [&](std::size_t i) { return model::PassOptions{true, seed * 1000 + i}; };

    auto& params = net.parameters();
    params.zero_grad();
    for (std::size_t i = 0; i < instances.size(); ++i) {
      net.accumulate_gradients(instances[i].prefix, instances[i].label, 1.0, pass_for(i));
    }
    auto total_loss = [&] {
      double sum = 0.0;
      for (std::size_t i = 0; i < instances.size(); ++i) {
        sum += net.instance_loss(instances[i].prefix, instances[i].label, pass_for(i));
      }
      return sum;
    };

    for (std::size_t p = 0; p < params.size(); ++p) {
      auto& tensor = params.at(p);
      const std::vector<double> analytic = tensor.grad_buffer();
      const auto stats = ad::check_gradient(tensor, analytic, total_loss);
      report.elements += stats.checked;
      if (stats.max_relative_error > report.max_relative_error) {
        report.max_relative_error = stats.max_relative_error;
      }
      report.checks.push_back({c.name, params.names()[p], stats});
    }
  }
  return report;
}

std::string format_gradcheck(const GradCheckReport& report) {
  std::string out;
  char buf[256];
  for (const auto& c : report.checks) {
    std::snprintf(buf, sizeof(buf), "%s %s elements=%zu max_rel_err=%.3e\n", c.case_name.c_str(),
                  c.parameter.c_str(), c.stats.checked, c.stats.max_relative_error);
    out += buf;
  }
  std::snprintf(buf, sizeof(buf), "checked_elements=%zu\nmax_relative_error=%.3e\n", report.elements,
                report.max_relative_error);
  out += buf;
  return out;
}

}  // namespace trasa::train
