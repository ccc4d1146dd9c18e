#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "trasa/ad/gradcheck.hpp"
#include "trasa/data/preprocess.hpp"
#include "trasa/model/hyperparams.hpp"

namespace trasa::train {

/// n=6, d=8, H=2, one layer, dropout active with fixed masks.
model::Hyperparams toy_hyperparams();

/// Prefixes of length 3 to 5 with repeated items, so the graphs carry NXT,
/// PRE, NPL and SELF edges.
std::vector<data::Instance> toy_instances();

struct GradCheckCase {
  std::string name;
  model::Hyperparams hp;
};

/// Every ablation, every readout, both loss modes, PRE traversal and a
/// two-layer stack.
std::vector<GradCheckCase> default_gradcheck_cases();

struct ParameterCheck {
  std::string case_name;
  std::string parameter;
  ad::GradCheckStats stats;
};

struct GradCheckReport {
  std::vector<ParameterCheck> checks;
  double max_relative_error = 0.0;
  std::size_t elements = 0;

  bool passed(double tolerance) const { return max_relative_error < tolerance; }
};

/// Analytic gradients of the summed instance losses against central
/// differences, for every element of every parameter, in double precision.
GradCheckReport run_gradcheck_suite(const std::vector<GradCheckCase>& cases,
                                    const std::vector<data::Instance>& instances,
                                    std::uint64_t seed = 7);

/// One line per parameter plus a summary line.
std::string format_gradcheck(const GradCheckReport& report);

}  // namespace trasa::train
