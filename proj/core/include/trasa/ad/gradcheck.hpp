#pragma once

#include <cstddef>
#include <functional>
#include <span>

#include "trasa/ad/tensor.hpp"

namespace trasa::ad {

inline constexpr double kFiniteDifferenceStep = 1e-5;
/// Gradients smaller than this are compared in absolute terms: central
/// differences at step 1e-5 carry roughly 1e-10 of round-off noise.
inline constexpr double kRelativeErrorFloor = 1e-5;

/// |analytic - numeric| / max(|analytic|, |numeric|, floor).
double relative_error(double analytic, double numeric, double floor = kRelativeErrorFloor);

struct GradCheckStats {
  std::size_t checked = 0;
  double max_relative_error = 0.0;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;

  void merge(const GradCheckStats& other);
};

/// Compares `analytic` against central differences of `loss` taken by
/// perturbing each element of `param` in place (restored afterwards).
GradCheckStats check_gradient(Tensor<double>& param, std::span<const double> analytic,
                              const std::function<double()>& loss,
                              double step = kFiniteDifferenceStep);

}  // namespace trasa::ad
