#include "trasa/ad/gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace trasa::ad {

double relative_error(double analytic, double numeric, double floor) {
  const double scale = std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / scale;
}

void GradCheckStats::merge(const GradCheckStats& other) {
  checked += other.checked;
  if (other.max_relative_error > max_relative_error) {
    max_relative_error = other.max_relative_error;
    worst_index = other.worst_index;
    worst_analytic = other.worst_analytic;
    worst_numeric = other.worst_numeric;
  }
}

GradCheckStats check_gradient(Tensor<double>& param, std::span<const double> analytic,
                              const std::function<double()>& loss, double step) {
  if (analytic.size() != param.size()) {
    throw DimensionError("analytic gradient has " + std::to_string(analytic.size()) +
                         " elements, parameter has " + std::to_string(param.size()));
  }
  GradCheckStats stats;
  auto data = param.data();
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double original = data[i];
    data[i] = original + step;
    const double up = loss();
    data[i] = original - step;
    const double down = loss();
    data[i] = original;
    const double numeric = (up - down) / (2.0 * step);
    const double err = relative_error(analytic[i], numeric);
    ++stats.checked;
    if (stats.checked == 1 || err > stats.max_relative_error) {
      stats.max_relative_error = err;
      stats.worst_index = i;
      stats.worst_analytic = analytic[i];
      stats.worst_numeric = numeric;
    }
  }
  return stats;
}

}  // namespace trasa::ad
