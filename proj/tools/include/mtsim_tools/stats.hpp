#pragma once

#include <span>

namespace mtsim::tools {

double mean(std::span<const double> xs);
/// Standard error of the mean (sample standard deviation / sqrt(n)).
double standard_error(std::span<const double> xs);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
};

/// Ordinary least squares y = slope * x + intercept.
LinearFit least_squares(std::span<const double> x, std::span<const double> y);

/// Smallest C with y_i <= bound * x_i + C for every point.
double additive_constant(std::span<const double> x, std::span<const double> y,
                         double bound);

}  // namespace mtsim::tools
