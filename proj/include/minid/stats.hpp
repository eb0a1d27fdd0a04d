#pragma once

#include <span>

namespace minid {

struct MeanError {
  double mean;
  double std_error;
};

// Two-pass mean with its standard error; a constant sample returns the
// constant with zero error.
MeanError sample_mean(std::span<const double> x);

// Standard error of a proportion p estimated from n trials.
double binomial_std_error(double p, double n);

// Standard normal quantile.
double normal_quantile(double p);

}  // namespace minid
