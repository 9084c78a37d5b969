#pragma once

#include <cstddef>
#include <functional>
#include <span>

namespace chaoslab {

/// Number of workers used by parallel loops. Capped by CHAOSLAB_THREADS.
std::size_t worker_count();

/// Overrides the worker count for the current process (0 restores the default).
void set_worker_count(std::size_t workers);

/// Runs body(i) for i in [0, count). Each index is visited exactly once;
/// results must be written to per-index slots.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

/// Fixed-order pairwise summation; the result depends only on the input order.
double pairwise_sum(std::span<const double> values);

struct Moments {
  double mean = 0.0;
  double variance = 0.0;  // unbiased
  double std_error = 0.0;  // of the mean
  std::size_t count = 0;
};

Moments sample_moments(std::span<const double> values);

}  // namespace chaoslab
