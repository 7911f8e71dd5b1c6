#pragma once

// Pieces shared by the parallel and the reference ensemble kernels.

#include <cstddef>
#include <vector>

#include "osc/sde.hpp"

namespace osc::detail {

/// Steps at which samples are taken: 0, stride, 2 stride, ... and always the
/// last step.
std::vector<std::size_t> record_steps(std::size_t n_steps, std::size_t stride);

VarianceSchedule make_schedule(const ModelParams& params, const SimConfig& sim);

/// Energy that divergence and ratios are measured against: the baseline's if
/// it has a steady state, else the system's conditional-variance floor.
double reference_energy(const IdenticalCase& baseline, const SteadyVariances& sv);

/// Standard error of a mean from sum and sum of squares over n samples.
double standard_error(double sum, double sum_sq, std::size_t n);

}  // namespace osc::detail
