#pragma once

#include <cstdint>
#include <optional>

#include "statrom/linalg.hpp"

namespace statrom {

/// Number of dimensions covered by the embedded Joe-Kuo direction table.
int sobol_table_dims();

/// First n points of the dim-dimensional Sobol sequence in Gray-code order,
/// one point per row. Without a shift seed this is the plain (unscrambled)
/// sequence, whose first point is the origin. With a seed, every dimension
/// gets a seed-derived digital shift (XOR on the 32-bit integer state), which
/// decorrelates replicate runs while keeping the low-discrepancy structure.
Matrix sobol_uniform(int dim, int n, std::optional<std::uint64_t> shift_seed = std::nullopt);

/// Digitally shifted Sobol points pushed through the standard normal inverse
/// CDF; the workhorse behind all sampling in the pipeline.
Matrix sobol_gaussian(int dim, int n, std::uint64_t seed);

/// Standard normal quantile. p is clamped to [1e-12, 1 - 1e-12] so the tails
/// stay finite for the origin point of an unshifted sequence.
double normal_quantile(double p);

}  // namespace statrom
