#pragma once

#include <span>

#include "vinecens/types.hpp"
#include "vinecens/vine.hpp"

namespace vinecens {

// Evaluations smaller than this are floored before taking the log.
inline constexpr double kLogFloor = 1e-300;

// Log of the cluster's likelihood contribution: the mixed partial of the
// copula CDF in the uncensored coordinates.
double cluster_loglik(const DVineModel& m, const PseudoCluster& pc, int quad_nodes = 21,
                      long cluster_index = -1);

// Sum of cluster contributions. Clusters may be evaluated in parallel; the
// reduction sorts the per-cluster values first, so the result is exactly
// invariant under permutation of the input.
double total_loglik(const DVineModel& m, std::span<const PseudoCluster> data,
                    int quad_nodes = 21, bool parallel = true);

}  // namespace vinecens
