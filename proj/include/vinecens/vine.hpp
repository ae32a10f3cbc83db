#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "vinecens/copula.hpp"

namespace vinecens {

// D-vine in dimension 3 or 4 under the simplifying assumption. `order` is the
// first-tree path (0-based variable indices). Edges in canonical order: the
// d-1 first-tree edges left to right, then the second tree, then (d=4) the
// third tree.
struct DVineModel {
    int d = 3;
    std::vector<int> order;        // size d, permutation of 0..d-1
    std::vector<PairCopula> edges; // size d(d-1)/2
};

void validate_model(const DVineModel& m);
int edge_count(int d);

// Edge labels in 1-based variable indices, e.g. "13", "34;1", "14;23".
std::vector<std::string> edge_labels(const DVineModel& m);

// Which coordinates are uncensored; selects the likelihood-contribution form.
struct CensoringPattern {
    int d = 0;
    std::array<bool, 4> uncensored{};  // indexed by coordinate
};

CensoringPattern censoring_pattern(std::span<const int> delta);
std::string pattern_label(const CensoringPattern& p);

// Copula density at an interior point (coordinates indexed by variable).
double vine_density(const DVineModel& m, std::span<const double> u);

// Conditional CDF of one variable given one or two others, available when the
// conditioning set is contiguous in the first tree with the target adjacent.
double vine_conditional_cdf(const DVineModel& m, int target, std::span<const int> given,
                            std::span<const double> u);

// Mixed partial of the copula CDF with respect to exactly the uncensored
// coordinates; censored coordinates are integrated out with a tensor
// Gauss-Legendre rule over [0,u_j].
double vine_partial_derivative(const DVineModel& m, const CensoringPattern& pattern,
                               std::span<const double> u, int quad_nodes = 21);

// n draws by inverse Rosenblatt transform along the first-tree path.
std::vector<std::vector<double>> sample_vine(const DVineModel& m, std::size_t n,
                                             std::uint64_t seed);

}  // namespace vinecens
