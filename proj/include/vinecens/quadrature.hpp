#pragma once

#include <vector>

namespace vinecens {

// Gauss-Legendre rule mapped to (0,1).
struct GaussLegendre {
    std::vector<double> nodes;
    std::vector<double> weights;
};

// Cached rule with n points; thread-safe.
const GaussLegendre& gauss_legendre(int n);

}  // namespace vinecens
