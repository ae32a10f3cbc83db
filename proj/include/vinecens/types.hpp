#pragma once

#include <array>
#include <string>
#include <vector>

namespace vinecens {

// One cluster of observed times y_j = min(T_j, C_j) with event indicators
// delta_j = 1{T_j <= C_j}.
struct ObservedCluster {
    long id = 0;
    std::vector<double> y;
    std::vector<int> delta;
};

// Copula-scale cluster u_j = S_j(y_j) with indicators carried through.
struct PseudoCluster {
    std::vector<double> u;
    std::vector<int> delta;
};

}  // namespace vinecens
