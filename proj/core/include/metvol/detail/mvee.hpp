#pragma once

#include <vector>

#include "metvol/types.hpp"

namespace metvol::detail {

// Minimum-volume origin-centered enclosing ellipsoid of a symmetric point
// cloud, by Frank-Wolfe iteration on the dual design problem with away
// steps.
struct MveeResult {
    Matrix H;           // {c : c^T H c <= 1} contains every input point
    double epsilon;     // achieved slack: max_i x_i^T M^{-1} x_i / q - 1
    int iterations;
};

MveeResult mvee_symmetric(const std::vector<Vector>& pts, double eps_target, int max_iter);

// Boundary direction set used for sampling unit spheres of sections:
// sign vertices, coordinate axes and quasi-random directions.
std::vector<Vector> boundary_directions(int q, int quasi_count);

}  // namespace metvol::detail
