#pragma once

#include <functional>

#include "metvol/types.hpp"

namespace metvol::opt {

using Objective = std::function<double(const Vector&)>;

struct NelderMeadOptions {
    int max_iter = 600;
    double x_tol = 1e-11;
    double f_tol = 1e-13;
    double init_step = 0.25;
};

// Minimizes f starting from x; on exit x holds the best point found and the
// best value is returned.  Robust on convex nonsmooth objectives in the
// small dimensions (<= ~10) this library works in.
double nelder_mead(const Objective& f, Vector& x, const NelderMeadOptions& opts = {});

// Golden-section minimization of a scalar unimodal function on [lo, hi].
double golden_section(const std::function<double(double)>& f, double lo, double hi,
                      double tol = 1e-12, int max_iter = 200);

}  // namespace metvol::opt
