#pragma once

#include <functional>
#include <span>
#include <vector>

namespace volcast::opt {

struct NelderMeadOptions {
    int max_evals = 20000;      // hard cap; hitting it means "not converged"
    double f_tol = 1e-12;       // simplex function-value spread
    double x_tol = 1e-10;       // simplex vertex spread
    double initial_step = 0.25; // per-dimension simplex offset (overridable)
    std::vector<double> steps;  // optional per-dimension offsets
};

struct NelderMeadResult {
    std::vector<double> x;
    double fx = 0.0;
    int evaluations = 0;
    bool converged = false;
};

// Downhill simplex minimization (reflection 1, expansion 2, contraction 0.5,
// shrink 0.5). Zero-dimensional input evaluates f once and returns.
NelderMeadResult minimize(const std::function<double(std::span<const double>)>& f,
                          std::span<const double> x0, const NelderMeadOptions& options = {});

} // namespace volcast::opt
