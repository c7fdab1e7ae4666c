#pragma once

#include <cstdint>
#include <vector>

#include "volcast/date.hpp"
#include "volcast/marketdata.hpp"

namespace volcast::marketdata {

// Shared-factor log-volatility process:
//
//   log v_i(t) = mu_i + phi * (log v_i(t-1) - mu_i) + beta_i * f(t) + sigma * eps_i(t)
//   f(t)       = factor_phi * f(t-1) + factor_sigma * eta(t)
//
// Per-series levels mu_i and factor loadings beta_i are drawn uniformly from
// the ranges below. Values are positive by construction and persistent,
// mean-reverting and cross-correlated like the real panels this stands in for.
struct GeneratorParams {
    double phi = 0.92;            // idiosyncratic AR(1) persistence
    double sigma = 0.06;          // idiosyncratic innovation std
    double factor_phi = 0.98;     // common factor persistence
    double factor_sigma = 0.0015; // factor innovation std (the factor feeds a
                                  // persistent AR, so small innovations still
                                  // move log-volatility visibly)
    double mu_min = -1.9;       // long-run log-volatility level range
    double mu_max = -1.1;
    double beta_min = 0.5;      // factor loading range
    double beta_max = 1.5;
    int burn_in = 250;          // steps discarded before the emitted sample
    Date start_date{2009, 1, 2};
};

// Deterministic given (n_series, n_days, seed, params). Series are named
// S000, S001, ... and share one daily calendar from params.start_date.
std::vector<VolatilitySeries> generate_synthetic_panel(int n_series, int n_days,
                                                       std::uint64_t seed,
                                                       const GeneratorParams& params = {});

} // namespace volcast::marketdata
