#pragma once

#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace volcast::arima {

// ---- KPSS stationarity test (level variant) --------------------------------

inline constexpr double kKpss5PctCritical = 0.463;

struct KpssResult {
    double statistic = 0.0;
    int lags = 0;
    bool reject_at_5pct = false;
};

// Level-stationarity KPSS statistic: partial sums of the demeaned series over
// n^2 times the Bartlett-kernel Newey-West long-run variance. lags < 0 picks
// the floor(4*(n/100)^(1/4)) truncation. A constant series has statistic 0.
KpssResult kpss_statistic(std::span<const double> series, int lags = -1);

// Smallest d in 0..max_d whose d-times-differenced series is not rejected by
// KPSS at 5%; max_d if every candidate rejects.
int select_differencing(std::span<const double> series, int max_d = 2);

// ---- ARIMA(p,d,q) by conditional sum of squares -----------------------------

struct ArimaOrder {
    int p = 0;
    int d = 0;
    int q = 0;
};

struct ArimaModel {
    ArimaOrder order;
    std::vector<double> ar;  // phi_1..phi_p
    std::vector<double> ma;  // theta_1..theta_q
    double mean = 0.0;       // included only when d == 0
    bool include_mean = false;
    double sigma2 = 0.0;
    double aic = std::numeric_limits<double>::infinity();
    double css = std::numeric_limits<double>::infinity();
    int n_obs = 0;  // observations entering the CSS sum
    bool converged = false;
    bool variance_floored = false;
};

// Differences x d times (each pass drops one leading value).
std::vector<double> difference(std::span<const double> x, int d);

// Inverse of difference: rebuilds the level series from the d-times
// differenced series w and the first d original values.
std::vector<double> integrate(std::span<const double> w, int d,
                              std::span<const double> initial);

// Minimizes the conditional sum of squares of the innovations
//   e_t = w_t - mu - sum_i phi_i (w_{t-i} - mu) - sum_j theta_j e_{t-j}
// over the d-times differenced series. Pre-sample innovations are seeded
// with zeros and pre-sample values with the mean, so the sum runs over all
// n_eff = length(w) observations for every order and the resulting AICs
// are comparable across the (p,q) grid. AR/MA coefficients start at zero (plus
// any warm starts) and are box-constrained to (-0.99, 0.99); the mean,
// present only when d = 0, starts at the sample mean. sigma2 = CSS/n_eff
// and AIC = 2k + n_eff (ln(2 pi sigma2) + 1) with k counting coefficients,
// the variance and the mean.
ArimaModel fit_arma_css(std::span<const double> series, ArimaOrder order,
                        const std::vector<std::vector<double>>& warm_starts = {});

// KPSS-selected d, then all (p,q) in [0,max_p] x [0,max_q] fitted with
// nested warm starts; minimum AIC wins, ties to smaller p+q then smaller p.
// Fits whose AR or MA polynomial has a root within 1.01 of the unit circle
// (spurious near-canceling factors) are excluded from selection.
ArimaModel auto_arima(std::span<const double> series, std::string_view label = "",
                      int max_p = 3, int max_q = 3, int max_d = 2);

// One-step-ahead forecast on the raw scale. Innovations are rebuilt from the
// full history with the fitted (fixed) coefficients, the next differenced
// value is formed and integrated back d times.
double forecast_one_step(const ArimaModel& model, std::span<const double> history);

// Internal objective, exposed for oracle tests: CSS of fixed coefficients on
// the already-differenced series.
double css_objective(std::span<const double> w, std::span<const double> ar,
                     std::span<const double> ma, double mean);

} // namespace volcast::arima
