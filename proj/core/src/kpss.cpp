#include <cmath>
#include <string>

#include "volcast/arima.hpp"
#include "volcast/errors.hpp"

namespace volcast::arima {

KpssResult kpss_statistic(std::span<const double> series, int lags) {
    const std::size_t n = series.size();
    if (n < 10) throw DataError("kpss_statistic: need at least 10 observations");
    if (lags < 0) {
        lags = static_cast<int>(
            std::floor(4.0 * std::pow(static_cast<double>(n) / 100.0, 0.25)));
    }
    if (static_cast<std::size_t>(lags) >= n) {
        throw ConfigError("kpss_statistic: lag truncation >= series length");
    }

    double mean = 0.0;
    for (double x : series) mean += x;
    mean /= static_cast<double>(n);

    std::vector<double> e(n);
    for (std::size_t t = 0; t < n; ++t) e[t] = series[t] - mean;

    double cumulative = 0.0;
    double partial_sum_sq = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
        cumulative += e[t];
        partial_sum_sq += cumulative * cumulative;
    }

    // Newey-West long-run variance with Bartlett weights 1 - j/(l+1)
    double gamma0 = 0.0;
    for (std::size_t t = 0; t < n; ++t) gamma0 += e[t] * e[t];
    gamma0 /= static_cast<double>(n);
    double long_run = gamma0;
    for (int j = 1; j <= lags; ++j) {
        double gamma = 0.0;
        for (std::size_t t = static_cast<std::size_t>(j); t < n; ++t) {
            gamma += e[t] * e[t - static_cast<std::size_t>(j)];
        }
        gamma /= static_cast<double>(n);
        const double weight = 1.0 - static_cast<double>(j) / (static_cast<double>(lags) + 1.0);
        long_run += 2.0 * weight * gamma;
    }

    KpssResult result;
    result.lags = lags;
    if (long_run <= 0.0) {
        result.statistic = 0.0; // constant series: zero partial-sum residuals
        result.reject_at_5pct = false;
        return result;
    }
    result.statistic = partial_sum_sq / (static_cast<double>(n) * static_cast<double>(n) * long_run);
    result.reject_at_5pct = result.statistic > kKpss5PctCritical;
    return result;
}

int select_differencing(std::span<const double> series, int max_d) {
    if (max_d < 0) throw ConfigError("select_differencing: max_d must be >= 0");
    std::vector<double> current(series.begin(), series.end());
    for (int d = 0; d <= max_d; ++d) {
        if (current.size() < 10) {
            throw DataError("select_differencing: series too short after differencing " +
                            std::to_string(d) + " times");
        }
        if (!kpss_statistic(current).reject_at_5pct) return d;
        if (d < max_d) current = difference(current, 1);
    }
    return max_d;
}

} // namespace volcast::arima
