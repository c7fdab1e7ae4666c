#pragma once

#include <span>
#include <string>
#include <vector>

#include "volcast/date.hpp"

namespace volcast::metrics {

// One model's walk-forward output for one stock. previous_actual[t] is the
// realized value on the day before forecast date t; direction labels compare
// against it.
struct ForecastSeries {
    std::string ticker;
    std::vector<Date> dates;
    std::vector<double> actual;
    std::vector<double> predicted;
    std::vector<double> previous_actual;
};

struct MetricRow {
    double rmse = 0.0;
    double smape = 0.0;    // percent, bounded by 200
    double accuracy = 0.0; // fraction of matching direction calls
    double f1 = 0.0;       // positive class = "up"
};

double rmse(std::span<const double> actual, std::span<const double> predicted);

// (100/n) * sum |p-a| / ((|a|+|p|)/2); a term with a = p = 0 contributes 0.
double smape(std::span<const double> actual, std::span<const double> predicted);

// Strict comparison against the previous realized value; no change counts
// as "not up" on both sides.
struct DirectionLabels {
    std::vector<bool> actual_up;
    std::vector<bool> predicted_up;
};
DirectionLabels directions(const ForecastSeries& series);

double accuracy(const std::vector<bool>& actual_up, const std::vector<bool>& predicted_up);

// 2 P R / (P + R), zero whenever precision + recall is zero (including the
// no-positives-anywhere case).
double f1(const std::vector<bool>& actual_up, const std::vector<bool>& predicted_up);

MetricRow evaluate(const ForecastSeries& series);

// Unweighted per-field mean across stocks.
MetricRow aggregate(std::span<const MetricRow> rows);

} // namespace volcast::metrics
