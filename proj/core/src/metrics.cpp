#include "volcast/metrics.hpp"

#include <cmath>

#include "volcast/errors.hpp"

namespace volcast::metrics {

namespace {

void check_pair(std::size_t a, std::size_t b, const char* op) {
    if (a != b) throw ConfigError(std::string(op) + ": length mismatch");
    if (a == 0) throw ConfigError(std::string(op) + ": empty input");
}

} // namespace

double rmse(std::span<const double> actual, std::span<const double> predicted) {
    check_pair(actual.size(), predicted.size(), "rmse");
    double sum = 0.0;
    for (std::size_t i = 0; i < actual.size(); ++i) {
        const double d = actual[i] - predicted[i];
        sum += d * d;
    }
    return std::sqrt(sum / static_cast<double>(actual.size()));
}

double smape(std::span<const double> actual, std::span<const double> predicted) {
    check_pair(actual.size(), predicted.size(), "smape");
    double sum = 0.0;
    for (std::size_t i = 0; i < actual.size(); ++i) {
        const double denom = (std::abs(actual[i]) + std::abs(predicted[i])) / 2.0;
        if (denom > 0.0) sum += std::abs(predicted[i] - actual[i]) / denom;
    }
    return 100.0 * sum / static_cast<double>(actual.size());
}

DirectionLabels directions(const ForecastSeries& series) {
    const std::size_t n = series.actual.size();
    if (series.predicted.size() != n || series.previous_actual.size() != n || n == 0) {
        throw ConfigError("directions: misaligned forecast series");
    }
    DirectionLabels labels;
    labels.actual_up.resize(n);
    labels.predicted_up.resize(n);
    for (std::size_t t = 0; t < n; ++t) {
        labels.actual_up[t] = series.actual[t] > series.previous_actual[t];
        labels.predicted_up[t] = series.predicted[t] > series.previous_actual[t];
    }
    return labels;
}

double accuracy(const std::vector<bool>& actual_up, const std::vector<bool>& predicted_up) {
    check_pair(actual_up.size(), predicted_up.size(), "accuracy");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < actual_up.size(); ++i) {
        if (actual_up[i] == predicted_up[i]) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(actual_up.size());
}

double f1(const std::vector<bool>& actual_up, const std::vector<bool>& predicted_up) {
    check_pair(actual_up.size(), predicted_up.size(), "f1");
    std::size_t tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < actual_up.size(); ++i) {
        if (predicted_up[i] && actual_up[i]) ++tp;
        if (predicted_up[i] && !actual_up[i]) ++fp;
        if (!predicted_up[i] && actual_up[i]) ++fn;
    }
    const double precision = tp + fp > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
    const double recall = tp + fn > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
    if (precision + recall <= 0.0) return 0.0;
    return 2.0 * precision * recall / (precision + recall);
}

MetricRow evaluate(const ForecastSeries& series) {
    const auto labels = directions(series);
    MetricRow row;
    row.rmse = rmse(series.actual, series.predicted);
    row.smape = smape(series.actual, series.predicted);
    row.accuracy = accuracy(labels.actual_up, labels.predicted_up);
    row.f1 = f1(labels.actual_up, labels.predicted_up);
    return row;
}

MetricRow aggregate(std::span<const MetricRow> rows) {
    if (rows.empty()) throw ConfigError("aggregate: no rows");
    MetricRow mean;
    for (const auto& row : rows) {
        mean.rmse += row.rmse;
        mean.smape += row.smape;
        mean.accuracy += row.accuracy;
        mean.f1 += row.f1;
    }
    const double n = static_cast<double>(rows.size());
    mean.rmse /= n;
    mean.smape /= n;
    mean.accuracy /= n;
    mean.f1 /= n;
    return mean;
}

} // namespace volcast::metrics
